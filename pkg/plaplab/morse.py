"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math
from dataclasses import dataclass
from enum import Enum, unique
from typing import Final, NamedTuple, Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._common import FloatArray, format_index
from ._logger import logger
from .discretization import AssembledQuadratic, DiscreteField, assemble_gradient, assemble_hessian
from .energy import EnergySpec, PrincipalPart
from .error import FactorizationBreakdownError, NotCriticalError
from .spectrum import (
    DEFAULT_ZERO_TOL,
    EigenvalueCount,
    count_eigenvalues_below,
    inertia_of,
)


DEFAULT_CRITICAL_TOL: Final = 1e-8
DEFAULT_DEGENERATE_TOL: Final = 1e-8
NO_STATEMENT: Final = "no critical group statement applies"

Index = Union[int, float]


@unique
class Regime(Enum):
    KAPPA_POSITIVE = "kappaPositive"
    KAPPA_ZERO_SUBQUADRATIC = "kappaZeroSubquadratic"
    KAPPA_ZERO_SUPERQUADRATIC = "kappaZeroSuperquadratic"


def regime_of(pp: PrincipalPart) -> Regime:
    if pp.kappa > 0 or pp.p == 2:
        return Regime.KAPPA_POSITIVE
    if pp.p < 2:
        return Regime.KAPPA_ZERO_SUBQUADRATIC

    return Regime.KAPPA_ZERO_SUPERQUADRATIC


@dataclass(frozen=True)
class DegenerateSet:
    """
    Elements where the slope of the critical point vanishes within
    ``tol * (1 + max|slope|)``.
    """

    elements: tuple[int, ...]
    element_count: int
    tol: float

    @property
    def is_empty(self) -> bool:
        return len(self.elements) == 0

    @property
    def is_full(self) -> bool:
        return len(self.elements) == self.element_count


@dataclass(frozen=True)
class MorseData:
    """
    Morse index ``m`` and large Morse index ``m_star``.
    Infinite indices are ``math.inf``.
    """

    m: Index
    m_star: Index
    kernel_dim: Index
    regime: Regime

    def __post_init__(self) -> None:
        if self.m > self.m_star:
            raise ValueError(f"m must not exceed m_star: m={self.m}, m_star={self.m_star}")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.m_star)

    def contains(self, index: int) -> bool:
        """
        :return: |True| if ``m <= index <= m_star``.
        """

        return self.m <= index <= self.m_star

    def __str__(self) -> str:
        return f"({format_index(self.m)}, {format_index(self.m_star)})"


class QuadraticAtPoint(NamedTuple):
    quadratic: AssembledQuadratic
    degenerate_set: DegenerateSet
    regime: Regime
    u0: DiscreteField
    prolongation: Optional[FloatArray]


class CriticalGroupStatement(NamedTuple):
    degrees: str
    conclusion: str
    tag: str


@dataclass(frozen=True)
class CriticalGroupVerdict:
    statements: tuple[CriticalGroupStatement, ...]
    note: Optional[str] = None

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(statement.tag for statement in self.statements))

    @property
    def applies(self) -> bool:
        return len(self.statements) > 0


def find_degenerate_set(u0: DiscreteField, tol_z: float = DEFAULT_DEGENERATE_TOL) -> DegenerateSet:
    slopes = np.abs(u0.slopes())
    tol = tol_z * (1 + float(np.max(slopes)))

    return DegenerateSet(
        elements=tuple(int(e) for e in np.flatnonzero(slopes <= tol)),
        element_count=len(slopes),
        tol=tol,
    )


def constrained_prolongation(n: int, degenerate_set: DegenerateSet) -> FloatArray:
    """
    Basis of the nodal vectors whose slope vanishes on every degenerate element.
    Nodes joined by degenerate elements share one degree of freedom;
    groups touching the boundary are fixed to zero.

    :return: ``(n, k)`` matrix with 0/1 entries.
    """

    node_count = n + 2
    elements = np.array(degenerate_set.elements, dtype=int)
    graph = coo_matrix(
        (np.ones(len(elements)), (elements, elements + 1)), shape=(node_count, node_count)
    )
    _, labels = connected_components(graph, directed=False)

    fixed = {labels[0], labels[-1]}
    free_labels = sorted(set(labels[1:-1]) - fixed)
    column_of = {label: j for j, label in enumerate(free_labels)}

    prolongation = np.zeros((n, len(free_labels)))
    for i, label in enumerate(labels[1:-1]):
        if label in column_of:
            prolongation[i, column_of[label]] = 1.0

    return prolongation


def assemble_Q(
    spec: EnergySpec,
    u0: DiscreteField,
    critical_tol: float = DEFAULT_CRITICAL_TOL,
    tol_z: float = DEFAULT_DEGENERATE_TOL,
) -> QuadraticAtPoint:
    """
    Assemble the second variation of the energy at a critical point.

    :param EnergySpec spec: Energy.
    :param DiscreteField u0: Critical point.
    :param float critical_tol: Largest accepted sup norm of the gradient at ``u0``.
    :param float tol_z: Relative slope threshold of the degenerate set.
    :return:
        The form with its degenerate set and regime. With ``kappa=0, p<2`` the form is
        restricted to the nodal vectors with zero slope on the degenerate set and
        ``prolongation`` maps the restricted coordinates back to the nodes.
    :raises plaplab.NotCriticalError: If ``u0`` is not a critical point.
    """

    residual = float(np.max(np.abs(assemble_gradient(spec, u0))))
    if residual > critical_tol:
        raise NotCriticalError(f"gradient sup norm {residual:.3e} exceeds {critical_tol:.1e}")

    regime = regime_of(spec.principal)
    degenerate_set = find_degenerate_set(u0, tol_z)

    if regime == Regime.KAPPA_POSITIVE:
        quadratic = assemble_hessian(spec, u0)
        prolongation = None
    elif regime == Regime.KAPPA_ZERO_SUPERQUADRATIC:
        quadratic = assemble_hessian(spec, u0, masked_elements=degenerate_set.elements)
        prolongation = None
    else:
        full = assemble_hessian(spec, u0, masked_elements=degenerate_set.elements)
        prolongation = constrained_prolongation(u0.mesh.n, degenerate_set)
        quadratic = AssembledQuadratic(
            prolongation.T @ full.a @ prolongation, prolongation.T @ full.m @ prolongation
        )

    logger.debug(
        f"assemble_Q: regime={regime.value}, degenerate={len(degenerate_set.elements)}, "
        f"dim={quadratic.dim}"
    )

    return QuadraticAtPoint(
        quadratic=quadratic,
        degenerate_set=degenerate_set,
        regime=regime,
        u0=u0,
        prolongation=prolongation,
    )


def closed_form_count_at_zero(spec: EnergySpec) -> Optional[EigenvalueCount]:
    """
    :return:
        Eigenvalues of the form at ``u0=0`` below and at ``g'(0)`` from the closed-form
        spectrum. |None| if ``g'(0)`` is undefined.
    """

    slope = float(spec.nonlinearity.dg(0.0))
    if math.isnan(slope):
        return None
    if math.isclose(slope, 0.0, abs_tol=1e-14):
        slope = 0.0

    return count_eigenvalues_below(spec.p, spec.length, spec.kappa, slope)


def _closed_form_at_zero(spec: EnergySpec) -> MorseData:
    count = closed_form_count_at_zero(spec)
    if count is None:
        raise NotCriticalError("g'(0) is undefined")

    return MorseData(
        m=count.below,
        m_star=count.below + count.at,
        kernel_dim=count.at,
        regime=Regime.KAPPA_ZERO_SUPERQUADRATIC,
    )


def _cross_check_at_zero(md: MorseData, spec: EnergySpec, dim: int) -> None:
    count = closed_form_count_at_zero(spec)
    # modes beyond half the mesh are not resolved
    if count is None or count.below + count.at >= dim // 2:
        return

    if count.below != md.m:
        logger.warning(
            f"Morse index at zero from the inertia ({md.m}) differs from "
            f"the closed-form eigenvalue count ({count.below})"
        )


def morse_indices(
    q_at: QuadraticAtPoint, spec: EnergySpec, zero_tol: float = DEFAULT_ZERO_TOL
) -> MorseData:
    """
    Compute the Morse index and the large Morse index from the inertia of the form.
    With ``kappa=0, p>2`` at ``u0=0`` the indices follow from the sign of ``g'(0)``.

    :param QuadraticAtPoint q_at: Form returned by :py:func:`assemble_Q`.
    :param EnergySpec spec: Energy.
    :param float zero_tol: Relative zero pivot threshold.
    :return: Morse data.
    """

    if q_at.regime == Regime.KAPPA_ZERO_SUPERQUADRATIC and q_at.u0.sup_norm() == 0:
        return _closed_form_at_zero(spec)

    form = q_at.quadratic.form()
    try:
        inertia = inertia_of(form, zero_tol)
    except FactorizationBreakdownError as e:
        logger.warning(f"retrying inertia with a wider zero band: {e}")
        inertia = inertia_of(form, 4 * zero_tol)

    md = MorseData(
        m=inertia.negatives,
        m_star=inertia.negatives + inertia.zeros,
        kernel_dim=inertia.zeros,
        regime=q_at.regime,
    )
    if q_at.regime == Regime.KAPPA_POSITIVE and q_at.u0.sup_norm() == 0:
        _cross_check_at_zero(md, spec, len(form))

    return md


def is_isolated_at_zero(md: MorseData) -> bool:
    """
    :return:
        |True| if the Morse data of ``u0=0`` show that zero is an isolated critical point:
        the kernel is trivial and the index is finite or follows from the closed form
        of ``kappa=0, p>2``.
    """

    if md.kernel_dim != 0:
        return False

    return math.isfinite(md.m) or md.regime == Regime.KAPPA_ZERO_SUPERQUADRATIC


def compute_morse(spec: EnergySpec, u0: DiscreteField) -> MorseData:
    return morse_indices(assemble_Q(spec, u0), spec)


def _vanishing(condition: str, tag: str) -> CriticalGroupStatement:
    return CriticalGroupStatement(degrees=condition, conclusion="C_q = 0", tag=tag)


def _concentrated(index: Index, tag: str) -> list[CriticalGroupStatement]:
    degree = format_index(index)

    return [
        CriticalGroupStatement(degrees=f"q = {degree}", conclusion="C_q = G", tag=tag),
        _vanishing(f"q != {degree}", tag),
    ]


def _window(
    md: MorseData, tag: str, lower: bool = True, upper: bool = True
) -> list[CriticalGroupStatement]:
    statements = []
    if lower and md.m > 0:
        condition = f"q < {format_index(md.m)}" if math.isfinite(md.m) else "every q"
        statements.append(_vanishing(condition, tag))
    if upper and math.isfinite(md.m_star):
        statements.append(_vanishing(f"q > {format_index(md.m_star)}", tag))

    return statements


def classify_critical_groups(
    md: MorseData, isolated: bool, is_zero: bool, spec: EnergySpec
) -> CriticalGroupVerdict:
    """
    Restate the critical group information that the Morse data justifies.

    :param MorseData md: Morse data of the critical point.
    :param bool isolated: Whether the critical point is known to be isolated.
    :param bool is_zero: Whether the critical point is the zero field.
    :param EnergySpec spec: Energy.
    :return:
        Statements tagged by the argument that yields them. No statement is made
        where none is justified.
    """

    regime = md.regime
    if regime != regime_of(spec.principal):
        raise ValueError(f"Morse data regime {regime.value} does not match the energy")

    statements: list[CriticalGroupStatement] = []

    if regime == Regime.KAPPA_POSITIVE:
        if md.m == md.m_star:
            return CriticalGroupVerdict(
                statements=tuple(_concentrated(md.m, "nondegenerate")),
                note="isolated critical point",
            )

        statements.extend(_window(md, "index-window"))
        if isolated:
            tags = ("isolated-trichotomy-a", "isolated-trichotomy-b", "isolated-trichotomy-c")
            statements.extend(_concentrated(md.m, tags[0]))
            statements.extend(_concentrated(md.m_star, tags[1]))
            statements.append(
                _vanishing(f"q <= {format_index(md.m)} or q >= {format_index(md.m_star)}", tags[2])
            )
            return CriticalGroupVerdict(
                statements=tuple(statements), note="exactly one of the trichotomy cases holds"
            )

        return CriticalGroupVerdict(statements=tuple(statements))

    if regime == Regime.KAPPA_ZERO_SUBQUADRATIC:
        if is_zero:
            return CriticalGroupVerdict(
                statements=tuple(_concentrated(0, "strict-minimum-at-zero")),
                note="strict local minimum and isolated critical point",
            )

        return CriticalGroupVerdict(statements=tuple(_window(md, "above-large-index", lower=False)))

    if is_zero and isolated:
        statements.extend(_window(md, "autonomous-zero"))
        if statements:
            return CriticalGroupVerdict(statements=tuple(statements))

    logger.debug(f"no critical group statement: regime={regime.value}, zero={is_zero}")

    return CriticalGroupVerdict(statements=(), note=NO_STATEMENT)
