"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math
from dataclasses import dataclass
from enum import Enum, unique
from typing import Final, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg
from tabledata import TableData

from ._common import FloatArray
from ._logger import logger
from ._table import build_table
from .discretization import AssembledQuadratic, DiscreteField, mass_matrix
from .error import (
    BadConfigError,
    ConvergenceFailureError,
    FactorizationBreakdownError,
    ResonantError,
    TableTooShortError,
)


DEFAULT_RESONANCE_TOL: Final = 1e-8
DEFAULT_ZERO_TOL: Final = 1e-10
SPECTRUM_HEADERS: Final = ("m", "lambda_m")

# the closed form sequence stands in for the variational eigenvalues
MODELING_NOTE: Final = (
    "one-dimensional spectrum: the variational eigenvalues are identified with "
    "the closed form sequence (p-1)(m pi_p / L)^p"
)


@unique
class Side(Enum):
    STRICT = "strict"
    LEFT_CLOSED = "leftClosed"
    RIGHT_CLOSED = "rightClosed"


class InertiaResult(NamedTuple):
    negatives: int
    zeros: int
    positives: int


class EigenvalueCount(NamedTuple):
    below: Union[int, float]
    at: Union[int, float]


class Eigenpair(NamedTuple):
    value: float
    field: DiscreteField


def _validate_p(p: float) -> None:
    if not math.isfinite(p) or p <= 1:
        raise BadConfigError(f"p must be greater than 1: actual={p}", key="problem.p")


def pi_p(p: float) -> float:
    """
    :return: Half period ``2 pi / (p sin(pi / p))`` of the one-dimensional p-sine.
    """

    _validate_p(p)

    return 2 * math.pi / (p * math.sin(math.pi / p))


def eigenvalue_1d(p: float, L: float, m: int) -> float:
    """
    :return: ``(p-1) (m pi_p / L)^p``, the ``m``-th Dirichlet eigenvalue on ``(0, L)``.
    """

    _validate_p(p)
    if L <= 0:
        raise BadConfigError(f"length must be positive: actual={L}", key="domain.length")
    if m < 1:
        raise BadConfigError(f"eigenvalue index must be >= 1: actual={m}")

    return (p - 1) * (m * pi_p(p) / L) ** p


@dataclass(frozen=True)
class SpectrumTable:
    """
    Eigenvalues ``lambda_1 < ... < lambda_M`` with the sentinel ``lambda_0 = -inf``.
    """

    p: float
    length: float
    values: tuple[float, ...]

    @property
    def lambda0(self) -> float:
        return -math.inf

    @property
    def count(self) -> int:
        return len(self.values)

    def value(self, m: int) -> float:
        if m == 0:
            return self.lambda0
        if m < 0 or m > self.count:
            raise TableTooShortError(f"index {m} is out of the table: count={self.count}")

        return self.values[m - 1]

    def extend(self, count: int) -> "SpectrumTable":
        if count <= self.count:
            return self

        return build_spectrum_table(self.p, self.length, count)

    def as_tabledata(self) -> TableData:
        return build_table(
            "spectrum", SPECTRUM_HEADERS, [[m, value] for m, value in enumerate(self.values, 1)]
        )


def build_spectrum_table(p: float, L: float, count: int) -> SpectrumTable:
    if count < 1:
        raise BadConfigError(f"spectrum count must be >= 1: actual={count}", key="spectrum.count")

    return SpectrumTable(
        p=p, length=L, values=tuple(eigenvalue_1d(p, L, m) for m in range(1, count + 1))
    )


def _on_spectrum_index(table: SpectrumTable, lambda_: float, rel_tol: float) -> Optional[int]:
    for m, value in enumerate(table.values, 1):
        if abs(lambda_ - value) <= rel_tol * abs(value):
            return m

    return None


def _check_bracketed(table: SpectrumTable, lambda_: float, rel_tol: float) -> None:
    last = table.values[-1]
    if lambda_ >= last * (1 - rel_tol):
        raise TableTooShortError(
            f"spectrum table does not bracket lambda={lambda_}: lambda_{table.count}={last}"
        )


def locate_m_infinity(
    table: SpectrumTable,
    lambda_: float,
    side: Union[Side, str] = Side.STRICT,
    rel_tol: float = DEFAULT_RESONANCE_TOL,
) -> int:
    """
    Locate ``lambda`` in the eigenvalue sequence.

    :param SpectrumTable table: Eigenvalue table.
    :param float lambda_: Asymptotic slope.
    :param side:
        ``strict``: ``lambda_m < lambda < lambda_{m+1}``,
        ``leftClosed``: ``lambda_m <= lambda < lambda_{m+1}``,
        ``rightClosed``: ``lambda_m < lambda <= lambda_{m+1}``.
    :return: ``m``
    :raises plaplab.ResonantError: If ``side`` is strict and ``lambda`` is an eigenvalue.
    :raises plaplab.TableTooShortError: If the table does not bracket ``lambda``.
    """

    side = Side(side)
    _check_bracketed(table, lambda_, rel_tol)

    hit = _on_spectrum_index(table, lambda_, rel_tol)
    if hit is not None:
        if side == Side.STRICT:
            raise ResonantError(f"lambda={lambda_} equals lambda_{hit}={table.value(hit)}")
        if side == Side.LEFT_CLOSED:
            return hit

        return hit - 1

    return sum(1 for value in table.values if value < lambda_)


def check_nonresonance(
    table: SpectrumTable, lambda_: float, tol: float = DEFAULT_RESONANCE_TOL
) -> bool:
    """
    :return: |True| if ``|lambda - lambda_m| / lambda_m > tol`` for every ``m``.
    :raises plaplab.TableTooShortError: If the table does not bracket ``lambda``.
    """

    _check_bracketed(table, lambda_, tol)

    return _on_spectrum_index(table, lambda_, tol) is None


def eigenvalue_between(table: SpectrumTable, a: float, b: float) -> bool:
    """
    :return: |True| if some eigenvalue lies in the closed interval spanned by ``a`` and ``b``.
    """

    lo, hi = min(a, b), max(a, b)

    if any(lo <= value <= hi for value in table.values):
        return True
    if hi >= table.values[-1]:
        raise TableTooShortError(f"spectrum table does not reach {hi}")

    return False


def count_eigenvalues_below(
    p: float, L: float, kappa: float, level: float, rel_tol: float = DEFAULT_RESONANCE_TOL
) -> EigenvalueCount:
    """
    Count the eigenvalues ``kappa^(p-2) (m pi / L)^2`` of the weighted Laplacian
    below and at ``level``. ``kappa`` is irrelevant when ``p=2``.
    With ``kappa=0`` every eigenvalue is ``0`` for ``p>2`` and ``inf`` for ``p<2``,
    so the counts are ``0`` or ``math.inf``.
    """

    if p != 2 and kappa == 0:
        if p < 2 or level < 0:
            return EigenvalueCount(below=0, at=0)
        if level == 0:
            return EigenvalueCount(below=0, at=math.inf)
        return EigenvalueCount(below=math.inf, at=0)
    if level == math.inf:
        return EigenvalueCount(below=math.inf, at=0)

    scale = 1.0 if p == 2 else kappa ** (p - 2)
    if scale <= 0 or level <= 0:
        return EigenvalueCount(below=0, at=0)

    x = L / math.pi * math.sqrt(level / scale)
    m = math.floor(x)
    if m >= 1 and math.isclose(m, x, rel_tol=rel_tol):
        return EigenvalueCount(below=m - 1, at=1)
    if math.isclose(m + 1, x, rel_tol=rel_tol):
        return EigenvalueCount(below=m, at=1)

    return EigenvalueCount(below=m, at=0)


def generalized_inertia(
    q: AssembledQuadratic, zero_tol: float = DEFAULT_ZERO_TOL
) -> InertiaResult:
    """
    Inertia of ``A - M`` from a symmetric indefinite factorization.

    :param AssembledQuadratic q: Quadratic form.
    :param float zero_tol: Pivots up to ``zero_tol * max|A - M|`` are counted as zero.
    :raises plaplab.FactorizationBreakdownError:
        If a pivot falls in the ambiguous band ``(tol/2, 2 tol]``.
    """

    return inertia_of(q.form(), zero_tol)


def inertia_of(form: FloatArray, zero_tol: float = DEFAULT_ZERO_TOL) -> InertiaResult:
    dim = form.shape[0]
    if dim == 0:
        return InertiaResult(0, 0, 0)

    tol = zero_tol * float(np.max(np.abs(form)))

    try:
        _, d, _ = scipy.linalg.ldl(form, lower=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise FactorizationBreakdownError(f"factorization failed: {e}") from e

    pivots = np.linalg.eigvalsh(d)
    magnitudes = np.abs(pivots)

    if tol > 0 and np.any((magnitudes > tol / 2) & (magnitudes <= 2 * tol)):
        raise FactorizationBreakdownError(f"pivot inside the ambiguous band around {tol:.3e}")

    zeros = int(np.sum(magnitudes <= tol))
    negatives = int(np.sum(pivots < -tol))
    positives = dim - zeros - negatives

    logger.debug(f"inertia: dim={dim}, neg={negatives}, zero={zeros}, pos={positives}")

    return InertiaResult(negatives=negatives, zeros=zeros, positives=positives)


def _fix_sign(vectors: FloatArray) -> FloatArray:
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        threshold = 1e-12 * float(np.max(np.abs(column)))
        nonzero = np.flatnonzero(np.abs(column) > threshold)
        if len(nonzero) > 0 and column[nonzero[0]] < 0:
            vectors[:, j] = -column

    return vectors


def generalized_eigh(
    form: FloatArray, b: FloatArray, k: int
) -> tuple[FloatArray, FloatArray]:
    """
    :return: The ``k`` smallest eigenvalues of ``form v = theta b v`` and
        the b-orthonormal eigenvectors as columns.
    """

    dim = form.shape[0]
    if k < 0 or k > dim:
        raise ValueError(f"k must be in [0, {dim}]: actual={k}")
    if k == 0:
        return (np.zeros(0), np.zeros((dim, 0)))

    try:
        values, vectors = scipy.linalg.eigh(form, b, subset_by_index=[0, k - 1])
    except (ValueError, np.linalg.LinAlgError) as e:
        raise ConvergenceFailureError(f"generalized eigensolver failed: {e}") from e

    return (values, _fix_sign(vectors))


def lowest_eigenpairs(
    q: AssembledQuadratic, k: int, b: Optional[FloatArray] = None
) -> list[Eigenpair]:
    """
    Smallest eigenpairs of ``(A - M) v = theta B v``.

    :param AssembledQuadratic q: Quadratic form. Must carry its mesh.
    :param int k: Number of eigenpairs.
    :param b: Gram matrix. Defaults to :py:func:`~plaplab.discretization.mass_matrix`.
    :return: Eigenpairs in ascending order, B-orthonormal,
        with the first nonzero component of each eigenfield positive.
    :raises plaplab.ConvergenceFailureError: If the eigensolver fails.
    """

    if q.mesh is None:
        raise ValueError("quadratic form without a mesh")

    if b is None:
        b = mass_matrix(q.mesh)

    values, vectors = generalized_eigh(q.form(), b, k)

    return [
        Eigenpair(value=float(value), field=DiscreteField(q.mesh, vectors[:, j]))
        for j, value in enumerate(values)
    ]
