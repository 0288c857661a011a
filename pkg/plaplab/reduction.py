"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum, unique
from typing import Callable, Final, Optional, TypeVar, Union

import numpy as np
import scipy.linalg
from tabledata import TableData

from ._common import FloatArray, as_float_array
from ._logger import logger
from ._table import build_table
from .discretization import DiscreteField, assemble_energy, assemble_gradient, mass_matrix, norms
from .energy import EnergySpec
from .error import (
    DimTooHighError,
    InfiniteIndexError,
    MaxIterExceededError,
    RegimeExcludedError,
    SingularHessianError,
    SolverFailureError,
)
from .morse import MorseData, QuadraticAtPoint, Regime, assemble_Q
from .solver import SolverConfig, minimize_over_subspace
from .spectrum import generalized_eigh


DEFAULT_RADIUS_FACTOR: Final = 0.1
KERNEL_TOL: Final = 1e-10
MAX_HALVINGS: Final = 4
MIN_DIRECTIONS: Final = 16
MIN_RADII: Final = 8
GRADIENT_FD_STEP: Final = 1e-4
HESSIAN_FD_STEP: Final = 1e-3
SAMPLE_HEADERS: Final = ("v1", "v2", "phi", "|gradPhi|")

T = TypeVar("T")


@unique
class OriginClass(Enum):
    LOCAL_MIN = "localMin"
    LOCAL_MAX = "localMax"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True, eq=False)
class Decomposition:
    """
    Splitting of the nodal space into ``V``, spanned by the nonpositive eigendirections
    of the second variation, and its L2 orthogonal complement ``W``.

    :param v_basis: ``(n, dim V)`` B-orthonormal columns.
    :param w_basis: ``(n, n - dim V)`` columns spanning ``W``.
    :param b: L2 Gram matrix.
    :param eigenvalues: Eigenvalues of the ``V`` directions.
    :param float rho: Radius of the ball in ``V``.
    :param float r: Radius of the ball in ``W``.
    """

    v_basis: FloatArray
    w_basis: FloatArray
    b: FloatArray
    eigenvalues: FloatArray
    rho: float
    r: float
    regime: Regime

    @property
    def dim_v(self) -> int:
        return int(self.v_basis.shape[1])

    def project_w(self, x: FloatArray) -> FloatArray:
        """
        Remove the L2 components along ``V``.
        """

        return x - self.v_basis @ (self.v_basis.T @ (self.b @ x))

    def halved(self) -> "Decomposition":
        return dataclasses.replace(self, rho=self.rho / 2, r=self.r / 2)


@dataclass(frozen=True)
class ReducedSample:
    coords: FloatArray
    psi_field: DiscreteField
    phi: float
    grad_phi: FloatArray

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad_phi))


@dataclass(frozen=True)
class PolarGrid:
    dim_v: int
    phi0: float
    samples: tuple[ReducedSample, ...]
    rho: float

    def as_tabledata(self) -> TableData:
        rows = []
        for sample in self.samples:
            padded = list(sample.coords) + [0.0] * (2 - len(sample.coords))
            rows.append([float(padded[0]), float(padded[1]), sample.phi, sample.grad_norm])

        return build_table("reduced", SAMPLE_HEADERS, rows)


def default_radius(spec: EnergySpec, u0: DiscreteField) -> float:
    return DEFAULT_RADIUS_FACTOR * (1 + norms(u0, spec.p).seminorm)


def build_decomposition(
    spec: EnergySpec,
    u0: DiscreteField,
    md: MorseData,
    rho: Optional[float] = None,
    r: Optional[float] = None,
    q_at: Optional[QuadraticAtPoint] = None,
) -> Decomposition:
    """
    Build the splitting ``V + W`` at a critical point.

    :param EnergySpec spec: Energy.
    :param DiscreteField u0: Critical point.
    :param MorseData md: Morse data of ``u0``.
    :param float rho: Radius of the ball in ``V``. Defaults to ``0.1 (1 + |u0|_{W^{1,p}})``.
    :param float r: Radius of the ball in ``W``. Defaults to the same value.
    :param QuadraticAtPoint q_at: Second variation, assembled when omitted.
    :raises plaplab.InfiniteIndexError: If the large Morse index is infinite.
    """

    if not md.is_finite:
        raise InfiniteIndexError(f"large Morse index is infinite: {md}")

    if q_at is None:
        q_at = assemble_Q(spec, u0)

    n = u0.mesh.n
    b = mass_matrix(u0.mesh)
    radius = default_radius(spec, u0)
    rho = radius if rho is None else float(rho)
    r = radius if r is None else float(r)

    v_basis = np.zeros((n, 0))
    eigenvalues = np.zeros(0)

    if md.m_star > 0 and q_at.quadratic.dim > 0:
        prolongation = q_at.prolongation
        form = q_at.quadratic.form()
        b_local = b if prolongation is None else prolongation.T @ b @ prolongation

        k = min(int(md.m_star) + 2, form.shape[0])
        values, vectors = generalized_eigh(form, b_local, k)
        scale = float(np.max(np.abs(form))) / float(np.max(np.abs(b_local)))
        selected = values <= KERNEL_TOL * scale

        eigenvalues = values[selected]
        v_basis = vectors[:, selected]
        if prolongation is not None:
            v_basis = prolongation @ v_basis

    if v_basis.shape[1] != md.m_star:
        logger.warning(f"dim V={v_basis.shape[1]} differs from the large Morse index {md.m_star}")

    if v_basis.shape[1] == 0:
        w_basis = np.eye(n)
    else:
        w_basis = scipy.linalg.null_space(v_basis.T @ b)

    logger.debug(f"build_decomposition: dim V={v_basis.shape[1]}, rho={rho:.6g}, r={r:.6g}")

    return Decomposition(
        v_basis=v_basis,
        w_basis=w_basis,
        b=b,
        eigenvalues=eigenvalues,
        rho=rho,
        r=r,
        regime=md.regime,
    )


def _w_fields(u0: DiscreteField, dec: Decomposition) -> list[DiscreteField]:
    return [DiscreteField(u0.mesh, column) for column in dec.w_basis.T]


def psi_map(
    spec: EnergySpec,
    u0: DiscreteField,
    dec: Decomposition,
    coords: Union[Sequence[float], FloatArray],
    cfg: Optional[SolverConfig] = None,
    start: Optional[DiscreteField] = None,
) -> ReducedSample:
    """
    Minimize ``w -> f(u0 + v + w)`` over ``W`` for ``v = sum coords_i V_i``.

    :return: The minimizer ``psi(v)`` with ``phi(v) = f(u0 + v + psi(v))`` and its gradient.
    :raises plaplab.SolverFailureError:
        If the minimization fails or leaves the ball of radius ``r`` in ``W``.
    """

    c = as_float_array(coords).reshape(-1)
    if len(c) != dec.dim_v:
        raise ValueError(f"expected {dec.dim_v} coordinates: actual={len(c)}")
    if float(np.linalg.norm(c)) > dec.rho * (1 + 1e-12):
        raise ValueError(f"|v|={np.linalg.norm(c):.6g} exceeds rho={dec.rho:.6g}")

    base = u0.with_values(u0.values + dec.v_basis @ c)

    try:
        w = minimize_over_subspace(spec, base, _w_fields(u0, dec), start=start, cfg=cfg)
    except (MaxIterExceededError, SingularHessianError) as e:
        raise SolverFailureError(f"minimization over W failed: {e}") from e

    w_norm = norms(w, spec.p).seminorm
    if w_norm > dec.r:
        raise SolverFailureError(f"minimizer left the W ball: |w|={w_norm:.6g} > r={dec.r:.6g}")

    u = base + w

    return ReducedSample(
        coords=c,
        psi_field=w,
        phi=assemble_energy(spec, u),
        grad_phi=dec.v_basis.T @ assemble_gradient(spec, u),
    )


def with_halving(
    dec: Decomposition, action: Callable[[Decomposition], T]
) -> tuple[T, Decomposition]:
    """
    Run ``action`` and halve ``rho`` and ``r`` on solver failures, up to four times.
    """

    for attempt in range(MAX_HALVINGS + 1):
        try:
            return (action(dec), dec)
        except SolverFailureError as e:
            if attempt == MAX_HALVINGS:
                raise
            dec = dec.halved()
            logger.warning(f"{e}: retrying with rho={dec.rho:.6g}, r={dec.r:.6g}")

    raise AssertionError("unreachable")


def reduced_gradient_check(
    spec: EnergySpec,
    u0: DiscreteField,
    dec: Decomposition,
    samples: int = 20,
    seed: int = 1,
    cfg: Optional[SolverConfig] = None,
) -> float:
    """
    Compare the gradient of the reduced functional with centered differences of its
    values at random points of the ball in ``V``.

    :return: Largest absolute discrepancy. ``0`` when ``V`` is trivial.
    """

    if dec.dim_v == 0:
        return 0.0

    rng = np.random.default_rng(seed)
    step = GRADIENT_FD_STEP * dec.rho
    worst = 0.0

    for _ in range(samples):
        direction = rng.standard_normal(dec.dim_v)
        direction /= np.linalg.norm(direction)
        z = direction * rng.uniform(0, 0.5) * dec.rho

        center = psi_map(spec, u0, dec, z, cfg)
        differences = np.empty(dec.dim_v)
        for i in range(dec.dim_v):
            e = np.zeros(dec.dim_v)
            e[i] = step
            plus = psi_map(spec, u0, dec, z + e, cfg, start=center.psi_field)
            minus = psi_map(spec, u0, dec, z - e, cfg, start=center.psi_field)
            differences[i] = (plus.phi - minus.phi) / (2 * step)

        worst = max(worst, float(np.max(np.abs(differences - center.grad_phi))))

    logger.debug(f"reduced_gradient_check: samples={samples}, discrepancy={worst:.3e}")

    return worst


def reduced_hessian_at_zero(
    spec: EnergySpec,
    u0: DiscreteField,
    dec: Decomposition,
    cfg: Optional[SolverConfig] = None,
) -> FloatArray:
    """
    Second derivative of the reduced functional at the origin by centered differences
    of its gradient.

    :return: Symmetric ``dim V x dim V`` matrix.
    :raises plaplab.RegimeExcludedError: Unless ``kappa > 0`` or ``p = 2``.
    """

    if dec.regime != Regime.KAPPA_POSITIVE:
        raise RegimeExcludedError(
            f"reduced Hessian requires kappa > 0 or p = 2: regime={dec.regime.value}"
        )

    dim = dec.dim_v
    step = HESSIAN_FD_STEP * dec.rho
    hessian = np.zeros((dim, dim))

    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        plus = psi_map(spec, u0, dec, e, cfg)
        minus = psi_map(spec, u0, dec, -e, cfg)
        hessian[:, i] = (plus.grad_phi - minus.grad_phi) / (2 * step)

    return (hessian + hessian.T) / 2


def _directions(dim: int, count: int) -> FloatArray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])

    angles = 2 * math.pi * np.arange(count) / count

    return np.column_stack((np.cos(angles), np.sin(angles)))


def sample_polar_grid(
    spec: EnergySpec,
    u0: DiscreteField,
    dec: Decomposition,
    directions: int = MIN_DIRECTIONS,
    radii: int = MIN_RADII,
    cfg: Optional[SolverConfig] = None,
) -> PolarGrid:
    """
    Sample the reduced functional on rays of the ball in ``V``.

    :param int directions: Number of rays when ``dim V = 2``. At least 16.
    :param int radii: Number of radii per ray. At least 8.
    :raises plaplab.DimTooHighError: If ``dim V > 2``.
    """

    if dec.dim_v > 2:
        raise DimTooHighError(f"polar sampling supports dim V <= 2: actual={dec.dim_v}")
    if directions < MIN_DIRECTIONS or radii < MIN_RADII:
        raise ValueError(
            f"grid requires >= {MIN_DIRECTIONS} directions and >= {MIN_RADII} radii"
        )

    origin = psi_map(spec, u0, dec, np.zeros(dec.dim_v), cfg)
    if dec.dim_v == 0:
        return PolarGrid(dim_v=0, phi0=origin.phi, samples=(origin,), rho=dec.rho)

    samples = []
    for direction in _directions(dec.dim_v, directions):
        previous = origin.psi_field
        for k in range(1, radii + 1):
            sample = psi_map(spec, u0, dec, direction * dec.rho * k / radii, cfg, start=previous)
            samples.append(sample)
            previous = sample.psi_field

    return PolarGrid(dim_v=dec.dim_v, phi0=origin.phi, samples=tuple(samples), rho=dec.rho)


def classify_origin(grid: PolarGrid) -> OriginClass:
    """
    Classify the origin of the reduced functional from the sign of ``phi(v) - phi(0)``.

    :raises plaplab.DimTooHighError: If ``dim V > 2``.
    """

    if grid.dim_v > 2:
        raise DimTooHighError(f"classification supports dim V <= 2: actual={grid.dim_v}")
    if grid.dim_v == 0:
        return OriginClass.LOCAL_MIN

    gaps = np.array([sample.phi - grid.phi0 for sample in grid.samples])
    threshold = 1e-12 * (1 + abs(grid.phi0))

    if np.any(np.abs(gaps) <= threshold):
        return OriginClass.DEGENERATE
    if np.all(gaps > 0):
        return OriginClass.LOCAL_MIN
    if np.all(gaps < 0):
        return OriginClass.LOCAL_MAX

    return OriginClass.SADDLE
