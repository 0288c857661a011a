"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum, unique
from typing import TYPE_CHECKING, Final, Optional

import numpy as np
import scipy.linalg
from scipy.linalg import solve_banded

from ._common import FloatArray
from ._logger import logger
from .discretization import (
    DiscreteField,
    Mesh1D,
    assemble_energy,
    assemble_gradient,
    assemble_hessian,
    norms,
    seminorm_distance,
    seminorm_gradient,
    stiffness_matrix,
    to_banded,
)
from .energy import EnergySpec
from .error import (
    BadConfigError,
    MaxIterExceededError,
    PathCollapseError,
    SingularHessianError,
)
from .spectrum import SpectrumTable


if TYPE_CHECKING:
    from .morse import MorseData  # noqa


DIVERGENCE_LIMIT: Final = 1e8

_AMPLITUDES: Final = (0.5, 1.0, 2.0, 4.0, 8.0)
_STRUCTURED_MODES: Final = 4
_RANDOM_MODES: Final = 6
_POLISH_THRESHOLD: Final = 1e-2
_SWEEPS_PER_ITER: Final = 25
_FORCE_GROWTH: Final = 1.5
_DT_INIT: Final = 0.1
_DT_MAX: Final = 0.5
_DT_MIN: Final = 1e-8
_PROGRESS_RATIO: Final = 0.999
_MAX_STALLED: Final = 20


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of the critical point solvers.

    :param float tol_residual: Sup norm of the gradient accepted as critical.
    :param int max_iter: Iteration limit of a single solve.
    :param float armijo_c: Sufficient decrease parameter of the line searches.
    :param float backtrack: Step reduction factor of the line searches.
    :param float deflation_power: Exponent of the deflation operator.
    :param float deflation_shift: Shift of the deflation operator.
    :param int seed: Seed of the random starts.
    :param float distinct_tol: W^{1,p} distance below which two solutions are the same.
    :param float regularization: Slope floor of the Hessian when ``kappa=0, p<2``.
    :param int segments: Number of segments of a mountain pass path.
    :param int starts: Number of starts of the deflated multistart.
    """

    tol_residual: float = 1e-10
    max_iter: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    seed: int = 1
    distinct_tol: float = 1e-6
    regularization: float = 1e-8
    segments: int = 21
    starts: int = 64

    def __post_init__(self) -> None:
        if not self.tol_residual > 0:
            raise BadConfigError(
                f"tolResidual must be positive: actual={self.tol_residual}",
                key="solver.tolResidual",
            )
        if self.max_iter < 1:
            raise BadConfigError(
                f"maxIter must be >= 1: actual={self.max_iter}", key="solver.maxIter"
            )
        if not 0 < self.backtrack < 1:
            raise BadConfigError(f"backtrack must be in (0, 1): actual={self.backtrack}")
        if self.segments < 2:
            raise BadConfigError(f"segments must be >= 2: actual={self.segments}")
        if self.starts < 1:
            raise BadConfigError(f"starts must be >= 1: actual={self.starts}", key="solver.starts")

    def with_seed(self, seed: int) -> "SolverConfig":
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True)
class CriticalPointRecord:
    field: DiscreteField
    energy: float
    residual: float
    iterations: int
    method: str
    morse: Optional["MorseData"] = None
    shooting_distance: Optional[float] = None
    descent_energies: tuple[float, ...] = ()

    @property
    def sup_norm(self) -> float:
        return self.field.sup_norm()


@unique
class ConeMembership(Enum):
    IN_X_MINUS = "inXminus"
    IN_X_PLUS = "inXplus"
    NEITHER = "neither"
    BOTH = "both"


@dataclass(frozen=True)
class ConeGeometry:
    """
    Cones ``X_- = {int |u'|^p <= lambda_m int |u|^p}`` and
    ``X_+ = {int |u'|^p >= lambda_{m+1} int |u|^p}``.
    With ``m=0``, ``X_-`` is ``{0}`` and ``X_+`` is the whole space.
    """

    m_index: int
    lambda_m: float
    lambda_next: float
    p: float
    radius: float = 1.0
    rel_tol: float = 1e-3


def cone_geometry(
    table: SpectrumTable, m: int, radius: float = 1.0, rel_tol: float = 1e-3
) -> ConeGeometry:
    return ConeGeometry(
        m_index=m,
        lambda_m=table.value(m),
        lambda_next=table.value(m + 1),
        p=table.p,
        radius=radius,
        rel_tol=rel_tol,
    )


def verify_residual(spec: EnergySpec, u: DiscreteField) -> float:
    return float(np.max(np.abs(assemble_gradient(spec, u))))


class _Deflation:
    def __init__(self, roots: Sequence[DiscreteField], p: float, cfg: SolverConfig) -> None:
        self.__roots = list(roots)
        self.__p = p
        self.__power = cfg.deflation_power
        self.__shift = cfg.deflation_shift

    def __bool__(self) -> bool:
        return len(self.__roots) > 0

    def factor(self, u: DiscreteField) -> float:
        value = 1.0
        for root in self.__roots:
            d = norms(u - root, self.__p).seminorm
            if d == 0:
                return math.inf
            value *= d ** (-self.__power) + self.__shift

        return value

    def log_gradient(self, u: DiscreteField) -> FloatArray:
        eta = np.zeros(u.mesh.n)
        q = self.__power

        for root in self.__roots:
            diff = u - root
            d = norms(diff, self.__p).seminorm
            if d == 0:
                continue
            eta += -q * d ** (-q - 1) / (d ** (-q) + self.__shift) * seminorm_gradient(
                diff, self.__p
            )

        return eta

    def scale_step(self, u: DiscreteField, delta: FloatArray) -> FloatArray:
        # Sherman-Morrison form of the Newton step of the deflated residual
        denominator = 1 - float(self.log_gradient(u) @ delta)
        if abs(denominator) < 1e-12:
            return delta

        return delta / denominator


class _Sobolev:
    def __init__(self, mesh: Mesh1D) -> None:
        self.__k = stiffness_matrix(mesh)
        self.__banded = to_banded(self.__k)

    def gradient(self, residual: FloatArray) -> FloatArray:
        return solve_banded((1, 1), self.__banded, residual)

    def inner(self, a: FloatArray, b: FloatArray) -> float:
        return float(a @ (self.__k @ b))

    def norm(self, a: FloatArray) -> float:
        return math.sqrt(max(self.inner(a, a), 0.0))


def _newton_direction(
    spec: EnergySpec, u: DiscreteField, residual: FloatArray, cfg: SolverConfig
) -> Optional[FloatArray]:
    hessian = assemble_hessian(spec, u, regularization=cfg.regularization)
    form = hessian.form()

    for shift in (0.0, 1e-8):
        matrix = form
        if shift > 0:
            matrix = form + shift * float(np.max(np.abs(form))) * np.eye(len(form))
        try:
            delta = solve_banded((1, 1), to_banded(matrix), -residual)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if np.all(np.isfinite(delta)):
            return delta

    return None


def _descent_step(
    spec: EnergySpec,
    u: DiscreteField,
    residual: FloatArray,
    energy: float,
    sobolev: _Sobolev,
    cfg: SolverConfig,
) -> Optional[DiscreteField]:
    direction = -sobolev.gradient(residual)
    slope = float(residual @ direction)
    if slope >= 0:
        return None

    t = 1.0
    for _ in range(cfg.max_backtracks):
        trial = u.with_values(u.values + t * direction)
        if assemble_energy(spec, trial) <= energy + cfg.armijo_c * t * slope:
            return trial
        t *= cfg.backtrack

    return None


def newton_solve(
    spec: EnergySpec,
    u0: DiscreteField,
    cfg: Optional[SolverConfig] = None,
    roots: Sequence[DiscreteField] = (),
) -> CriticalPointRecord:
    """
    Damped Newton iteration on the gradient of the energy.

    :param EnergySpec spec: Energy.
    :param DiscreteField u0: Initial guess.
    :param SolverConfig cfg: Solver parameters.
    :param roots: Known critical points to deflate.
    :return: Critical point with ``|gradient|_inf <= tol_residual``.
    :raises plaplab.MaxIterExceededError: If the iteration does not converge.
    :raises plaplab.SingularHessianError:
        If neither the Newton system nor the descent fallback makes progress.
    """

    if cfg is None:
        cfg = SolverConfig()

    deflation = _Deflation(roots, spec.p, cfg)
    sobolev = _Sobolev(u0.mesh)
    u = u0
    residual = assemble_gradient(spec, u)
    descent_energies: list[float] = []

    def merit(field: DiscreteField, grad: FloatArray) -> float:
        scale = deflation.factor(field) if deflation else 1.0
        return 0.5 * scale**2 * float(grad @ grad)

    for iteration in range(cfg.max_iter + 1):
        sup = float(np.max(np.abs(residual)))
        if sup <= cfg.tol_residual:
            energy = assemble_energy(spec, u)
            logger.debug(
                f"newton_solve: converged in {iteration} iterations, "
                f"energy={energy:.12g}, residual={sup:.3e}"
            )
            return CriticalPointRecord(
                field=u,
                energy=energy,
                residual=sup,
                iterations=iteration,
                method="newton",
                descent_energies=tuple(descent_energies),
            )

        if iteration == cfg.max_iter:
            break
        if u.sup_norm() > DIVERGENCE_LIMIT:
            raise MaxIterExceededError(
                f"iterate diverged: sup={u.sup_norm():.3e}", iterations=iteration
            )

        accepted = None
        delta = _newton_direction(spec, u, residual, cfg)

        if delta is not None:
            if deflation:
                delta = deflation.scale_step(u, delta)

            current = merit(u, residual)
            t = 1.0
            for _ in range(cfg.max_backtracks):
                trial = u.with_values(u.values + t * delta)
                trial_residual = assemble_gradient(spec, trial)
                if merit(trial, trial_residual) <= (1 - 2 * cfg.armijo_c * t) * current:
                    accepted = (trial, trial_residual)
                    break
                t *= cfg.backtrack

        if accepted is None:
            if deflation:
                raise MaxIterExceededError(
                    "deflated line search failed", iterations=iteration
                )

            energy = assemble_energy(spec, u)
            trial = _descent_step(spec, u, residual, energy, sobolev, cfg)
            if trial is None:
                if delta is None:
                    raise SingularHessianError(
                        "Newton system is singular and descent stalls", iterations=iteration
                    )
                raise MaxIterExceededError("line search stalled", iterations=iteration)

            if not descent_energies:
                descent_energies.append(energy)
            descent_energies.append(assemble_energy(spec, trial))
            accepted = (trial, assemble_gradient(spec, trial))

        u, residual = accepted

    raise MaxIterExceededError(
        f"Newton iteration did not converge in {cfg.max_iter} iterations",
        iterations=cfg.max_iter,
    )


def _sine(mesh: Mesh1D, k: int) -> FloatArray:
    return np.sin(k * math.pi * mesh.interior / mesh.length)


def build_starts(mesh: Mesh1D, count: int, seed: int) -> list[DiscreteField]:
    """
    Deterministic initial guesses: the zero field, sine modes on an amplitude ladder
    with alternating signs, then random sine combinations.
    """

    starts = [DiscreteField.zeros(mesh)]

    for amplitude in _AMPLITUDES:
        for k in range(1, _STRUCTURED_MODES + 1):
            sign = 1 if k % 2 else -1
            starts.append(DiscreteField(mesh, sign * amplitude * _sine(mesh, k)))

    rng = np.random.default_rng(seed)
    modes = np.array([_sine(mesh, k) for k in range(1, _RANDOM_MODES + 1)])
    while len(starts) < count:
        coefficients = rng.standard_normal(_RANDOM_MODES)
        amplitude = 10.0 ** rng.uniform(-1, 1)
        values = coefficients @ modes
        peak = float(np.max(np.abs(values)))
        if peak > 0:
            starts.append(DiscreteField(mesh, amplitude * values / peak))

    return starts[:count]


def _is_distinct(
    u: DiscreteField, found: Sequence[CriticalPointRecord], p: float, tol: float
) -> bool:
    return all(seminorm_distance(u, record.field, p) > tol for record in found)


def multistart_deflated(
    spec: EnergySpec, mesh: Mesh1D, cfg: Optional[SolverConfig] = None, starts: Optional[int] = None
) -> list[CriticalPointRecord]:
    """
    Run deflated Newton iterations from deterministic starts.

    :param EnergySpec spec: Energy.
    :param Mesh1D mesh: Mesh of the solutions.
    :param SolverConfig cfg: Solver parameters.
    :param int starts: Number of starts. Defaults to ``cfg.starts``.
    :return: Distinct critical points in the order of discovery.
    """

    if cfg is None:
        cfg = SolverConfig()
    if starts is None:
        starts = cfg.starts
    if starts < 1:
        raise BadConfigError(f"starts must be >= 1: actual={starts}", key="solver.starts")

    is_odd = spec.nonlinearity.is_odd()
    found: list[CriticalPointRecord] = []

    for index, start in enumerate(build_starts(mesh, starts, cfg.seed)):
        roots = [record.field for record in found]
        try:
            record = newton_solve(spec, start, cfg, roots=roots)
        except (MaxIterExceededError, SingularHessianError) as e:
            logger.debug(f"start {index}: {e}")
            continue

        if verify_residual(spec, record.field) > cfg.tol_residual:
            continue
        if not _is_distinct(record.field, found, spec.p, cfg.distinct_tol):
            continue

        found.append(dataclasses.replace(record, method="deflatedNewton"))
        logger.debug(f"start {index}: found energy={record.energy:.12g}, sup={record.sup_norm:.6g}")

        if is_odd and record.sup_norm > 0:
            mirrored = -record.field
            if not _is_distinct(mirrored, found, spec.p, cfg.distinct_tol):
                continue
            try:
                twin = newton_solve(spec, mirrored, cfg)
            except (MaxIterExceededError, SingularHessianError):
                continue
            if _is_distinct(twin.field, found, spec.p, cfg.distinct_tol):
                found.append(dataclasses.replace(twin, method="deflatedNewton"))

    logger.info(f"multistart_deflated: {len(found)} critical point(s) from {starts} start(s)")

    return found


def _reparametrize(path: FloatArray, sobolev: _Sobolev) -> FloatArray:
    # equal arclength in the H1_0 metric, end points fixed
    lengths = np.array([sobolev.norm(path[i + 1] - path[i]) for i in range(len(path) - 1)])
    total = float(np.sum(lengths))
    if total == 0:
        return path

    arclength = np.concatenate(([0.0], np.cumsum(lengths))) / total
    targets = np.linspace(0.0, 1.0, len(path))
    result = np.empty_like(path)
    for j in range(path.shape[1]):
        result[:, j] = np.interp(targets, arclength, path[:, j])

    return result


def mountain_pass(
    spec: EnergySpec,
    a: DiscreteField,
    b: DiscreteField,
    segments: Optional[int] = None,
    cfg: Optional[SolverConfig] = None,
) -> CriticalPointRecord:
    """
    Climbing string search of a minimax critical point between ``a`` and ``b``.
    The images of the path descend along the H1_0 gradient and are redistributed to equal
    arclength while the highest image climbs. Newton polishes the highest image
    once its gradient is small.

    :raises plaplab.PathCollapseError:
        If ``a`` equals ``b``, the end points are not below the path maximum,
        or the maximum merges with an end point.
    :raises plaplab.MaxIterExceededError: If the search does not converge.
    """

    if cfg is None:
        cfg = SolverConfig()
    if segments is None:
        segments = cfg.segments

    sobolev = _Sobolev(a.mesh)
    scale = 1 + max(sobolev.norm(a.values), sobolev.norm(b.values))
    if sobolev.norm(b.values - a.values) <= 1e-12 * scale:
        raise PathCollapseError("end points coincide")

    weights = np.linspace(0.0, 1.0, segments + 1)[:, None]
    path = (1 - weights) * a.values[None, :] + weights * b.values[None, :]

    def energy_of(values: FloatArray) -> float:
        return assemble_energy(spec, a.with_values(values))

    end_energy = max(energy_of(a.values), energy_of(b.values))
    energies = np.array([energy_of(v) for v in path])
    if float(np.max(energies[1:-1])) <= end_energy:
        raise PathCollapseError("end points are not below the maximum of the straight path")

    dt = _DT_INIT
    polish_threshold = _POLISH_THRESHOLD
    max_sweeps = cfg.max_iter * _SWEEPS_PER_ITER

    def sobolev_gradient(values: FloatArray) -> FloatArray:
        return sobolev.gradient(assemble_gradient(spec, a.with_values(values)))

    for sweep in range(max_sweeps):
        energies = np.array([energy_of(v) for v in path])
        top = int(np.argmax(energies[1:-1])) + 1
        climber = path[top]

        for end in (path[0], path[-1]):
            if sobolev.norm(climber - end) <= 1e-8 * scale:
                raise PathCollapseError(f"path maximum merged with an end point at sweep {sweep}")

        gradient = sobolev_gradient(climber)
        force = sobolev.norm(gradient)

        if force <= polish_threshold * (1 + sobolev.norm(climber)):
            try:
                record = newton_solve(spec, a.with_values(climber), cfg)
            except (MaxIterExceededError, SingularHessianError):
                record = None

            if (
                record is not None
                and record.energy > end_energy
                and all(
                    seminorm_distance(record.field, end, spec.p) > cfg.distinct_tol
                    for end in (a, b)
                )
            ):
                logger.debug(f"mountain_pass: polished at sweep {sweep}, dt={dt:.3e}")
                return dataclasses.replace(
                    record, iterations=record.iterations + sweep, method="mountainPass"
                )

            polish_threshold /= 10

        tangent = path[top + 1] - path[top - 1]
        tangent_norm = sobolev.norm(tangent)
        if tangent_norm > 0:
            tangent = tangent / tangent_norm
        climb = -gradient + 2 * sobolev.inner(gradient, tangent) * tangent

        # H1_0 step control on the climber: shrink when the gradient grows, widen otherwise
        new_climber = climber + dt * climb
        new_force = sobolev.norm(sobolev_gradient(new_climber))
        if not math.isfinite(new_force) or new_force > _FORCE_GROWTH * force:
            dt = max(dt * 0.5, _DT_MIN)
            new_climber = climber
        elif new_force < force:
            dt = min(dt * 1.2, _DT_MAX)
        else:
            dt = max(dt * 0.8, _DT_MIN)

        new_path = path.copy()
        for i in range(1, segments):
            if i != top:
                new_path[i] = path[i] - dt * sobolev_gradient(path[i])
        new_path[top] = new_climber

        left = _reparametrize(new_path[: top + 1], sobolev)
        right = _reparametrize(new_path[top:], sobolev)
        path = np.concatenate((left, right[1:]))

    raise MaxIterExceededError(
        f"mountain pass did not converge in {max_sweeps} sweeps", iterations=max_sweeps
    )


def minimize_over_subspace(
    spec: EnergySpec,
    base: DiscreteField,
    basis: Sequence[DiscreteField],
    start: Optional[DiscreteField] = None,
    cfg: Optional[SolverConfig] = None,
) -> DiscreteField:
    """
    Minimize ``w -> f(base + w)`` over ``w`` in the span of ``basis``
    by Newton iteration in the basis coordinates.

    :return:
        Minimizer ``w``. The projection of the gradient onto the span has sup norm
        at most ``tol_residual``. With an empty basis ``start`` is returned unchanged.
    :raises plaplab.MaxIterExceededError: If the iteration does not converge.
    """

    if cfg is None:
        cfg = SolverConfig()
    if start is None:
        start = DiscreteField.zeros(base.mesh)
    if not basis:
        return start

    matrix = np.array([v.values for v in basis]).T
    orthonormal, _ = np.linalg.qr(matrix)
    coords = np.linalg.lstsq(matrix, start.values, rcond=None)[0]
    k_reduced = matrix.T @ stiffness_matrix(base.mesh) @ matrix

    def field_of(c: FloatArray) -> DiscreteField:
        return base.with_values(base.values + matrix @ c)

    def projected_sup(grad: FloatArray) -> float:
        return float(np.max(np.abs(orthonormal @ (orthonormal.T @ grad))))

    residual = assemble_gradient(spec, field_of(coords))
    current = projected_sup(residual)
    stalled = 0

    for iteration in range(cfg.max_iter):
        if current <= cfg.tol_residual:
            return base.with_values(matrix @ coords)

        u = field_of(coords)
        reduced_gradient = matrix.T @ residual
        hessian = assemble_hessian(spec, u, regularization=cfg.regularization)
        reduced_hessian = matrix.T @ hessian.form() @ matrix

        is_newton = True
        try:
            factor = scipy.linalg.cho_factor(reduced_hessian)
            direction = -scipy.linalg.cho_solve(factor, reduced_gradient)
        except (ValueError, np.linalg.LinAlgError):
            is_newton = False
            direction = -np.linalg.solve(k_reduced, reduced_gradient)

        slope = float(reduced_gradient @ direction)
        if slope >= 0:
            is_newton = False
            direction = -np.linalg.solve(k_reduced, reduced_gradient)
            slope = float(reduced_gradient @ direction)

        accepted = None
        if is_newton:
            # the energy is flat to rounding near the minimizer: judge the full step
            # by the projected gradient
            trial = coords + direction
            trial_residual = assemble_gradient(spec, field_of(trial))
            if projected_sup(trial_residual) < current:
                accepted = (trial, trial_residual)

        if accepted is None:
            energy = assemble_energy(spec, u)
            t = 1.0
            for _ in range(cfg.max_backtracks):
                trial = coords + t * direction
                trial_field = field_of(trial)
                if assemble_energy(spec, trial_field) <= energy + cfg.armijo_c * t * slope:
                    accepted = (trial, assemble_gradient(spec, trial_field))
                    break
                t *= cfg.backtrack

        if accepted is None:
            raise MaxIterExceededError("subspace line search stalled", iterations=iteration)

        coords, residual = accepted
        previous = current
        current = projected_sup(residual)
        stalled = stalled + 1 if current >= _PROGRESS_RATIO * previous else 0
        if stalled >= _MAX_STALLED:
            raise MaxIterExceededError(
                f"subspace minimization made no progress in {stalled} iterations: "
                f"projected residual={current:.3e}",
                iterations=iteration + 1,
            )

    if current <= cfg.tol_residual:
        return base.with_values(matrix @ coords)

    raise MaxIterExceededError(
        f"subspace minimization did not converge in {cfg.max_iter} iterations",
        iterations=cfg.max_iter,
    )


def cone_membership(geom: ConeGeometry, u: DiscreteField) -> ConeMembership:
    """
    Evaluate the cone predicates with the discrete norms.
    """

    field_norms = norms(u, geom.p)
    if field_norms.sup == 0:
        return ConeMembership.BOTH

    gradient_term = field_norms.seminorm**geom.p
    value_term = field_norms.lp**geom.p

    if geom.m_index == 0:
        in_minus = False
        in_plus = True
    else:
        in_minus = gradient_term <= geom.lambda_m * value_term * (1 + geom.rel_tol)
        in_plus = gradient_term >= geom.lambda_next * value_term * (1 - geom.rel_tol)

    if in_minus and in_plus:
        return ConeMembership.BOTH
    if in_minus:
        return ConeMembership.IN_X_MINUS
    if in_plus:
        return ConeMembership.IN_X_PLUS

    return ConeMembership.NEITHER
