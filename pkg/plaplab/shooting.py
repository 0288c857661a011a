"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Final, NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ._common import FloatArray, as_float_array
from ._logger import logger
from .discretization import DiscreteField, Mesh1D, assemble_gradient, build_mesh
from .energy import EnergySpec, PrincipalPart, psi_grad, psi_value
from .error import (
    BadConfigError,
    BlowUpError,
    BracketFailureError,
    NotFoundError,
    ShootingError,
)


DEFAULT_STEPS: Final = 10_000
MIN_STEPS: Final = 100
BLOW_UP_LIMIT: Final = 1e8
DEFAULT_MESH_N: Final = 255

_FLUX_REL_TOL: Final = 1e-13
_FLUX_MAX_ITER: Final = 100
_BISECTION_POINTS: Final = 33
_BISECTION_XTOL: Final = 1e-12
_EIGEN_RTOL: Final = 1e-12
_EIGEN_ATOL: Final = 1e-14
_MAX_DOUBLING: Final = 200


@dataclass(frozen=True)
class IVPState:
    """
    State of the first order system ``u' = Phi^{-1}(w)``, ``w' = -g(u)``.
    """

    x: float
    u: float
    w: float


class IVPResult(NamedTuple):
    state: IVPState
    nodes: int
    profile: Optional[tuple[FloatArray, FloatArray, FloatArray]]


class BVPSolution(NamedTuple):
    field: DiscreteField
    slope0: float
    residual: float
    nodes: int


def _flux_inverse(pp: PrincipalPart, w: FloatArray) -> FloatArray:
    p, kappa = pp.p, pp.kappa

    if kappa == 0:
        return np.sign(w) * np.abs(w) ** (1 / (p - 1))
    if p == 2:
        return w.copy()

    a = np.abs(w)
    linear = a / kappa ** (p - 2)
    power = a ** (1 / (p - 1))

    if p > 2:
        lo = np.zeros_like(a)
        hi = np.minimum(linear, power)
        x = hi.copy()
    else:
        lo = np.maximum(linear, power)
        hi = 2 ** ((2 - p) / (2 * (p - 1))) * lo
        x = lo.copy()

    k2 = kappa**2
    for _ in range(_FLUX_MAX_ITER):
        base = k2 + x**2
        residual = base ** ((p - 2) / 2) * x - a
        lo = np.where(residual < 0, x, lo)
        hi = np.where(residual > 0, x, hi)

        converged = (np.abs(residual) <= _FLUX_REL_TOL * a) | (hi - lo <= 1e-15 * x)
        if np.all(converged):
            break

        slope = base ** ((p - 4) / 2) * (k2 + (p - 1) * x**2)
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = x - residual / slope
        outside = ~np.isfinite(candidate) | (candidate <= lo) | (candidate >= hi)
        x = np.where(converged, x, np.where(outside, (lo + hi) / 2, candidate))

    return np.sign(w) * x


def invert_flux(pp: PrincipalPart, w: float) -> float:
    """
    Solve ``psi_grad(pp, xi) = w`` for the slope ``xi``.
    The relative residual of the result is at most 1e-12.
    """

    return float(_flux_inverse(pp, np.array([float(w)]))[0])


def hamiltonian(spec: EnergySpec, state: IVPState) -> float:
    """
    :return: First integral ``u' Phi(u') - Psi(u') + G(u)`` of the autonomous equation.
    """

    slope = invert_flux(spec.principal, state.w)

    return (
        slope * state.w
        - float(psi_value(spec.principal, slope))
        + float(spec.nonlinearity.G(state.u))
    )


class _Batch(NamedTuple):
    u: FloatArray
    w: FloatArray
    nodes: FloatArray
    blown: FloatArray
    profile: Optional[tuple[FloatArray, FloatArray, FloatArray]]


def _validate_steps(steps: int) -> None:
    if steps < MIN_STEPS:
        raise BadConfigError(f"steps must be >= {MIN_STEPS}: actual={steps}")


def _integrate_batch(
    spec: EnergySpec, slopes: FloatArray, L: float, steps: int, keep_profile: bool = False
) -> _Batch:
    # classical RK4 over a batch of initial slopes
    pp = spec.principal
    g = spec.nonlinearity.g
    dx = L / steps

    def rhs(u: FloatArray, w: FloatArray) -> tuple[FloatArray, FloatArray]:
        return (_flux_inverse(pp, w), -as_float_array(g(u)))

    u = np.zeros_like(slopes)
    w = as_float_array(psi_grad(pp, slopes))
    nodes = np.zeros(len(slopes), dtype=int)
    last_sign = np.zeros(len(slopes))
    blown = np.zeros(len(slopes), dtype=bool)

    profile_u = [u.copy()] if keep_profile else []
    profile_w = [w.copy()] if keep_profile else []

    for step in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            k1u, k1w = rhs(u, w)
            k2u, k2w = rhs(u + dx / 2 * k1u, w + dx / 2 * k1w)
            k3u, k3w = rhs(u + dx / 2 * k2u, w + dx / 2 * k2w)
            k4u, k4w = rhs(u + dx * k3u, w + dx * k3w)

            active = ~blown
            u = np.where(active, u + dx / 6 * (k1u + 2 * k2u + 2 * k3u + k4u), u)
            w = np.where(active, w + dx / 6 * (k1w + 2 * k2w + 2 * k3w + k4w), w)

        blown |= ~np.isfinite(u) | (np.abs(u) > BLOW_UP_LIMIT)

        if step < steps - 1:
            sign = np.sign(u)
            flipped = (sign != 0) & (last_sign != 0) & (sign != last_sign) & ~blown
            nodes += flipped.astype(int)
            last_sign = np.where(sign != 0, sign, last_sign)

        if keep_profile:
            profile_u.append(u.copy())
            profile_w.append(w.copy())

        if np.all(blown):
            break

    profile = None
    if keep_profile:
        x = np.linspace(0.0, L, len(profile_u))
        profile = (x, np.array(profile_u), np.array(profile_w))

    return _Batch(u=u, w=w, nodes=nodes, blown=blown, profile=profile)


def integrate_ivp(
    spec: EnergySpec,
    slope0: float,
    L: Optional[float] = None,
    steps: int = DEFAULT_STEPS,
    keep_profile: bool = False,
) -> IVPResult:
    """
    Integrate ``-(Phi(u'))' = g(u)`` from ``u(0)=0, u'(0)=slope0`` with the classical
    fourth-order Runge-Kutta scheme in the flux variables ``(u, w=Phi(u'))``.

    :param EnergySpec spec: Energy of the equation.
    :param float slope0: Initial slope.
    :param float L: End point. Defaults to the domain length.
    :param int steps: Number of steps. Must be >= 100.
    :param bool keep_profile: Keep the trajectory.
    :return: End point state and the number of interior sign changes of ``u``.
    :raises plaplab.BlowUpError: If ``|u|`` exceeds 1e8 before the end point.
    """

    _validate_steps(steps)
    if L is None:
        L = spec.length

    batch = _integrate_batch(spec, np.array([float(slope0)]), L, steps, keep_profile)
    if batch.blown[0]:
        raise BlowUpError(f"trajectory blew up: slope0={slope0}")

    profile = None
    if batch.profile is not None:
        x, pu, pw = batch.profile
        profile = (x, pu[:, 0], pw[:, 0])

    return IVPResult(
        state=IVPState(x=L, u=float(batch.u[0]), w=float(batch.w[0])),
        nodes=int(batch.nodes[0]),
        profile=profile,
    )


def _eigen_zeros(p: float, lambda_: float, slope0: float, x_end: float) -> FloatArray:
    inv = 1 / (p - 1)

    def rhs(_: float, y: FloatArray) -> list[float]:
        u, w = y
        return [math.copysign(abs(w) ** inv, w), -lambda_ * math.copysign(abs(u) ** (p - 1), u)]

    def crossing(_: float, y: FloatArray) -> float:
        return float(y[0])

    w0 = math.copysign(abs(slope0) ** (p - 1), slope0)
    solution = solve_ivp(
        rhs,
        (0.0, x_end),
        [0.0, w0],
        method="DOP853",
        rtol=_EIGEN_RTOL,
        atol=_EIGEN_ATOL,
        events=crossing,
    )
    if solution.status < 0:
        raise ShootingError(f"eigenvalue integration failed: {solution.message}")

    zeros = solution.t_events[0]

    return zeros[zeros > 1e-12 * x_end]


def _mth_zero(p: float, lambda_: float, m: int, slope0: float, x_end: float) -> float:
    zeros = _eigen_zeros(p, lambda_, slope0, x_end)
    if len(zeros) < m:
        return math.inf

    return float(zeros[m - 1])


def shoot_eigenvalue(p: float, L: float, m: int, slope0: float = 1.0) -> float:
    """
    Find the ``m``-th Dirichlet eigenvalue of the p-Laplacian on ``(0, L)`` by shooting:
    ``lambda`` is bisected until the ``m``-th zero of the solution lands at ``L``.

    :raises plaplab.BracketFailureError: If no bracket for ``lambda`` is found.
    :raises plaplab.ShootingError: If the result depends on the initial slope.
    """

    if p <= 1:
        raise BadConfigError(f"p must be greater than 1: actual={p}", key="problem.p")
    if L <= 0 or m < 1:
        raise BadConfigError(f"invalid eigenvalue query: L={L}, m={m}")

    x_end = 2 * L

    def mismatch(lambda_: float) -> float:
        return min(_mth_zero(p, lambda_, m, slope0, x_end), x_end) - L

    hi = 1.0
    for _ in range(_MAX_DOUBLING):
        if mismatch(hi) < 0:
            break
        hi *= 2
    else:
        raise BracketFailureError(f"no upper bracket for the eigenvalue: p={p}, m={m}")

    lo = hi / 2
    for _ in range(_MAX_DOUBLING):
        if mismatch(lo) >= 0:
            break
        hi = lo
        lo /= 2
    else:
        raise BracketFailureError(f"no lower bracket for the eigenvalue: p={p}, m={m}")

    logger.debug(f"shoot_eigenvalue: p={p}, m={m}, bracket=[{lo}, {hi}]")

    try:
        lambda_ = float(brentq(mismatch, lo, hi, xtol=1e-14 * hi, rtol=1e-14, maxiter=200))
    except (RuntimeError, ValueError) as e:
        raise BracketFailureError(f"bisection failed: {e}") from e

    recheck = _mth_zero(p, lambda_, m, 2 * slope0, x_end)
    if not math.isclose(recheck, L, rel_tol=1e-6):
        raise ShootingError(
            f"eigenvalue depends on the initial slope: zero at {recheck} instead of {L}"
        )

    return lambda_


def _shoot_ends(
    spec: EnergySpec, slopes: FloatArray, steps: int
) -> tuple[FloatArray, FloatArray]:
    batch = _integrate_batch(spec, slopes, spec.length, steps)
    u_end = np.where(batch.blown, np.nan, batch.u)

    return (u_end, batch.nodes)


def scan_brackets(
    spec: EnergySpec,
    nodes_wanted: int,
    slopes: Optional[Sequence[float]] = None,
    steps: int = DEFAULT_STEPS,
) -> list[tuple[float, float]]:
    """
    Scan initial slopes for sign changes of ``u(L)`` where the number of interior
    zeros moves between ``nodes_wanted`` and ``nodes_wanted + 1``.

    :param slopes: Increasing initial slopes. Defaults to a logarithmic grid on [1e-3, 1e3].
    :return: Brackets usable by :py:func:`shoot_bvp`.
    """

    _validate_steps(steps)
    if slopes is None:
        grid = np.logspace(-3, 3, 121)
    else:
        grid = as_float_array(slopes)

    u_end, nodes = _shoot_ends(spec, grid, steps)
    wanted = {nodes_wanted, nodes_wanted + 1}
    brackets = []

    for i in range(len(grid) - 1):
        a, b = u_end[i], u_end[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or a * b > 0:
            continue
        if {int(nodes[i]), int(nodes[i + 1])} <= wanted:
            brackets.append((float(grid[i]), float(grid[i + 1])))

    logger.debug(f"scan_brackets: nodes={nodes_wanted}, found={len(brackets)}")

    return brackets


def _interior_nodes(values: FloatArray) -> int:
    signs = np.sign(values[values != 0])
    return int(np.sum(signs[1:] != signs[:-1]))


def shoot_bvp(
    spec: EnergySpec,
    bracket: tuple[float, float],
    nodes_wanted: int,
    mesh: Optional[Mesh1D] = None,
    steps: int = DEFAULT_STEPS,
) -> BVPSolution:
    """
    Solve the Dirichlet problem by bisection on the initial slope.

    :param EnergySpec spec: Energy of the equation.
    :param bracket: Initial slopes giving opposite signs of ``u(L)``.
    :param int nodes_wanted: Number of interior zeros of the solution.
    :param Mesh1D mesh: Mesh to sample on. Defaults to a uniform mesh with 255 interior nodes.
    :return: Sampled solution and the sup norm of the finite element gradient there.
    :raises plaplab.NotFoundError:
        If ``u(L)`` does not change sign in the bracket or the node count differs.
    """

    _validate_steps(steps)
    if mesh is None:
        mesh = build_mesh(spec.length, DEFAULT_MESH_N)

    lo, hi = sorted(float(s) for s in bracket)
    ends, _ = _shoot_ends(spec, np.array([lo, hi]), steps)
    u_lo, u_hi = float(ends[0]), float(ends[1])
    if not (math.isfinite(u_lo) and math.isfinite(u_hi)) or u_lo * u_hi > 0:
        raise NotFoundError(f"no sign change of u(L) in [{lo}, {hi}]")

    while hi - lo > _BISECTION_XTOL * max(abs(lo), abs(hi)) and u_lo != 0 and u_hi != 0:
        grid = np.linspace(lo, hi, _BISECTION_POINTS)
        inner, _ = _shoot_ends(spec, grid[1:-1], steps)
        values = np.concatenate(([u_lo], inner, [u_hi]))

        for i in range(len(grid) - 1):
            a, b = values[i], values[i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b <= 0:
                lo, hi, u_lo, u_hi = float(grid[i]), float(grid[i + 1]), float(a), float(b)
                break
        else:
            raise NotFoundError(f"sign change lost while refining [{lo}, {hi}]")

    if u_lo == u_hi:
        slope0 = lo
    else:
        slope0 = lo - u_lo * (hi - lo) / (u_hi - u_lo)

    try:
        result = integrate_ivp(spec, slope0, steps=steps, keep_profile=True)
    except BlowUpError as e:
        raise NotFoundError(f"solution blew up: slope0={slope0}") from e

    assert result.profile
    x, u, _ = result.profile
    field = DiscreteField(mesh, np.interp(mesh.interior, x, u))

    if result.nodes != nodes_wanted:
        raise NotFoundError(
            f"solution has {result.nodes} interior zeros instead of {nodes_wanted}"
        )

    residual = float(np.max(np.abs(assemble_gradient(spec, field))))
    logger.debug(f"shoot_bvp: slope0={slope0:.12g}, nodes={result.nodes}, residual={residual:.3e}")

    return BVPSolution(field=field, slope0=slope0, residual=residual, nodes=result.nodes)


def cross_check(spec: EnergySpec, u: DiscreteField, steps: int = DEFAULT_STEPS) -> float:
    """
    Re-solve the problem by shooting around the initial slope of ``u``.

    :return: Sup distance between ``u`` and the shooting solution,
        ``inf`` when shooting finds no solution nearby.
    """

    slope0 = float(u.slopes()[0])
    if slope0 == 0:
        return math.inf

    nodes_wanted = _interior_nodes(u.values)
    lo, hi = sorted((0.8 * slope0, 1.25 * slope0))
    grid = np.linspace(lo, hi, _BISECTION_POINTS)
    u_end, _ = _shoot_ends(spec, grid, steps)

    candidates = []
    for i in range(len(grid) - 1):
        a, b = u_end[i], u_end[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b <= 0:
            candidates.append((float(grid[i]), float(grid[i + 1])))

    candidates.sort(key=lambda bracket: abs((bracket[0] + bracket[1]) / 2 - slope0))

    for bracket in candidates:
        try:
            solution = shoot_bvp(spec, bracket, nodes_wanted, mesh=u.mesh, steps=steps)
        except NotFoundError:
            continue

        return (solution.field - u).sup_norm()

    return math.inf
