"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum, unique
from typing import Final, Optional, Union

import numpy as np

from ._common import PROBE_EXPONENTS, FloatArray, FloatOrArray, as_float_array, to_output
from ._logger import logger
from .error import BadConfigError, DegeneratePointError


Kernel = Callable[[FloatArray], FloatArray]

_GROWTH_PROBE_EXPONENTS: Final = (2, 3, 4, 5, 6)
_GROWTH_REL_TOL: Final = 1e-3
_B_TAIL_EXPONENTS: Final = (3, 4, 5, 6)
_NOISE_FLOOR: Final = 1e-12
_ODD_PROBES: Final = (1e-3, 0.5, 1.0, 3.0, 10.0, 1e3)

# value of the primitive of (u - 1) sin(log u) at u = 1
_LOG_OSC_OFFSET: Final = 0.3


@unique
class Family(Enum):
    SMOOTH_POWER = "smoothPower"
    PURE_POWER = "purePower"
    CUSTOM = "custom"


@unique
class Order(Enum):
    VALUE = 0
    DERIVATIVE = 1
    ANTIDERIVATIVE = "antiderivative"


@unique
class BClass(Enum):
    B_MINUS = "bMinus"
    B_PLUS = "bPlus"
    NEITHER = "neither"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PrincipalPart:
    """
    Principal part ``Psi(xi) = ((kappa^2 + xi^2)^(p/2) - kappa^p) / p`` of the energy.

    :param float p: Exponent. Must be greater than 1.
    :param float kappa: Regularization. Must be non-negative.
    :raises plaplab.BadConfigError: If ``p`` or ``kappa`` is out of range.
    """

    p: float
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.p) or self.p <= 1:
            raise BadConfigError(f"p must be greater than 1: actual={self.p}", key="problem.p")
        if not math.isfinite(self.kappa) or self.kappa < 0:
            raise BadConfigError(
                f"kappa must be non-negative: actual={self.kappa}", key="problem.kappa"
            )

    @property
    def is_degenerate(self) -> bool:
        """
        |True| when the second derivative is undefined at zero slope.
        """

        return self.kappa == 0 and self.p < 2


@dataclass(frozen=True)
class CustomHook:
    """
    Evaluators of a nonlinearity that is not one of the closed families.
    Every callable takes and returns |numpy| arrays.
    """

    name: str
    g: Kernel
    dg: Kernel
    G: Kernel


@dataclass(frozen=True)
class Nonlinearity:
    """
    Nonlinearity ``g`` of the equation together with ``g'`` and the antiderivative ``G``.

    :param Family family: Family of the nonlinearity.
    :param float lambda_: Asymptotic slope.
    :param float mu: Coefficient of the lower order term.
    :param float q: Exponent of the lower order term.
    :param float p: Exponent of the principal part.
    :param CustomHook hook: Evaluators. Required for the custom family.
    """

    family: Family
    lambda_: float
    mu: float = 0.0
    q: float = 2.0
    p: float = 2.0
    hook: Optional[CustomHook] = None

    def __post_init__(self) -> None:
        if self.family == Family.CUSTOM:
            if self.hook is None:
                raise BadConfigError(
                    "custom nonlinearity requires a hook", key="nonlinearity.family"
                )
            return

        if self.family == Family.SMOOTH_POWER and not (0 < self.q < self.p <= 2):
            raise BadConfigError(
                f"smoothPower requires 0 < q < p <= 2: p={self.p}, q={self.q}",
                key="nonlinearity.q",
            )
        if self.family == Family.PURE_POWER and not (2 <= self.q < self.p):
            raise BadConfigError(
                f"purePower requires 2 <= q < p: p={self.p}, q={self.q}", key="nonlinearity.q"
            )

    @property
    def name(self) -> str:
        if self.hook is not None:
            return self.hook.name

        return self.family.value

    def g(self, s: FloatOrArray) -> FloatOrArray:
        return g_eval(self, s, Order.VALUE)

    def dg(self, s: FloatOrArray) -> FloatOrArray:
        return g_eval(self, s, Order.DERIVATIVE)

    def G(self, s: FloatOrArray) -> FloatOrArray:
        return g_eval(self, s, Order.ANTIDERIVATIVE)

    def is_odd(self) -> bool:
        """
        :return: |True| if ``g(-s) = -g(s)`` holds on the probe set.
        """

        for s in _ODD_PROBES:
            if not math.isclose(
                float(self.g(-s)), -float(self.g(s)), rel_tol=1e-12, abs_tol=1e-14
            ):
                return False

        return True


@dataclass(frozen=True)
class HypothesisVerdict:
    slope_at_infinity: Optional[float]
    slope_at_zero: float
    b_class: Optional[BClass] = None
    admissible: Optional[bool] = None
    growth_conclusive: bool = True
    tail_gap_sign: Optional[int] = None


@dataclass(frozen=True)
class EnergySpec:
    """
    Energy ``f(u) = int Psi(u') - int G(u)`` on ``(0, length)``.
    """

    principal: PrincipalPart
    nonlinearity: Nonlinearity
    length: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.length) or self.length <= 0:
            raise BadConfigError(
                f"length must be positive: actual={self.length}", key="domain.length"
            )
        if (
            self.nonlinearity.family != Family.CUSTOM
            and self.nonlinearity.p != self.principal.p
        ):
            raise BadConfigError(
                "exponent mismatch between principal part and nonlinearity: "
                f"{self.principal.p} != {self.nonlinearity.p}",
                key="nonlinearity.family",
            )

    @property
    def p(self) -> float:
        return self.principal.p

    @property
    def kappa(self) -> float:
        return self.principal.kappa


def psi_value(pp: PrincipalPart, xi: FloatOrArray) -> FloatOrArray:
    """
    :return: ``((kappa^2 + xi^2)^(p/2) - kappa^p) / p``
    """

    x = as_float_array(xi)
    p, kappa = pp.p, pp.kappa

    if kappa == 0:
        value = np.abs(x) ** p / p
    else:
        value = kappa**p / p * np.expm1(p / 2 * np.log1p((x / kappa) ** 2))

    return to_output(value, np.ndim(xi) == 0)


def psi_grad(pp: PrincipalPart, xi: FloatOrArray) -> FloatOrArray:
    """
    :return: Flux ``(kappa^2 + xi^2)^((p-2)/2) xi``.
    """

    x = as_float_array(xi)
    p, kappa = pp.p, pp.kappa

    if kappa == 0:
        value = np.sign(x) * np.abs(x) ** (p - 1)
    else:
        value = (kappa**2 + x**2) ** ((p - 2) / 2) * x

    return to_output(value, np.ndim(xi) == 0)


def psi_hess(pp: PrincipalPart, xi: FloatOrArray) -> FloatOrArray:
    """
    :return: ``(kappa^2 + xi^2)^((p-4)/2) (kappa^2 + (p-1) xi^2)``
    :raises plaplab.DegeneratePointError:
        If ``kappa=0``, ``p<2`` and ``xi`` contains zero.
    """

    x = as_float_array(xi)
    p, kappa = pp.p, pp.kappa

    if kappa == 0:
        if pp.is_degenerate and np.any(x == 0):
            raise DegeneratePointError(f"second derivative is undefined at zero slope: p={p}")

        with np.errstate(divide="ignore"):
            value = (p - 1) * np.abs(x) ** (p - 2)
    else:
        k2 = kappa**2
        value = (k2 + x**2) ** ((p - 4) / 2) * (k2 + (p - 1) * x**2)

    return to_output(value, np.ndim(xi) == 0)


def _power_part(s: FloatArray, a: float, order: Order) -> FloatArray:
    # |s|^(a-2) s and relatives
    abs_s = np.abs(s)

    if order == Order.VALUE:
        return np.sign(s) * abs_s ** (a - 1)
    if order == Order.DERIVATIVE:
        return (a - 1) * abs_s ** (a - 2)

    return abs_s**a / a


def _smooth_part(s: FloatArray, a: float, order: Order) -> FloatArray:
    # (1 + s^2)^((a-2)/2) s and relatives
    s2 = s**2

    if order == Order.VALUE:
        return (1 + s2) ** ((a - 2) / 2) * s
    if order == Order.DERIVATIVE:
        return (1 + s2) ** ((a - 4) / 2) * (1 + (a - 1) * s2)

    return np.expm1(a / 2 * np.log1p(s2)) / a


def g_eval(nl: Nonlinearity, s: FloatOrArray, order: Union[Order, int, str]) -> FloatOrArray:
    """
    Evaluate the nonlinearity.

    :param Nonlinearity nl: Nonlinearity to evaluate.
    :param s: Argument(s).
    :param order: ``0`` for ``g``, ``1`` for ``g'``, ``"antiderivative"`` for ``G``.
    :return: Value(s) with the same shape as ``s``.
    """

    order = Order(order)
    x = as_float_array(s)

    if nl.family == Family.CUSTOM:
        assert nl.hook
        kernel = {Order.VALUE: nl.hook.g, Order.DERIVATIVE: nl.hook.dg}.get(order, nl.hook.G)
        value = as_float_array(kernel(x))
    else:
        part = _smooth_part if nl.family == Family.SMOOTH_POWER else _power_part
        value = nl.lambda_ * part(x, nl.p, order)
        if nl.mu != 0:
            value = value + nl.mu * part(x, nl.q, order)

    return to_output(value, np.ndim(s) == 0)


def rational_hook(lambda_: float, mu: float) -> CustomHook:
    """
    ``g(s) = lambda s + mu s / (1 + s^2)``: slope ``lambda`` at infinity and
    ``lambda + mu`` at zero.
    """

    return CustomHook(
        name="rational",
        g=lambda s: lambda_ * s + mu * s / (1 + s**2),
        dg=lambda s: lambda_ + mu * (1 - s**2) / (1 + s**2) ** 2,
        G=lambda s: lambda_ * s**2 / 2 + mu / 2 * np.log1p(s**2),
    )


def linear_hook(lambda_: float) -> CustomHook:
    return CustomHook(
        name="linear",
        g=lambda s: lambda_ * s,
        dg=lambda s: np.full_like(s, lambda_, dtype=np.float64),
        G=lambda s: lambda_ * s**2 / 2,
    )


def _log_osc_primitive(u: FloatArray) -> FloatArray:
    log_u = np.log(u)
    sin_l, cos_l = np.sin(log_u), np.cos(log_u)

    return u**2 * (2 * sin_l - cos_l) / 5 - u * (sin_l - cos_l) / 2


def log_oscillating_hook(lambda_: float, mu: float) -> CustomHook:
    """
    ``g(s) = lambda s + mu s sin(log(1 + |s|))``: ``g(s)/s`` has no limit when ``mu != 0``.
    """

    def g(s: FloatArray) -> FloatArray:
        return lambda_ * s + mu * s * np.sin(np.log1p(np.abs(s)))

    def dg(s: FloatArray) -> FloatArray:
        a = np.abs(s)
        log_a = np.log1p(a)

        return lambda_ + mu * (np.sin(log_a) + a * np.cos(log_a) / (1 + a))

    def G(s: FloatArray) -> FloatArray:
        return lambda_ * s**2 / 2 + mu * (_log_osc_primitive(1 + np.abs(s)) - _LOG_OSC_OFFSET)

    return CustomHook(name="logOscillating", g=g, dg=dg, G=G)


def _probe_ratio(nl: Nonlinearity, p: float, s: float) -> float:
    return float(nl.g(s)) / (abs(s) ** (p - 2) * s)


def check_growth_a(nl: Nonlinearity, p: float) -> HypothesisVerdict:
    """
    Estimate the asymptotic slope ``lim g(s) / (|s|^(p-2) s)``.

    :return:
        Verdict with ``slope_at_infinity`` and ``slope_at_zero`` filled.
        ``slope_at_infinity`` is |None| when the probes do not agree.
    """

    slope_at_zero = float(nl.dg(0.0))

    if nl.family != Family.CUSTOM:
        return HypothesisVerdict(slope_at_infinity=nl.lambda_, slope_at_zero=slope_at_zero)

    for sign in (1.0, -1.0):
        ratios = [_probe_ratio(nl, p, sign * 10.0**k) for k in _GROWTH_PROBE_EXPONENTS]

        for prev, cur in zip(ratios, ratios[1:]):
            if not math.isclose(prev, cur, rel_tol=_GROWTH_REL_TOL, abs_tol=1e-12):
                logger.debug(f"growth probes disagree: {nl.name}, ratios={ratios}")
                return HypothesisVerdict(
                    slope_at_infinity=None, slope_at_zero=slope_at_zero, growth_conclusive=False
                )

    upper = _probe_ratio(nl, p, 10.0 ** _GROWTH_PROBE_EXPONENTS[-1])
    lower = _probe_ratio(nl, p, -(10.0 ** _GROWTH_PROBE_EXPONENTS[-1]))
    if not math.isclose(upper, lower, rel_tol=_GROWTH_REL_TOL, abs_tol=1e-12):
        return HypothesisVerdict(
            slope_at_infinity=None, slope_at_zero=slope_at_zero, growth_conclusive=False
        )

    return HypothesisVerdict(slope_at_infinity=(upper + lower) / 2, slope_at_zero=slope_at_zero)


def _b_values(nl: Nonlinearity, p: float, s: float) -> tuple[float, float]:
    pG = p * float(nl.G(s))
    gs = float(nl.g(s)) * s

    return (pG - gs, _NOISE_FLOOR * (abs(pG) + abs(gs)))


def tail_gap_sign(nl: Nonlinearity, p: float, lambda_: float) -> int:
    """
    :return: Sign of ``G(s) - lambda |s|^p / p`` on the far tail, ``0`` when inside noise.
    """

    signs = set()
    s_max = 10.0 ** PROBE_EXPONENTS[-1]

    for s in (s_max, -s_max):
        G = float(nl.G(s))
        pure = lambda_ * abs(s) ** p / p
        gap = G - pure

        if abs(gap) <= _NOISE_FLOOR * (abs(G) + abs(pure)):
            signs.add(0)
        else:
            signs.add(1 if gap > 0 else -1)

    if len(signs) == 1:
        return signs.pop()

    return 0


def classify_b(
    nl: Nonlinearity, p: float, kappa: float, verdict: Optional[HypothesisVerdict] = None
) -> HypothesisVerdict:
    """
    Classify the tail behavior of ``H(s) = p G(s) - g(s) s``.

    :param Nonlinearity nl: Nonlinearity to classify.
    :param float p: Exponent of the principal part.
    :param float kappa: Regularization of the principal part.
    :param HypothesisVerdict verdict:
        Verdict to extend. The growth check is run when omitted.
    :return: Verdict with ``b_class`` and ``admissible`` filled.
    """

    if verdict is None:
        verdict = check_growth_a(nl, p)

    all_within_noise = True
    increasing_sides = 0
    decreasing_sides = 0
    final_signs = []

    for sign in (1.0, -1.0):
        tail = [_b_values(nl, p, sign * 10.0**k) for k in _B_TAIL_EXPONENTS]
        increments = []

        for (prev, _), (cur, noise) in zip(tail, tail[1:]):
            delta = cur - prev
            increments.append(delta)
            if abs(delta) > noise:
                all_within_noise = False

        noises = [noise for _, noise in tail[1:]]
        if all(d > n for d, n in zip(increments, noises)):
            increasing_sides += 1
        if all(d < -n for d, n in zip(increments, noises)):
            decreasing_sides += 1

        final_value, final_noise = tail[-1]
        if final_value > final_noise:
            final_signs.append(1)
        elif final_value < -final_noise:
            final_signs.append(-1)
        else:
            final_signs.append(0)

    if increasing_sides == 2 and final_signs == [1, 1]:
        b_class = BClass.B_PLUS
    elif decreasing_sides == 2 and final_signs == [-1, -1]:
        b_class = BClass.B_MINUS
    elif all_within_noise:
        b_class = BClass.NEITHER
    else:
        b_class = BClass.INCONCLUSIVE

    admissible = p <= 2 or kappa == 0
    gap_sign = None
    if verdict.slope_at_infinity is not None:
        gap_sign = tail_gap_sign(nl, p, verdict.slope_at_infinity)

    logger.debug(f"classify_b: {nl.name}, class={b_class.value}, admissible={admissible}")

    return dataclasses.replace(
        verdict, b_class=b_class, admissible=admissible, tail_gap_sign=gap_sign
    )
