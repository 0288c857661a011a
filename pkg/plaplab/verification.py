"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import fnmatch
import glob
import math
import os.path
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, Final, NamedTuple, Optional

import numpy as np
import typepy
from pathvalidate import ValidationError
from tabledata import TableData

from ._logger import logger
from ._table import build_table
from ._validator import validate_scenario_name
from .config import ConfigEntry, ProblemConfig, build_config, decode_text, split_entries
from .discretization import (
    AssembledQuadratic,
    DiscreteField,
    assemble_energy,
    assemble_gradient,
    assemble_hessian,
    build_mesh,
    mass_matrix,
    norms,
    stiffness_matrix,
)
from .error import BadConfigError, PLapLabError
from .morse import assemble_Q, compute_morse, morse_indices
from .pipeline import run_az_check
from .reduction import (
    build_decomposition,
    classify_origin,
    psi_map,
    reduced_gradient_check,
    reduced_hessian_at_zero,
    sample_polar_grid,
    with_halving,
)
from .shooting import shoot_eigenvalue
from .solver import verify_residual
from .spectrum import eigenvalue_1d, lowest_eigenpairs


SCENARIO_DIR: Final = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")
SCENARIO_EXTENSION: Final = ".scenario"
SUMMARY_HEADERS: Final = ("name", "kind", "result", "failed")

SCENARIO_KINDS: Final = (
    "az-check",
    "strict-minimum",
    "spectrum-cross",
    "spectrum-fem",
    "derivatives",
    "reduction",
    "infinite-index",
)

_OPERATORS: Final = ("<=", ">=", "==", "<", ">")
_FD_STEP: Final = 1e-6
# smallest element slope sampled when the second derivative is singular at zero slope
_MIN_DEGENERATE_SLOPE: Final = 1e-3

Observation = dict[str, Any]


class Expectation(NamedTuple):
    field: str
    operator: str
    expected: str
    tol: float
    source: Optional[str]


class ExpectationResult(NamedTuple):
    expectation: Expectation
    observed: Any
    passed: bool


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    config: Optional[ProblemConfig]
    params: dict[str, str]
    expectations: tuple[Expectation, ...]
    path: Optional[str] = None

    def param(self, key: str, default: str) -> str:
        return self.params.get(key, default)

    def require_config(self) -> ProblemConfig:
        if self.config is None:
            raise BadConfigError(f"scenario '{self.name}' requires a problem configuration")

        return self.config


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    kind: str
    results: tuple[ExpectationResult, ...]
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(result.passed for result in self.results)

    @property
    def failures(self) -> tuple[ExpectationResult, ...]:
        return tuple(result for result in self.results if not result.passed)


@dataclass(frozen=True)
class VerificationSummary:
    results: tuple[ScenarioResult, ...]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def as_tabledata(self) -> TableData:
        rows = []
        for result in self.results:
            failed = [failure.expectation.field for failure in result.failures]
            if result.error:
                failed.append(f"error: {result.error}")
            rows.append(
                [result.name, result.kind, "pass" if result.passed else "fail", ";".join(failed)]
            )

        return build_table("verification", SUMMARY_HEADERS, rows)


def _to_float(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return None
    if isinstance(value, float) and math.isinf(value):
        return value
    if isinstance(value, str) and value.strip() in ("inf", "+inf", "-inf"):
        return float(value)

    converted = typepy.RealNumber(
        value, strict_level=typepy.StrictLevel.MIN, float_type=float
    ).try_convert()

    return None if converted is None else float(converted)


def parse_expectation(entry: ConfigEntry) -> Expectation:
    """
    Parse ``expect.<field> = [op] value ; tol=<tol> ; source=<tag>``.
    """

    field = entry.key.split(".", 1)[1]
    parts = [part.strip() for part in entry.value.split(";")]
    body = parts[0]

    operator = "=="
    for candidate in _OPERATORS:
        if body.startswith(candidate):
            operator = candidate
            body = body[len(candidate) :].strip()
            break

    tol = 0.0
    source = None
    for part in parts[1:]:
        name, _, value = (token.strip() for token in part.partition("="))
        if name == "tol":
            parsed = _to_float(value)
            if parsed is None or parsed < 0:
                raise BadConfigError(
                    f"invalid tolerance: {value!r}", key=entry.key, line_number=entry.line_number
                )
            tol = parsed
        elif name == "source":
            source = value
        else:
            raise BadConfigError(
                f"unknown attribute '{name}'", key=entry.key, line_number=entry.line_number
            )

    if not body:
        raise BadConfigError(
            "expected value is missing", key=entry.key, line_number=entry.line_number
        )

    return Expectation(field=field, operator=operator, expected=body, tol=tol, source=source)


def parse_scenario_text(text: str, path: Optional[str] = None) -> Scenario:
    """
    Parse a scenario: ``scenario.*`` parameters, ``expect.*`` expectations and an optional
    problem configuration.

    :raises plaplab.BadConfigError: If the scenario is malformed.
    """

    params: dict[str, str] = {}
    expectations = []
    config_entries = []

    for entry in split_entries(text):
        section = entry.key.split(".", 1)[0]
        if section == "scenario":
            params[entry.key.split(".", 1)[1]] = entry.value
        elif section == "expect":
            expectations.append(parse_expectation(entry))
        else:
            config_entries.append(entry)

    name = params.pop("name", None)
    if name is None and path:
        name = os.path.splitext(os.path.basename(path))[0]
    if not name:
        raise BadConfigError("scenario name is missing", key="scenario.name")
    try:
        validate_scenario_name(name)
    except ValidationError as e:
        raise BadConfigError(str(e), key="scenario.name") from e

    kind = params.pop("kind", "")
    if kind not in SCENARIO_KINDS:
        raise BadConfigError(f"unknown scenario kind '{kind}'", key="scenario.kind")

    return Scenario(
        name=name,
        kind=kind,
        config=build_config(config_entries) if config_entries else None,
        params=params,
        expectations=tuple(expectations),
        path=path,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise BadConfigError(f"failed to read the scenario: {e}") from e

    return parse_scenario_text(decode_text(data), path)


def load_scenarios(directory: Optional[str] = None, pattern: str = "*") -> list[Scenario]:
    """
    Load the scenarios of a directory whose names match ``pattern``, sorted by name.
    """

    if directory is None:
        directory = SCENARIO_DIR

    scenarios = [
        load_scenario(path)
        for path in sorted(glob.glob(os.path.join(directory, f"*{SCENARIO_EXTENSION}")))
    ]

    return sorted(
        (s for s in scenarios if fnmatch.fnmatchcase(s.name, pattern)), key=lambda s: s.name
    )


def _float_list(text: str) -> list[float]:
    values = []
    for token in text.split(","):
        value = _to_float(token.strip())
        if value is None:
            raise BadConfigError(f"expected a comma separated list of numbers: {text!r}")
        values.append(value)

    return values


def _random_field(rng: np.random.Generator, mesh: Any, modes: int = 6) -> DiscreteField:
    x = mesh.interior / mesh.length
    coefficients = rng.standard_normal(modes) / np.arange(1, modes + 1)
    values = sum(c * np.sin((k + 1) * math.pi * x) for k, c in enumerate(coefficients))

    return DiscreteField(mesh, np.asarray(values))


def _observe_az_check(scenario: Scenario, seed: Optional[int]) -> Observation:
    cfg = scenario.require_config()
    if seed is not None:
        cfg = cfg.with_seed(seed)

    report = run_az_check(cfg)
    observed: Observation = {
        "verdict": report.verdict.value,
        "exitCode": report.exit_code,
        "hypothesisClass": report.hypothesis_class.value,
        "resonant": report.resonant,
        "mInfinity": report.m_infinity,
        "conditionHolds": report.condition_holds,
        "bClass": report.b_class.value if report.b_class else None,
        "bAdmissible": report.b_admissible,
        "eigenvalueBetween": report.eigenvalue_between,
        "solutions": len(report.solutions),
    }
    if report.morse_at_zero is not None:
        observed["morseM"] = report.morse_at_zero.m
        observed["morseMStar"] = report.morse_at_zero.m_star

    witness = report.witness_record
    if witness is not None:
        observed["witnessSupNorm"] = witness.sup_norm
        observed["witnessResidual"] = verify_residual(cfg.energy_spec(), witness.field)
        observed["shootingDistance"] = witness.shooting_distance

    return observed


def _observe_strict_minimum(scenario: Scenario, seed: Optional[int]) -> Observation:
    cfg = scenario.require_config()
    spec = cfg.energy_spec()
    mesh = cfg.mesh()
    samples = int(scenario.param("samples", "100"))
    radius = float(scenario.param("radius", "1e-2"))
    rng = np.random.default_rng(cfg.seed if seed is None else seed)

    energies = []
    for _ in range(samples):
        field = _random_field(rng, mesh)
        seminorm = norms(field, spec.p).seminorm
        field = field * (radius * rng.uniform(0.01, 1.0) / seminorm)
        energies.append(assemble_energy(spec, field))

    zero = DiscreteField.zeros(mesh)
    md = compute_morse(spec, zero)
    observed: Observation = {
        "minEnergy": min(energies),
        "morseM": md.m,
        "morseMStar": md.m_star,
    }
    if md.is_finite:
        dec = build_decomposition(spec, zero, md)
        observed["dimV"] = dec.dim_v
        observed["originClass"] = classify_origin(sample_polar_grid(spec, zero, dec)).value

    return observed


def _observe_spectrum_cross(scenario: Scenario, seed: Optional[int]) -> Observation:
    exponents = _float_list(scenario.param("exponents", "1.5,2,3"))
    modes = int(scenario.param("modes", "3"))
    length = float(scenario.param("length", "1"))

    worst = 0.0
    for p in exponents:
        for m in range(1, modes + 1):
            exact = eigenvalue_1d(p, length, m)
            worst = max(worst, abs(shoot_eigenvalue(p, length, m) - exact) / exact)

    return {"maxRelativeError": worst}


def _observe_spectrum_fem(scenario: Scenario, seed: Optional[int]) -> Observation:
    n = int(scenario.param("n", "255"))
    length = float(scenario.param("length", "1"))
    modes = int(scenario.param("modes", "5"))
    mesh = build_mesh(length, n)

    stiffness = stiffness_matrix(mesh)
    quadratic = AssembledQuadratic(stiffness, np.zeros_like(stiffness), mesh)
    pairs = lowest_eigenpairs(quadratic, modes, mass_matrix(mesh))

    fem_error = 0.0
    closed_error = 0.0
    for m, pair in enumerate(pairs, 1):
        exact = (m * math.pi / length) ** 2
        fem_error = max(fem_error, abs(pair.value - exact) / exact)
        closed_error = max(closed_error, abs(eigenvalue_1d(2, length, m) - exact) / exact)

    return {
        "maxRelativeError": fem_error,
        "closedFormError": closed_error,
        "meshBound": 10 * float(np.max(mesh.h)) ** 2,
    }


def _observe_derivatives(scenario: Scenario, seed: Optional[int]) -> Observation:
    base = scenario.require_config()
    samples = int(scenario.param("samples", "50"))
    exponents = _float_list(scenario.param("exponents", str(base.p)))
    kappas = _float_list(scenario.param("kappas", str(base.kappa)))
    rng = np.random.default_rng(base.seed if seed is None else seed)

    gradient_error = 0.0
    hessian_error = 0.0
    for p in exponents:
        for kappa in kappas:
            spec = dataclasses.replace(base, p=p, kappa=kappa).energy_spec()
            mesh = base.mesh()
            for _ in range(samples):
                u = _random_field(rng, mesh)
                d = rng.standard_normal(mesh.n)
                d /= np.linalg.norm(d)
                if (
                    spec.principal.is_degenerate
                    and np.min(np.abs(u.slopes())) < _MIN_DEGENERATE_SLOPE
                ):
                    continue
                step = _FD_STEP * d

                exact = float(assemble_gradient(spec, u) @ d)
                fd = (
                    assemble_energy(spec, u.with_values(u.values + step))
                    - assemble_energy(spec, u.with_values(u.values - step))
                ) / (2 * _FD_STEP)
                gradient_error = max(gradient_error, abs(fd - exact) / max(1.0, abs(exact)))

                hd = assemble_hessian(spec, u).matvec(d)
                fd_hd = (
                    assemble_gradient(spec, u.with_values(u.values + step))
                    - assemble_gradient(spec, u.with_values(u.values - step))
                ) / (2 * _FD_STEP)
                hessian_error = max(
                    hessian_error,
                    float(np.max(np.abs(fd_hd - hd))) / max(1.0, float(np.max(np.abs(hd)))),
                )

    return {"gradientError": gradient_error, "hessianError": hessian_error}


def _observe_reduction(scenario: Scenario, seed: Optional[int]) -> Observation:
    cfg = scenario.require_config()
    spec = cfg.energy_spec()
    solver_cfg = cfg.solver_config()
    zero = DiscreteField.zeros(cfg.mesh())
    samples = int(scenario.param("samples", "20"))

    q_at = assemble_Q(spec, zero)
    md = morse_indices(q_at, spec)
    dec = build_decomposition(spec, zero, md, rho=cfg.rho, r=cfg.r, q_at=q_at)
    origin = psi_map(spec, zero, dec, np.zeros(dec.dim_v), solver_cfg)

    discrepancy, dec = with_halving(
        dec,
        lambda d: reduced_gradient_check(
            spec, zero, d, samples, cfg.seed if seed is None else seed, solver_cfg
        ),
    )
    observed: Observation = {
        "dimV": dec.dim_v,
        "morseM": md.m,
        "morseMStar": md.m_star,
        "psiZero": origin.psi_field.sup_norm(),
        "gradPhiZero": float(np.max(np.abs(origin.grad_phi), initial=0.0)),
        "gradientCheck": discrepancy,
    }

    if dec.dim_v > 0:
        hessian = reduced_hessian_at_zero(spec, zero, dec, solver_cfg)
        scale = float(np.max(np.abs(dec.eigenvalues)))
        observed["hessianVsEigenvalues"] = (
            float(np.max(np.abs(hessian - np.diag(dec.eigenvalues)))) / scale
        )
        if spec.p == 2:
            slope = float(spec.nonlinearity.dg(0.0))
            analytic = np.array(
                [(m * math.pi / spec.length) ** 2 - slope for m in range(1, dec.dim_v + 1)]
            )
            observed["hessianVsAnalytic"] = float(
                np.max(np.abs(hessian - np.diag(analytic)))
            ) / float(np.max(np.abs(analytic)))

    grid, _ = with_halving(dec, lambda d: sample_polar_grid(spec, zero, d, cfg=solver_cfg))
    observed["originClass"] = classify_origin(grid).value

    return observed


def _observe_infinite_index(scenario: Scenario, seed: Optional[int]) -> Observation:
    cfg = scenario.require_config()
    spec = cfg.energy_spec()
    zero = DiscreteField.zeros(cfg.mesh())
    md = compute_morse(spec, zero)

    observed: Observation = {"morseM": md.m, "morseMStar": md.m_star, "originClass": None}
    if md.is_finite:
        dec = build_decomposition(spec, zero, md)
        grid = sample_polar_grid(spec, zero, dec, cfg=cfg.solver_config())
        observed["originClass"] = classify_origin(grid).value

    return observed


_OBSERVERS: Final[dict[str, Callable[[Scenario, Optional[int]], Observation]]] = {
    "az-check": _observe_az_check,
    "strict-minimum": _observe_strict_minimum,
    "spectrum-cross": _observe_spectrum_cross,
    "spectrum-fem": _observe_spectrum_fem,
    "derivatives": _observe_derivatives,
    "reduction": _observe_reduction,
    "infinite-index": _observe_infinite_index,
}


def _format_observed(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"

    return str(value)


def compare(expectation: Expectation, observed: Any) -> bool:
    """
    :return: |True| if the observed value satisfies the expectation.
    """

    expected_number = _to_float(expectation.expected)
    observed_number = None if observed is None else _to_float(observed)

    if expected_number is None or observed_number is None:
        if expectation.operator != "==":
            return False
        return _format_observed(observed) == expectation.expected

    if math.isnan(observed_number):
        return False

    op = expectation.operator
    if op == "<=":
        return observed_number <= expected_number + expectation.tol
    if op == ">=":
        return observed_number >= expected_number - expectation.tol
    if op == "<":
        return observed_number < expected_number
    if op == ">":
        return observed_number > expected_number
    if math.isinf(expected_number):
        return observed_number == expected_number

    return abs(observed_number - expected_number) <= expectation.tol


def run_scenario(scenario: Scenario, seed: Optional[int] = None) -> ScenarioResult:
    """
    Execute a scenario and compare the observations with its expectations.

    :param Scenario scenario: Scenario to run.
    :param int seed: Overrides the seed of the randomized parts.
    :return: Per-expectation results. Errors are reported, not raised.
    """

    logger.debug(f"running scenario: {scenario.name} ({scenario.kind})")

    try:
        observed = _OBSERVERS[scenario.kind](scenario, seed)
    except PLapLabError as e:
        logger.debug(f"scenario {scenario.name} raised: {e}")
        return ScenarioResult(name=scenario.name, kind=scenario.kind, results=(), error=str(e))

    results = []
    for expectation in scenario.expectations:
        value = observed.get(expectation.field)
        results.append(
            ExpectationResult(
                expectation=expectation, observed=value, passed=compare(expectation, value)
            )
        )

    result = ScenarioResult(name=scenario.name, kind=scenario.kind, results=tuple(results))
    logger.info(f"scenario {scenario.name}: {'pass' if result.passed else 'fail'}")

    return result


def run_all(
    seed: Optional[int] = None,
    pattern: str = "*",
    directory: Optional[str] = None,
    scenarios: Optional[Sequence[Scenario]] = None,
) -> VerificationSummary:
    """
    Run the scenarios ordered by name.

    :param int seed: Overrides the seed of every scenario.
    :param str pattern: Glob pattern on the scenario names.
    :param str directory: Scenario directory. Defaults to the bundled scenarios.
    :param scenarios: Scenarios to run instead of the files of ``directory``.
    :return: Summary. An empty suite passes.
    """

    if scenarios is None:
        scenarios = load_scenarios(directory, pattern)
    else:
        scenarios = sorted(
            (s for s in scenarios if fnmatch.fnmatchcase(s.name, pattern)), key=lambda s: s.name
        )

    return VerificationSummary(results=tuple(run_scenario(s, seed) for s in scenarios))
