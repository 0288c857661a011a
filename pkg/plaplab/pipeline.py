"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum, unique
from typing import Final, Optional

import numpy as np

from ._logger import logger
from .config import ProblemConfig
from .discretization import DiscreteField, Mesh1D, assemble_energy
from .energy import BClass, EnergySpec, HypothesisVerdict, check_growth_a, classify_b
from .error import (
    MaxIterExceededError,
    NotCriticalError,
    PathCollapseError,
    PLapLabError,
    ResonantError,
    ShootingError,
    SingularHessianError,
    TableTooShortError,
)
from .morse import (
    CriticalGroupVerdict,
    MorseData,
    assemble_Q,
    classify_critical_groups,
    compute_morse,
    is_isolated_at_zero,
    morse_indices,
)
from .shooting import cross_check, scan_brackets, shoot_bvp
from .solver import (
    CriticalPointRecord,
    SolverConfig,
    mountain_pass,
    multistart_deflated,
    newton_solve,
    verify_residual,
)
from .spectrum import (
    DEFAULT_RESONANCE_TOL,
    Side,
    SpectrumTable,
    check_nonresonance,
    eigenvalue_between,
    locate_m_infinity,
)


NONTRIVIAL_THRESHOLD: Final = 1e-3
SHOOTING_TOLERANCE: Final = 1e-3
EXIT_CONFIG_ERROR: Final = 3

_MAX_TABLE_COUNT: Final = 1 << 20
_MAX_PASS_SCALE: Final = 1e6
_SHOOTING_NODES: Final = 4


@unique
class HypothesisClass(Enum):
    NONRESONANT = "nonresonant"
    RESONANT_B_MINUS = "resonantBminus"
    RESONANT_B_PLUS = "resonantBplus"
    NOT_APPLICABLE = "notApplicable"


@unique
class Verdict(Enum):
    NONTRIVIAL_FOUND = "nontrivialFound"
    HYPOTHESIS_FAILS = "hypothesisFails"
    SOLVER_FAILED = "solverFailed"

    @property
    def exit_code(self) -> int:
        return {
            Verdict.NONTRIVIAL_FOUND: 0,
            Verdict.HYPOTHESIS_FAILS: 1,
            Verdict.SOLVER_FAILED: 2,
        }[self]


@dataclass(frozen=True)
class AZReport:
    """
    Outcome of the existence check of a nontrivial solution.
    """

    config: ProblemConfig
    hypothesis_class: HypothesisClass
    verdict: Verdict
    lambda_infinity: Optional[float] = None
    slope_at_zero: Optional[float] = None
    resonant: Optional[bool] = None
    b_class: Optional[BClass] = None
    b_admissible: Optional[bool] = None
    tail_gap_sign: Optional[int] = None
    m_infinity: Optional[int] = None
    morse_at_zero: Optional[MorseData] = None
    critical_groups_at_zero: Optional[CriticalGroupVerdict] = None
    condition_holds: bool = False
    eigenvalue_between: Optional[bool] = None
    solutions: tuple[CriticalPointRecord, ...] = ()
    witness: Optional[int] = None
    shooting_agreement: Optional[bool] = None
    reason: Optional[str] = None
    spectrum_count: int = 0

    @property
    def exit_code(self) -> int:
        return self.verdict.exit_code

    @property
    def witness_record(self) -> Optional[CriticalPointRecord]:
        if self.witness is None:
            return None

        return self.solutions[self.witness]


def is_nontrivial(record: CriticalPointRecord, tol_residual: float) -> bool:
    return record.sup_norm > NONTRIVIAL_THRESHOLD and record.residual <= tol_residual


def ensure_bracketed(table: SpectrumTable, lambda_: float) -> SpectrumTable:
    """
    Extend the table until its last eigenvalue lies above ``lambda_``.
    """

    while lambda_ >= table.values[-1] * (1 - DEFAULT_RESONANCE_TOL):
        if table.count >= _MAX_TABLE_COUNT:
            raise TableTooShortError(f"lambda={lambda_} is beyond {_MAX_TABLE_COUNT} eigenvalues")
        table = table.extend(table.count * 2)
        logger.debug(f"spectrum table extended to {table.count} eigenvalues")

    return table


def _classify_resonant(
    spec: EnergySpec, table: SpectrumTable, lambda_: float, verdict: HypothesisVerdict
) -> tuple[HypothesisClass, Optional[int], HypothesisVerdict, Optional[str]]:
    verdict = classify_b(spec.nonlinearity, spec.p, spec.kappa, verdict)

    if verdict.b_class == BClass.B_PLUS:
        if not verdict.admissible:
            return (
                HypothesisClass.NOT_APPLICABLE,
                None,
                verdict,
                f"(b+) requires p <= 2 or kappa = 0: p={spec.p}, kappa={spec.kappa}",
            )
        m = locate_m_infinity(table, lambda_, Side.LEFT_CLOSED)
        return (HypothesisClass.RESONANT_B_PLUS, m, verdict, None)

    if verdict.b_class == BClass.B_MINUS:
        m = locate_m_infinity(table, lambda_, Side.RIGHT_CLOSED)
        return (HypothesisClass.RESONANT_B_MINUS, m, verdict, None)

    assert verdict.b_class
    return (
        HypothesisClass.NOT_APPLICABLE,
        None,
        verdict,
        f"resonant slope with b-class {verdict.b_class.value}",
    )


def _with_diagnostics(spec: EnergySpec, record: CriticalPointRecord) -> CriticalPointRecord:
    try:
        morse: Optional[MorseData] = compute_morse(spec, record.field)
    except PLapLabError as e:
        logger.debug(f"Morse data unavailable: {e}")
        morse = None

    return dataclasses.replace(
        record, morse=morse, shooting_distance=cross_check(spec, record.field)
    )


def agrees_with_shooting(record: CriticalPointRecord) -> Optional[bool]:
    """
    :return:
        |True| if the shooting solution near ``record`` is within
        ``SHOOTING_TOLERANCE`` in the sup norm, |None| if shooting found no solution nearby.
    """

    distance = record.shooting_distance
    if distance is None or not math.isfinite(distance):
        return None

    return distance <= SHOOTING_TOLERANCE


def _select_witness(
    spec: EnergySpec, records: list[CriticalPointRecord], witness: int, tol_residual: float
) -> Optional[int]:
    # independent re-verification of the candidates
    candidates = [
        i
        for i, record in enumerate(records)
        if is_nontrivial(record, tol_residual)
        and verify_residual(spec, record.field) <= tol_residual
    ]
    if not candidates:
        return None

    agreeing = [i for i in candidates if agrees_with_shooting(records[i]) is not False]
    for preferred in (agreeing, candidates):
        if witness in preferred:
            return witness
        if preferred:
            return preferred[0]

    return None


def _pass_end_point(spec: EnergySpec, mesh: Mesh1D) -> Optional[DiscreteField]:
    mode = DiscreteField.from_function(mesh, lambda x: np.sin(math.pi * x / spec.length))
    scale = 1.0

    while scale <= _MAX_PASS_SCALE:
        candidate = scale * mode
        if assemble_energy(spec, candidate) < 0:
            return candidate
        scale *= 2

    return None


def _mountain_pass_search(
    spec: EnergySpec, mesh: Mesh1D, cfg: SolverConfig
) -> Optional[CriticalPointRecord]:
    end_point = _pass_end_point(spec, mesh)
    if end_point is None:
        logger.debug("mountain pass: no end point below the energy of zero")
        return None

    try:
        return mountain_pass(spec, DiscreteField.zeros(mesh), end_point, cfg=cfg)
    except (PathCollapseError, MaxIterExceededError, SingularHessianError) as e:
        logger.debug(f"mountain pass failed: {e}")
        return None


def _shooting_search(
    spec: EnergySpec, mesh: Mesh1D, cfg: SolverConfig
) -> Optional[CriticalPointRecord]:
    for nodes in range(_SHOOTING_NODES):
        for bracket in scan_brackets(spec, nodes):
            try:
                solution = shoot_bvp(spec, bracket, nodes, mesh=mesh)
                record = newton_solve(spec, solution.field, cfg)
            except (ShootingError, MaxIterExceededError, SingularHessianError) as e:
                logger.debug(f"shooting search: nodes={nodes}, bracket={bracket}: {e}")
                continue

            if is_nontrivial(record, cfg.tol_residual):
                return dataclasses.replace(record, method="shooting")

    return None


def search_nontrivial(
    spec: EnergySpec, mesh: Mesh1D, cfg: SolverConfig
) -> tuple[list[CriticalPointRecord], Optional[int]]:
    """
    Look for a nontrivial critical point: deflated multistart, then a mountain pass
    from zero, then shooting.

    :return: The records found and the index of the first nontrivial one.
    """

    records = multistart_deflated(spec, mesh, cfg)
    witness = next(
        (i for i, record in enumerate(records) if is_nontrivial(record, cfg.tol_residual)), None
    )
    logger.info(f"multistart: {len(records)} critical point(s), witness={witness}")

    for finder in (_mountain_pass_search, _shooting_search):
        if witness is not None:
            break
        record = finder(spec, mesh, cfg)
        if record is not None and is_nontrivial(record, cfg.tol_residual):
            records.append(record)
            witness = len(records) - 1
            logger.info(f"{record.method}: nontrivial critical point found")

    return (records, witness)


def run_az_check(cfg: ProblemConfig) -> AZReport:
    """
    Check the existence of a nontrivial solution.

    The asymptotic slope is located in the eigenvalue sequence, the Morse indices of
    zero are computed, and if the position of the slope lies outside
    ``[m(f,0), m*(f,0)]`` the solvers look for a nontrivial witness.

    :param ProblemConfig cfg: Validated configuration.
    :return: Report. Failures are encoded in the verdict.
    """

    spec = cfg.energy_spec()
    solver_cfg = cfg.solver_config()
    mesh = cfg.mesh()
    report = AZReport(
        config=cfg,
        hypothesis_class=HypothesisClass.NOT_APPLICABLE,
        verdict=Verdict.HYPOTHESIS_FAILS,
    )

    growth = check_growth_a(spec.nonlinearity, spec.p)
    report = dataclasses.replace(report, slope_at_zero=growth.slope_at_zero)
    if growth.slope_at_infinity is None:
        logger.info("growth at infinity: inconclusive")
        return dataclasses.replace(report, reason="asymptotic slope does not exist")

    lambda_ = growth.slope_at_infinity
    table = ensure_bracketed(cfg.spectrum_table(), lambda_)
    resonant = not check_nonresonance(table, lambda_)
    report = dataclasses.replace(
        report, lambda_infinity=lambda_, resonant=resonant, spectrum_count=table.count
    )
    logger.info(f"asymptotic slope: lambda={lambda_:.12g}, resonant={resonant}")

    if resonant:
        hypothesis_class, m_infinity, growth, reason = _classify_resonant(
            spec, table, lambda_, growth
        )
    else:
        hypothesis_class = HypothesisClass.NONRESONANT
        reason = None
        try:
            m_infinity = locate_m_infinity(table, lambda_, Side.STRICT)
        except ResonantError as e:
            raise AssertionError(f"nonresonant slope located on the spectrum: {e}") from e
        if growth.b_class is None:
            growth = classify_b(spec.nonlinearity, spec.p, spec.kappa, growth)

    report = dataclasses.replace(
        report,
        hypothesis_class=hypothesis_class,
        m_infinity=m_infinity,
        b_class=growth.b_class,
        b_admissible=growth.admissible,
        tail_gap_sign=growth.tail_gap_sign,
    )
    if spec.p == 2:
        try:
            report = dataclasses.replace(
                report, eigenvalue_between=eigenvalue_between(table, lambda_, growth.slope_at_zero)
            )
        except TableTooShortError as e:
            logger.debug(f"eigenvalue between: {e}")

    if m_infinity is None:
        logger.info(f"hypothesis: {hypothesis_class.value}, {reason}")
        return dataclasses.replace(report, reason=reason)

    zero = DiscreteField.zeros(mesh)
    try:
        md = morse_indices(assemble_Q(spec, zero), spec)
    except NotCriticalError as e:
        return dataclasses.replace(
            report, hypothesis_class=HypothesisClass.NOT_APPLICABLE, reason=str(e)
        )

    isolated = is_isolated_at_zero(md)
    condition_holds = not md.contains(m_infinity)
    report = dataclasses.replace(
        report,
        morse_at_zero=md,
        critical_groups_at_zero=classify_critical_groups(md, isolated, True, spec),
        condition_holds=condition_holds,
    )
    logger.info(f"m_inf={m_infinity}, morse at zero={md}, condition holds={condition_holds}")

    if not condition_holds:
        return dataclasses.replace(
            report, reason=f"m_inf={m_infinity} lies in [m(f,0), m*(f,0)] = {md}"
        )

    records, witness = search_nontrivial(spec, mesh, solver_cfg)
    records = [
        _with_diagnostics(spec, record) if is_nontrivial(record, cfg.tol_residual) else record
        for record in records
    ]

    if witness is not None:
        witness = _select_witness(spec, records, witness, cfg.tol_residual)

    verdict = Verdict.NONTRIVIAL_FOUND if witness is not None else Verdict.SOLVER_FAILED
    agreement: Optional[bool] = None
    reason = "no nontrivial critical point was found"
    if witness is not None:
        agreement = agrees_with_shooting(records[witness])
        reason = None
        if agreement is False:
            reason = (
                "witness differs from the shooting solution by "
                f"{records[witness].shooting_distance:.3e} > {SHOOTING_TOLERANCE}"
            )
            logger.warning(reason)
    logger.info(f"verdict: {verdict.value}, shooting agreement={agreement}")

    return dataclasses.replace(
        report,
        verdict=verdict,
        solutions=tuple(records),
        witness=witness,
        shooting_agreement=agreement,
        reason=reason,
    )
