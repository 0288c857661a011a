"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import datetime
import math
from collections.abc import Iterable, Sequence
from enum import Enum, unique
from typing import Any, Final, Optional, Union

from tabledata import TableData

from ._common import format_index, format_real
from ._table import build_table, dumps_csv
from .morse import CriticalGroupVerdict, MorseData
from .pipeline import AZReport
from .solver import CriticalPointRecord
from .spectrum import MODELING_NOTE


SOLUTION_HEADERS: Final = (
    "index",
    "method",
    "energy",
    "residual",
    "supNorm",
    "m",
    "mStar",
    "shootingDistance",
)


@unique
class ReportFormat(Enum):
    TEXT = "text"
    TABLE = "table"


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, MorseData):
        return str(value)

    return str(value)


def format_key_values(pairs: Iterable[tuple[str, Any]]) -> str:
    return "".join(f"{key}: {format_value(value)}\n" for key, value in pairs)


def timestamp_line() -> str:
    now = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0)
    return f"generated: {now.isoformat()}\n"


def morse_pairs(md: Optional[MorseData], prefix: str = "") -> list[tuple[str, Any]]:
    if md is None:
        return [(f"{prefix}morse", None)]

    return [
        (f"{prefix}m", format_index(md.m)),
        (f"{prefix}mStar", format_index(md.m_star)),
        (f"{prefix}kernelDim", format_index(md.kernel_dim)),
        (f"{prefix}regime", md.regime),
    ]


def critical_group_pairs(
    verdict: Optional[CriticalGroupVerdict], prefix: str = ""
) -> list[tuple[str, Any]]:
    if verdict is None:
        return []

    pairs: list[tuple[str, Any]] = [(f"{prefix}criticalGroupTags", ",".join(verdict.tags) or None)]
    for i, statement in enumerate(verdict.statements, 1):
        pairs.append(
            (
                f"{prefix}criticalGroup.{i}",
                f"{statement.conclusion} for {statement.degrees} [{statement.tag}]",
            )
        )
    if verdict.note:
        pairs.append((f"{prefix}criticalGroupNote", verdict.note))

    return pairs


def _record_pairs(
    index: int, record: CriticalPointRecord, is_witness: bool
) -> list[tuple[str, Any]]:
    prefix = f"solution.{index}."
    pairs: list[tuple[str, Any]] = [
        (f"{prefix}method", record.method),
        (f"{prefix}energy", record.energy),
        (f"{prefix}residual", record.residual),
        (f"{prefix}supNorm", record.sup_norm),
        (f"{prefix}iterations", record.iterations),
        (f"{prefix}witness", is_witness),
    ]
    if record.morse is not None:
        pairs.extend(morse_pairs(record.morse, prefix))
    if record.shooting_distance is not None:
        pairs.append((f"{prefix}shootingDistance", record.shooting_distance))

    return pairs


def _interval(md: Optional[MorseData]) -> Optional[str]:
    if md is None:
        return None

    return f"[{format_index(md.m)}, {format_index(md.m_star)}]"


def report_pairs(report: AZReport) -> list[tuple[str, Any]]:
    cfg = report.config
    pairs: list[tuple[str, Any]] = [
        ("verdict", report.verdict),
        ("exitCode", report.exit_code),
        ("hypothesisClass", report.hypothesis_class),
        ("reason", report.reason),
        ("p", cfg.p),
        ("kappa", cfg.kappa),
        ("length", cfg.length),
        ("mesh.n", cfg.n),
        ("nonlinearity", cfg.family),
        ("seed", cfg.seed),
        ("lambdaInfinity", report.lambda_infinity),
        ("slopeAtZero", report.slope_at_zero),
        ("resonant", report.resonant),
        ("bClass", report.b_class),
        ("bAdmissible", report.b_admissible),
        ("tailGapSign", report.tail_gap_sign),
        ("spectrumCount", report.spectrum_count),
        ("mInfinity", report.m_infinity),
        ("morseAtZero", report.morse_at_zero),
        ("interval", _interval(report.morse_at_zero)),
        ("conditionHolds", report.condition_holds),
        ("eigenvalueBetween", report.eigenvalue_between),
    ]
    pairs.extend(critical_group_pairs(report.critical_groups_at_zero, "zero."))
    pairs.append(("solutions", len(report.solutions)))
    pairs.append(("witness", None if report.witness is None else report.witness + 1))
    pairs.append(("shootingAgreement", report.shooting_agreement))

    for i, record in enumerate(report.solutions, 1):
        pairs.extend(_record_pairs(i, record, report.witness == i - 1))

    pairs.append(("note", MODELING_NOTE))

    return pairs


def solutions_tabledata(solutions: Sequence[CriticalPointRecord]) -> TableData:
    rows = []
    for i, record in enumerate(solutions, 1):
        md = record.morse
        rows.append(
            [
                i,
                record.method,
                format_real(record.energy),
                format_real(record.residual),
                format_real(record.sup_norm),
                format_index(md.m) if md else "",
                format_index(md.m_star) if md else "",
                format_real(record.shooting_distance)
                if record.shooting_distance is not None
                and math.isfinite(record.shooting_distance)
                else "",
            ]
        )

    return build_table("solutions", SOLUTION_HEADERS, rows)


def emit_report(
    report: AZReport,
    format_name: Union[ReportFormat, str] = ReportFormat.TEXT,
    timestamps: bool = False,
) -> bytes:
    """
    Render a report.

    :param AZReport report: Report to render.
    :param format_name:
        ``text``: ``key: value`` lines.
        ``table``: comma separated summary of the solutions.
    :param bool timestamps: Add a generation time line to the text output.
    :return: UTF-8 encoded output. Identical reports give identical bytes
        unless ``timestamps`` is set.
    """

    format_name = ReportFormat(format_name)

    if format_name == ReportFormat.TABLE:
        return dumps_csv(solutions_tabledata(report.solutions)).encode("utf-8")

    text = format_key_values(report_pairs(report))
    if timestamps:
        text = timestamp_line() + text

    return text.encode("utf-8")
