"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import argparse
import math
import os.path
import sys
from collections.abc import Sequence
from typing import Any, Final, Optional

import numpy as np
from tabledata import TableData

from .__version__ import __version__
from ._logger import logger, set_logger
from ._table import build_table, dumps_csv, write_csv, write_text
from .config import ProblemConfig, parse_config
from .discretization import DiscreteField
from .error import BadConfigError, PLapLabError
from .morse import classify_critical_groups, compute_morse, is_isolated_at_zero
from .pipeline import EXIT_CONFIG_ERROR, run_az_check
from .reduction import build_decomposition, classify_origin, sample_polar_grid, with_halving
from .report import (
    critical_group_pairs,
    emit_report,
    format_key_values,
    morse_pairs,
    solutions_tabledata,
    timestamp_line,
)
from .shooting import cross_check, shoot_eigenvalue
from .solver import multistart_deflated
from .spectrum import MODELING_NOTE, build_spectrum_table, eigenvalue_1d
from .verification import run_all


EXIT_SOLVER_ERROR: Final = 2
ORACLE_HEADERS: Final = ("m", "closedForm", "shooting", "relativeError")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="problem configuration file (section.key = value)")
    common.add_argument("--out", help="directory to write the output files to")
    common.add_argument("--seed", type=int, help="override the seed of the configuration")
    common.add_argument(
        "--format", choices=("text", "table"), default="text", help="output format (default: text)"
    )
    common.add_argument(
        "--timestamps", action="store_true", help="add a generation time line to text output"
    )
    common.add_argument("--verbose", action="store_true", help="enable logging")

    parser = argparse.ArgumentParser(
        prog="plaplab",
        description="Numerical checks for asymptotically linear p-Laplacian problems",
    )
    parser.add_argument("-V", "--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    spectrum = subparsers.add_parser("spectrum", parents=[common], help="eigenvalue table")
    spectrum.add_argument("--count", type=int, help="number of eigenvalues")

    subparsers.add_parser("solve", parents=[common], help="deflated multistart solutions")

    morse = subparsers.add_parser("morse", parents=[common], help="Morse data of a field")
    morse.add_argument("--field", help="x,u table of a critical point (default: zero)")
    morse.add_argument(
        "--isolated", action="store_true", help="treat the critical point as isolated"
    )

    reduce = subparsers.add_parser("reduce", parents=[common], help="reduced functional samples")
    reduce.add_argument("--field", help="x,u table of a critical point (default: zero)")

    subparsers.add_parser("az-check", parents=[common], help="nontrivial solution check")

    oracle = subparsers.add_parser("oracle", parents=[common], help="shooting cross-checks")
    oracle.add_argument("--field", help="x,u table to re-solve by shooting")
    oracle.add_argument("--modes", type=int, default=3, help="eigenvalues to compare (default: 3)")

    verify = subparsers.add_parser("verify", parents=[common], help="run the scenario suite")
    verify.add_argument("--filter", default="*", help="glob pattern on scenario names")
    verify.add_argument("--scenario-dir", help="directory of .scenario files")

    return parser


class _Output:
    def __init__(self, args: argparse.Namespace) -> None:
        self.__out_dir: Optional[str] = args.out
        self.__timestamps: bool = args.timestamps

    def text(self, name: str, text: str) -> None:
        if self.__timestamps:
            text = timestamp_line() + text

        sys.stdout.write(text)
        if self.__out_dir:
            write_text(os.path.join(self.__out_dir, name), text)

    def table_file(self, name: str, table_data: TableData) -> None:
        if self.__out_dir:
            write_csv(os.path.join(self.__out_dir, name), table_data)


def _load_config(args: argparse.Namespace) -> ProblemConfig:
    if not args.config:
        raise BadConfigError("--config is required for this command")

    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)

    return cfg


def _load_field(args: argparse.Namespace, cfg: ProblemConfig) -> DiscreteField:
    if not args.field:
        return DiscreteField.zeros(cfg.mesh())

    field = DiscreteField.load(args.field)
    if not math.isclose(field.mesh.length, cfg.length, rel_tol=1e-12):
        raise BadConfigError(
            f"field length {field.mesh.length} differs from domain.length {cfg.length}"
        )

    return field


def _spectrum(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)
    table = cfg.spectrum_table()
    if args.count:
        table = build_spectrum_table(cfg.p, cfg.length, args.count)

    text = dumps_csv(table.as_tabledata())
    if args.format == "text":
        text += f"note: {MODELING_NOTE}\n"
    out.text("spectrum.txt", text)
    out.table_file("spectrum.csv", table.as_tabledata())

    return 0


def _solve(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)
    records = multistart_deflated(cfg.energy_spec(), cfg.mesh(), cfg.solver_config())
    table = solutions_tabledata(records)

    if args.format == "table":
        out.text("solutions.txt", dumps_csv(table))
    else:
        pairs: list[tuple[str, Any]] = [("solutions", len(records))]
        for i, record in enumerate(records, 1):
            pairs.extend(
                [
                    (f"solution.{i}.method", record.method),
                    (f"solution.{i}.energy", record.energy),
                    (f"solution.{i}.residual", record.residual),
                    (f"solution.{i}.supNorm", record.sup_norm),
                ]
            )
        out.text("solutions.txt", format_key_values(pairs))

    out.table_file("solutions.csv", table)
    for i, record in enumerate(records, 1):
        out.table_file(f"solution_{i}.csv", record.field.as_tabledata())

    return 0


def _morse(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)
    spec = cfg.energy_spec()
    field = _load_field(args, cfg)
    is_zero = field.sup_norm() == 0

    md = compute_morse(spec, field)
    isolated = args.isolated or (is_zero and is_isolated_at_zero(md))
    verdict = classify_critical_groups(md, isolated, is_zero, spec)

    pairs: list[tuple[str, Any]] = [("morse", md)]
    pairs += morse_pairs(md) + critical_group_pairs(verdict)
    out.text("morse.txt", format_key_values(pairs))

    return 0


def _reduce(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)
    spec = cfg.energy_spec()
    solver_cfg = cfg.solver_config()
    field = _load_field(args, cfg)

    md = compute_morse(spec, field)
    dec = build_decomposition(spec, field, md, rho=cfg.rho, r=cfg.r)
    grid, dec = with_halving(dec, lambda d: sample_polar_grid(spec, field, d, cfg=solver_cfg))
    origin = classify_origin(grid)

    text = dumps_csv(grid.as_tabledata())
    text += format_key_values(
        [("dimV", dec.dim_v), ("rho", dec.rho), ("classification", origin)]
    )
    out.text("reduced.txt", text)
    out.table_file("reduced.csv", grid.as_tabledata())

    return 0


def _az_check(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)
    report = run_az_check(cfg)

    output = emit_report(report, args.format).decode("utf-8")
    out.text("report.txt" if args.format == "text" else "report.csv", output)
    out.table_file("solutions.csv", solutions_tabledata(report.solutions))

    witness = report.witness_record
    if witness is not None:
        out.table_file("witness.csv", witness.field.as_tabledata())

    return report.exit_code


def _oracle(args: argparse.Namespace, out: _Output) -> int:
    cfg = _load_config(args)

    if args.field:
        field = _load_field(args, cfg)
        distance = cross_check(cfg.energy_spec(), field)
        out.text("oracle.txt", format_key_values([("shootingDistance", distance)]))
        return 0 if math.isfinite(distance) else EXIT_SOLVER_ERROR

    rows = []
    for m in range(1, args.modes + 1):
        closed = eigenvalue_1d(cfg.p, cfg.length, m)
        shot = shoot_eigenvalue(cfg.p, cfg.length, m)
        rows.append([m, closed, shot, abs(shot - closed) / closed])
    table = build_table("oracle", ORACLE_HEADERS, rows)

    out.text("oracle.txt", dumps_csv(table))
    out.table_file("oracle.csv", table)

    return 0 if float(np.max([row[3] for row in rows], initial=0.0)) <= 1e-6 else 1


def _verify(args: argparse.Namespace, out: _Output) -> int:
    summary = run_all(seed=args.seed, pattern=args.filter, directory=args.scenario_dir)
    table = summary.as_tabledata()

    text = dumps_csv(table)
    if args.format == "text":
        text += format_key_values(
            [("scenarios", len(summary.results)), ("passed", summary.passed)]
        )
    out.text("verification.txt", text)
    out.table_file("verification.csv", table)

    return summary.exit_code


_COMMANDS: Final = {
    "spectrum": _spectrum,
    "solve": _solve,
    "morse": _morse,
    "reduce": _reduce,
    "az-check": _az_check,
    "oracle": _oracle,
    "verify": _verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    set_logger(args.verbose)

    try:
        return _COMMANDS[args.command](args, _Output(args))
    except BadConfigError as e:
        sys.stderr.write(f"configuration error: {e}\n")
        return EXIT_CONFIG_ERROR
    except PLapLabError as e:
        logger.debug(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SOLVER_ERROR
