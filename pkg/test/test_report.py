"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import numpy as np
import pytest

from plaplab import (
    AZReport,
    CriticalPointRecord,
    DiscreteField,
    HypothesisClass,
    MorseData,
    Verdict,
    build_mesh,
    emit_report,
    parse_config_text,
)
from plaplab.morse import Regime
from plaplab.report import (
    SOLUTION_HEADERS,
    critical_group_pairs,
    format_key_values,
    format_value,
    morse_pairs,
    solutions_tabledata,
    timestamp_line,
)
from plaplab.spectrum import MODELING_NOTE

from ._common import parse_key_values, print_test_result
from .fixture import LINEAR_CONFIG


def make_report(with_solution=True):
    solutions = ()
    witness = None
    if with_solution:
        field = DiscreteField(build_mesh(1.0, 3), np.array([0.5, 1.0, 0.5]))
        solutions = (
            CriticalPointRecord(
                field,
                energy=-1.25,
                residual=1e-12,
                iterations=4,
                method="newton",
                morse=MorseData(1, 1, 0, Regime.KAPPA_POSITIVE),
                shooting_distance=2e-4,
            ),
        )
        witness = 0

    return AZReport(
        config=parse_config_text(LINEAR_CONFIG),
        hypothesis_class=HypothesisClass.NONRESONANT,
        verdict=Verdict.NONTRIVIAL_FOUND if with_solution else Verdict.HYPOTHESIS_FAILS,
        lambda_infinity=5.0,
        m_infinity=0,
        morse_at_zero=MorseData(0, 0, 0, Regime.KAPPA_POSITIVE),
        solutions=solutions,
        witness=witness,
        shooting_agreement=True if with_solution else None,
    )


class Test_format_value:
    @pytest.mark.parametrize(
        ["value", "expected"],
        [
            [None, "none"],
            [True, "true"],
            [False, "false"],
            [Verdict.SOLVER_FAILED, "solverFailed"],
            [0.1, "0.1"],
            [math.inf, "inf"],
            [-math.inf, "-inf"],
            [2, "2"],
            [MorseData(1, math.inf, math.inf, Regime.KAPPA_ZERO_SUPERQUADRATIC), "(1, inf)"],
            ["abc", "abc"],
        ],
    )
    def test_normal(self, value, expected):
        assert format_value(value) == expected


class Test_format_key_values:
    def test_normal(self):
        assert format_key_values([("a", 1), ("b", None), ("c", True)]) == (
            "a: 1\nb: none\nc: true\n"
        )


class Test_morse_pairs:
    def test_normal(self):
        assert morse_pairs(MorseData(2, 3, 1, Regime.KAPPA_POSITIVE), "x.") == [
            ("x.m", "2"),
            ("x.mStar", "3"),
            ("x.kernelDim", "1"),
            ("x.regime", Regime.KAPPA_POSITIVE),
        ]

    def test_normal_none(self):
        assert morse_pairs(None) == [("morse", None)]
        assert critical_group_pairs(None) == []


class Test_timestamp_line:
    def test_normal(self):
        assert timestamp_line().startswith("generated: ")


class Test_solutions_tabledata:
    def test_normal(self):
        table = solutions_tabledata(make_report().solutions)

        assert tuple(table.headers) == SOLUTION_HEADERS
        assert table.num_rows == 1

    def test_normal_empty(self):
        assert solutions_tabledata(()).num_rows == 0


class Test_emit_report:
    def test_normal_text(self):
        output = emit_report(make_report())
        pairs = parse_key_values(output)
        expected = {
            "verdict": "nontrivialFound",
            "exitCode": "0",
            "mInfinity": "0",
            "interval": "[0, 0]",
            "witness": "1",
            "shootingAgreement": "true",
            "solution.1.method": "newton",
            "solution.1.m": "1",
            "solution.1.witness": "true",
            "note": MODELING_NOTE,
        }
        print_test_result(expected, output.decode("utf-8"))

        assert output.decode("utf-8").startswith("verdict: nontrivialFound\n")
        assert {key: pairs[key] for key in expected} == expected

    def test_normal_no_solution(self):
        lines = emit_report(make_report(with_solution=False), "text").decode("utf-8").splitlines()

        assert "verdict: hypothesisFails" in lines
        assert "solutions: 0" in lines
        assert "witness: none" in lines
        assert "shootingAgreement: none" in lines

    def test_normal_deterministic(self):
        assert emit_report(make_report()) == emit_report(make_report())

    def test_normal_timestamps(self):
        output = emit_report(make_report(), timestamps=True).decode("utf-8")

        assert output.startswith("generated: ")
        assert output.splitlines()[1] == "verdict: nontrivialFound"

    def test_normal_table(self):
        lines = emit_report(make_report(), "table").decode("utf-8").strip().splitlines()

        assert len(lines) == 2
        for header in SOLUTION_HEADERS:
            assert header in lines[0]
        assert "newton" in lines[1]

    def test_exception(self):
        with pytest.raises(ValueError):
            emit_report(make_report(), "json")
