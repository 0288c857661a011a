"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import pytest
from pathvalidate import unprintable_ascii_chars
from pathvalidate.error import ErrorReason, ValidationError

from plaplab._validator import validate_config_key, validate_scenario_name


class Test_validate_config_key:
    @pytest.mark.parametrize(
        ["value"],
        [
            ["problem.p"],
            ["problem.kappa"],
            ["nonlinearity.lambda"],
            ["solver.tolResidual"],
            ["mesh.n"],
            ["reduction.r"],
            ["section.key_2"],
        ],
    )
    def test_normal(self, value):
        validate_config_key(value)

    @pytest.mark.parametrize(
        ["value", "expected"],
        [
            ["", ErrorReason.NULL_NAME],
            ["problem", ErrorReason.INVALID_CHARACTER],
            ["problem.", ErrorReason.INVALID_CHARACTER],
            [".p", ErrorReason.INVALID_CHARACTER],
            ["Problem.p", ErrorReason.INVALID_CHARACTER],
            ["problem.2p", ErrorReason.INVALID_CHARACTER],
            ["problem.p.q", ErrorReason.INVALID_CHARACTER],
            ["problem p", ErrorReason.INVALID_CHARACTER],
        ],
    )
    def test_exception(self, value, expected):
        with pytest.raises(ValidationError) as e:
            validate_config_key(value)

        assert e.value.reason == expected

    @pytest.mark.parametrize(
        ["value"], [[f"problem.{invalid_c}p"] for invalid_c in unprintable_ascii_chars]
    )
    def test_exception_unprintable(self, value):
        with pytest.raises(ValidationError) as e:
            validate_config_key(value)

        assert e.value.reason == ErrorReason.INVALID_CHARACTER


class Test_validate_scenario_name:
    @pytest.mark.parametrize(
        ["value"],
        [["nonres-p2"], ["strictmin-p1.5"], ["spectrum_cross"], ["A1"], ["0"]],
    )
    def test_normal(self, value):
        validate_scenario_name(value)

    @pytest.mark.parametrize(
        ["value"],
        [["-leading-dash"], [".hidden"], ["with space"], ["a/b"], ["テスト"]],
    )
    def test_exception(self, value):
        with pytest.raises(ValidationError):
            validate_scenario_name(value)

    def test_exception_null(self):
        with pytest.raises(ValidationError) as e:
            validate_scenario_name("")

        assert e.value.reason == ErrorReason.NULL_NAME
