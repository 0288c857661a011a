"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import numpy as np
import pytest

from plaplab import (
    DiscreteField,
    Family,
    MorseData,
    NotCriticalError,
    PrincipalPart,
    assemble_Q,
    build_mesh,
    classify_critical_groups,
    compute_morse,
    morse_indices,
)
from plaplab.morse import (
    NO_STATEMENT,
    Regime,
    closed_form_count_at_zero,
    constrained_prolongation,
    find_degenerate_set,
    regime_of,
)

from .fixture import mesh, power_spec, rational_spec, spec_nonres  # noqa: W0611


class Test_regime_of:
    @pytest.mark.parametrize(
        ["p", "kappa", "expected"],
        [
            [2, 0, Regime.KAPPA_POSITIVE],
            [3, 0.1, Regime.KAPPA_POSITIVE],
            [1.5, 1, Regime.KAPPA_POSITIVE],
            [1.5, 0, Regime.KAPPA_ZERO_SUBQUADRATIC],
            [3, 0, Regime.KAPPA_ZERO_SUPERQUADRATIC],
        ],
    )
    def test_normal(self, p, kappa, expected):
        assert regime_of(PrincipalPart(p, kappa)) == expected


class Test_MorseData:
    @pytest.mark.parametrize(
        ["value", "expected"],
        [
            [MorseData(0, 0, 0, Regime.KAPPA_POSITIVE), "(0, 0)"],
            [MorseData(1, 3, 2, Regime.KAPPA_POSITIVE), "(1, 3)"],
            [MorseData(0, math.inf, math.inf, Regime.KAPPA_ZERO_SUPERQUADRATIC), "(0, inf)"],
            [MorseData(math.inf, math.inf, 0, Regime.KAPPA_ZERO_SUPERQUADRATIC), "(inf, inf)"],
        ],
    )
    def test_normal_str(self, value, expected):
        assert str(value) == expected

    def test_normal_contains(self):
        md = MorseData(1, 3, 2, Regime.KAPPA_POSITIVE)

        assert [md.contains(i) for i in range(5)] == [False, True, True, True, False]
        assert md.is_finite
        assert not MorseData(0, math.inf, math.inf, Regime.KAPPA_POSITIVE).is_finite

    def test_exception(self):
        with pytest.raises(ValueError):
            MorseData(2, 1, 0, Regime.KAPPA_POSITIVE)


class Test_find_degenerate_set:
    def test_normal(self):
        mesh = build_mesh(1.0, 7)
        u = DiscreteField(mesh, [1, 2, 2, 2, 1, 0.5, 0.2])
        degenerate_set = find_degenerate_set(u)

        assert degenerate_set.elements == (2, 3)
        assert degenerate_set.element_count == 8
        assert not degenerate_set.is_empty
        assert not degenerate_set.is_full

    def test_normal_zero(self, mesh):
        degenerate_set = find_degenerate_set(DiscreteField.zeros(mesh))

        assert degenerate_set.is_full


class Test_constrained_prolongation:
    def test_normal(self):
        mesh = build_mesh(1.0, 7)
        u = DiscreteField(mesh, [1, 2, 2, 2, 1, 0.5, 0.2])
        prolongation = constrained_prolongation(7, find_degenerate_set(u))

        assert prolongation.shape == (7, 5)
        np.testing.assert_array_equal(np.sum(prolongation, axis=1), np.ones(7))
        np.testing.assert_array_equal(prolongation[1], prolongation[2])
        np.testing.assert_array_equal(prolongation[2], prolongation[3])

    def test_normal_full(self, mesh):
        prolongation = constrained_prolongation(
            mesh.n, find_degenerate_set(DiscreteField.zeros(mesh))
        )

        assert prolongation.shape == (mesh.n, 0)


class Test_assemble_Q:
    def test_normal(self, mesh, spec_nonres):
        q_at = assemble_Q(spec_nonres, DiscreteField.zeros(mesh))

        assert q_at.regime == Regime.KAPPA_POSITIVE
        assert q_at.prolongation is None
        assert q_at.quadratic.dim == mesh.n

    def test_normal_morse_indices(self, mesh, spec_nonres):
        zero = DiscreteField.zeros(mesh)
        md = morse_indices(assemble_Q(spec_nonres, zero), spec_nonres)

        assert md == compute_morse(spec_nonres, zero)
        assert (md.m, md.m_star, md.kernel_dim) == (0, 0, 0)

    def test_normal_subquadratic(self, mesh):
        spec = power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2)
        q_at = assemble_Q(spec, DiscreteField.zeros(mesh))

        assert q_at.regime == Regime.KAPPA_ZERO_SUBQUADRATIC
        assert q_at.quadratic.dim == 0

    def test_exception(self, mesh, spec_nonres):
        u = DiscreteField.from_function(mesh, lambda x: np.sin(np.pi * x))

        with pytest.raises(NotCriticalError):
            assemble_Q(spec_nonres, u)


class Test_compute_morse:
    @pytest.mark.parametrize(
        ["spec", "expected"],
        [
            [rational_spec(50, -45), (0, 0, 0)],
            [rational_spec(math.pi**2, 35), (2, 2, 0)],
            [rational_spec(5, 45), (2, 2, 0)],
            [rational_spec(5, 90), (3, 3, 0)],
            [power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2), (0, 0, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, 1, 2), (math.inf, math.inf, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, -1, 2), (0, 0, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, 0, 2), (0, math.inf, math.inf)],
        ],
    )
    def test_normal_zero(self, mesh, spec, expected):
        md = compute_morse(spec, DiscreteField.zeros(mesh))

        assert (md.m, md.m_star, md.kernel_dim) == expected
        assert md.regime == regime_of(spec.principal)


class Test_closed_form_count_at_zero:
    @pytest.mark.parametrize(
        ["spec", "expected"],
        [
            [rational_spec(50, -45), (0, 0)],
            [rational_spec(20, 0), (1, 0)],
            [rational_spec(5, 45), (2, 0)],
            [rational_spec(5, 90), (3, 0)],
            [power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2), (0, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, 1, 2), (math.inf, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, -1, 2), (0, 0)],
            [power_spec(Family.PURE_POWER, 3, 0, 10, 0, 2), (0, math.inf)],
        ],
    )
    def test_normal(self, spec, expected):
        assert tuple(closed_form_count_at_zero(spec)) == expected

    @pytest.mark.parametrize(
        "spec",
        [rational_spec(50, -45), rational_spec(20, 0), rational_spec(5, 45), rational_spec(5, 90)],
    )
    def test_normal_agrees_with_inertia(self, mesh, spec):
        count = closed_form_count_at_zero(spec)
        md = compute_morse(spec, DiscreteField.zeros(mesh))

        assert (md.m, md.kernel_dim) == (count.below, count.at)


class Test_classify_critical_groups:
    def test_normal_nondegenerate(self, spec_nonres):
        md = MorseData(2, 2, 0, Regime.KAPPA_POSITIVE)
        verdict = classify_critical_groups(md, False, True, spec_nonres)

        assert verdict.applies
        assert verdict.tags == ("nondegenerate",)
        assert [s.degrees for s in verdict.statements] == ["q = 2", "q != 2"]
        assert [s.conclusion for s in verdict.statements] == ["C_q = G", "C_q = 0"]

    def test_normal_window(self, spec_nonres):
        md = MorseData(1, 2, 1, Regime.KAPPA_POSITIVE)
        verdict = classify_critical_groups(md, False, False, spec_nonres)

        assert verdict.tags == ("index-window",)
        assert [s.degrees for s in verdict.statements] == ["q < 1", "q > 2"]

    def test_normal_isolated(self, spec_nonres):
        md = MorseData(1, 2, 1, Regime.KAPPA_POSITIVE)
        verdict = classify_critical_groups(md, True, False, spec_nonres)

        assert verdict.tags == (
            "index-window",
            "isolated-trichotomy-a",
            "isolated-trichotomy-b",
            "isolated-trichotomy-c",
        )
        assert verdict.note is not None

    def test_normal_strict_minimum(self):
        spec = power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2)
        md = MorseData(0, 0, 0, Regime.KAPPA_ZERO_SUBQUADRATIC)
        verdict = classify_critical_groups(md, False, True, spec)

        assert verdict.tags == ("strict-minimum-at-zero",)
        assert verdict.statements[0].degrees == "q = 0"

    def test_normal_subquadratic_nonzero(self):
        spec = power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2)
        md = MorseData(1, 2, 1, Regime.KAPPA_ZERO_SUBQUADRATIC)
        verdict = classify_critical_groups(md, False, False, spec)

        assert verdict.tags == ("above-large-index",)
        assert [s.degrees for s in verdict.statements] == ["q > 2"]

    def test_normal_autonomous_zero(self):
        spec = power_spec(Family.PURE_POWER, 3, 0, 10, -1, 2)
        md = MorseData(0, 0, 0, Regime.KAPPA_ZERO_SUPERQUADRATIC)
        verdict = classify_critical_groups(md, True, True, spec)

        assert verdict.tags == ("autonomous-zero",)
        assert [s.degrees for s in verdict.statements] == ["q > 0"]

    @pytest.mark.parametrize(
        ["md", "isolated"],
        [
            [MorseData(0, math.inf, math.inf, Regime.KAPPA_ZERO_SUPERQUADRATIC), True],
            [MorseData(0, 0, 0, Regime.KAPPA_ZERO_SUPERQUADRATIC), False],
        ],
    )
    def test_normal_no_statement(self, md, isolated):
        spec = power_spec(Family.PURE_POWER, 3, 0, 10, 1, 2)
        verdict = classify_critical_groups(md, isolated, True, spec)

        assert not verdict.applies
        assert verdict.note == NO_STATEMENT

    def test_exception(self, spec_nonres):
        md = MorseData(0, 0, 0, Regime.KAPPA_ZERO_SUPERQUADRATIC)

        with pytest.raises(ValueError):
            classify_critical_groups(md, True, True, spec_nonres)
