"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import numpy as np
import pytest

from plaplab import (
    AssembledQuadratic,
    BadConfigError,
    FactorizationBreakdownError,
    ResonantError,
    TableTooShortError,
    build_mesh,
    build_spectrum_table,
    check_nonresonance,
    eigenvalue_1d,
    inertia_of,
    locate_m_infinity,
    lowest_eigenpairs,
    pi_p,
)
from plaplab.discretization import mass_matrix, stiffness_matrix
from plaplab.spectrum import (
    Side,
    count_eigenvalues_below,
    eigenvalue_between,
    generalized_eigh,
    generalized_inertia,
)


class Test_pi_p:
    @pytest.mark.parametrize(
        ["value", "expected"],
        [[2, math.pi], [4, math.pi / math.sqrt(2)], [1.5, 8 * math.pi / (3 * math.sqrt(3))]],
    )
    def test_normal(self, value, expected):
        assert pi_p(value) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize(["value"], [[1], [0.5], [math.nan]])
    def test_exception(self, value):
        with pytest.raises(BadConfigError):
            pi_p(value)


class Test_eigenvalue_1d:
    @pytest.mark.parametrize(["m"], [[1], [2], [3], [10]])
    def test_normal_laplacian(self, m):
        assert eigenvalue_1d(2, 1, m) == pytest.approx((m * math.pi) ** 2, rel=1e-14)

    @pytest.mark.parametrize(
        ["p", "L", "m"], [[1.5, 1, 1], [3, 2, 1], [3, 2, 4], [4, 0.5, 2]]
    )
    def test_normal_scaling(self, p, L, m):
        expected = eigenvalue_1d(p, 1, 1) * (m / L) ** p

        assert eigenvalue_1d(p, L, m) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize(["p", "L", "m"], [[1, 1, 1], [2, 0, 1], [2, -1, 1], [2, 1, 0]])
    def test_exception(self, p, L, m):
        with pytest.raises(BadConfigError):
            eigenvalue_1d(p, L, m)


class Test_SpectrumTable:
    def test_normal(self):
        table = build_spectrum_table(2, 1, 4)

        assert table.count == 4
        assert table.value(0) == -math.inf
        assert table.value(2) == pytest.approx(4 * math.pi**2)
        assert table.extend(2) is table
        assert table.extend(6).count == 6

        table_data = table.as_tabledata()
        assert list(table_data.headers) == ["m", "lambda_m"]
        assert len(table_data.rows) == 4

    @pytest.mark.parametrize(["m"], [[-1], [5]])
    def test_exception_index(self, m):
        with pytest.raises(TableTooShortError):
            build_spectrum_table(2, 1, 4).value(m)

    def test_exception_count(self):
        with pytest.raises(BadConfigError):
            build_spectrum_table(2, 1, 0)


class Test_locate_m_infinity:
    @pytest.mark.parametrize(
        ["lambda_", "side", "expected"],
        [
            [5.0, Side.STRICT, 0],
            [50.0, Side.STRICT, 2],
            [50.0, "leftClosed", 2],
            [math.pi**2, Side.LEFT_CLOSED, 1],
            [math.pi**2, Side.RIGHT_CLOSED, 0],
            [4 * math.pi**2, "rightClosed", 1],
            [-10.0, Side.STRICT, 0],
        ],
    )
    def test_normal(self, lambda_, side, expected):
        assert locate_m_infinity(build_spectrum_table(2, 1, 8), lambda_, side) == expected

    def test_exception_resonant(self):
        with pytest.raises(ResonantError):
            locate_m_infinity(build_spectrum_table(2, 1, 8), 9 * math.pi**2)

    @pytest.mark.parametrize(["lambda_"], [[1000.0], [9 * math.pi**2]])
    def test_exception_short(self, lambda_):
        with pytest.raises(TableTooShortError):
            locate_m_infinity(build_spectrum_table(2, 1, 3), lambda_, Side.LEFT_CLOSED)


class Test_check_nonresonance:
    @pytest.mark.parametrize(
        ["lambda_", "expected"],
        [[50.0, True], [math.pi**2, False], [math.pi**2 * (1 + 1e-6), True], [5.0, True]],
    )
    def test_normal(self, lambda_, expected):
        assert check_nonresonance(build_spectrum_table(2, 1, 8), lambda_) == expected


class Test_eigenvalue_between:
    @pytest.mark.parametrize(
        ["a", "b", "expected"],
        [[5, 50, True], [50, 5, True], [40, 50, False], [5, 9, False], [math.pi**2, 20, True]],
    )
    def test_normal(self, a, b, expected):
        assert eigenvalue_between(build_spectrum_table(2, 1, 8), a, b) == expected

    def test_exception(self):
        with pytest.raises(TableTooShortError):
            eigenvalue_between(build_spectrum_table(2, 1, 2), 40, 50)


class Test_count_eigenvalues_below:
    @pytest.mark.parametrize(
        ["p", "kappa", "level", "expected"],
        [
            [2, 0, 50, (2, 0)],
            [2, 0, 4 * math.pi**2, (1, 1)],
            [2, 0, 5, (0, 0)],
            [2, 0, -3, (0, 0)],
            [3, 0, 50, (math.inf, 0)],
            [3, 0, 0, (0, math.inf)],
            [3, 0, -1, (0, 0)],
            [1.5, 0, 5, (0, 0)],
            [1.5, 0, -5, (0, 0)],
            [2, 0, math.inf, (math.inf, 0)],
            [3, 2, 2 * math.pi**2, (0, 1)],
            [3, 2, 50, (1, 0)],
        ],
    )
    def test_normal(self, p, kappa, level, expected):
        assert tuple(count_eigenvalues_below(p, 1, kappa, level)) == expected


class Test_inertia_of:
    @pytest.mark.parametrize(
        ["value", "expected"],
        [
            [np.diag([-1.0, 0.0, 2.0]), (1, 1, 1)],
            [np.diag([3.0, 2.0]), (0, 0, 2)],
            [np.array([[0.0, 1.0], [1.0, 0.0]]), (1, 0, 1)],
            [np.zeros((0, 0)), (0, 0, 0)],
        ],
    )
    def test_normal(self, value, expected):
        assert tuple(inertia_of(value)) == expected

    def test_normal_laplacian(self):
        mesh = build_mesh(1.0, 31)
        form = stiffness_matrix(mesh) - 50 * mass_matrix(mesh)

        assert tuple(inertia_of(form)) == (2, 0, 29)

    def test_normal_generalized(self):
        mesh = build_mesh(1.0, 31)
        q = AssembledQuadratic(stiffness_matrix(mesh), 50 * mass_matrix(mesh), mesh)

        assert tuple(generalized_inertia(q)) == (2, 0, 29)

    def test_exception(self):
        with pytest.raises(FactorizationBreakdownError):
            inertia_of(np.diag([1.0, 1.5e-10]))


class Test_generalized_eigh:
    def test_normal(self):
        values, vectors = generalized_eigh(np.diag([3.0, 1.0, 2.0]), np.eye(3), 2)

        np.testing.assert_allclose(values, [1.0, 2.0])
        np.testing.assert_allclose(np.abs(vectors[:, 0]), [0, 1, 0], atol=1e-14)
        assert vectors[1, 0] > 0

    def test_normal_zero(self):
        values, vectors = generalized_eigh(np.eye(3), np.eye(3), 0)

        assert values.shape == (0,)
        assert vectors.shape == (3, 0)

    @pytest.mark.parametrize(["k"], [[-1], [4]])
    def test_exception(self, k):
        with pytest.raises(ValueError):
            generalized_eigh(np.eye(3), np.eye(3), k)


class Test_lowest_eigenpairs:
    def test_normal(self):
        mesh = build_mesh(1.0, 31)
        k = stiffness_matrix(mesh)
        b = mass_matrix(mesh)
        pairs = lowest_eigenpairs(AssembledQuadratic(k, np.zeros_like(k), mesh), 3)

        for m, pair in enumerate(pairs, 1):
            assert pair.value == pytest.approx((m * math.pi) ** 2, rel=1e-4)
            assert pair.field.values[0] > 0

        vectors = np.column_stack([pair.field.values for pair in pairs])
        np.testing.assert_allclose(vectors.T @ b @ vectors, np.eye(3), atol=1e-12)

    def test_exception(self):
        with pytest.raises(ValueError):
            lowest_eigenpairs(AssembledQuadratic(np.eye(2), np.zeros((2, 2))), 1)
