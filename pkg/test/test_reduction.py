"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import numpy as np
import pytest

from plaplab import (
    DimTooHighError,
    DiscreteField,
    Family,
    InfiniteIndexError,
    RegimeExcludedError,
    SolverFailureError,
    build_decomposition,
    classify_origin,
    compute_morse,
    psi_map,
    sample_polar_grid,
)
from plaplab.discretization import assemble_gradient
from plaplab.reduction import (
    OriginClass,
    PolarGrid,
    ReducedSample,
    reduced_gradient_check,
    reduced_hessian_at_zero,
    with_halving,
)

from .fixture import mesh, power_spec, rational_spec  # noqa: W0611


@pytest.fixture
def reduced_p2(mesh):
    # g'(0) = 50 lies between the second and the third eigenvalue
    spec = rational_spec(5, 45)
    zero = DiscreteField.zeros(mesh)
    dec = build_decomposition(spec, zero, compute_morse(spec, zero))

    return (spec, zero, dec)


def make_grid(dim_v, gaps):
    samples = tuple(
        ReducedSample(
            coords=np.zeros(dim_v), psi_field=None, phi=float(gap), grad_phi=np.zeros(dim_v)
        )
        for gap in gaps
    )

    return PolarGrid(dim_v=dim_v, phi0=0.0, samples=samples, rho=0.1)


class Test_build_decomposition:
    def test_normal(self, mesh, reduced_p2):
        _, _, dec = reduced_p2

        assert dec.dim_v == 2
        assert dec.w_basis.shape == (mesh.n, mesh.n - 2)
        assert dec.rho == pytest.approx(0.1)
        assert dec.r == pytest.approx(0.1)

        expected = np.array([math.pi**2 - 50, 4 * math.pi**2 - 50])
        # mass lumping shifts the discrete values by O(h^2) g'(0)
        np.testing.assert_allclose(dec.eigenvalues, expected, atol=0.5)

        np.testing.assert_allclose(dec.v_basis.T @ dec.b @ dec.v_basis, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(dec.v_basis.T @ dec.b @ dec.w_basis, 0, atol=1e-12)

    def test_normal_radius(self, mesh):
        spec = rational_spec(5, 45)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero), rho=0.2, r=0.3)

        assert (dec.rho, dec.r) == (0.2, 0.3)
        assert (dec.halved().rho, dec.halved().r) == (0.1, 0.15)

    def test_normal_project_w(self, reduced_p2):
        _, _, dec = reduced_p2

        np.testing.assert_allclose(dec.project_w(dec.v_basis[:, 0]), 0, atol=1e-12)
        np.testing.assert_allclose(
            dec.project_w(dec.w_basis[:, 0]), dec.w_basis[:, 0], atol=1e-12
        )

    def test_normal_trivial(self, mesh):
        spec = rational_spec(50, -45)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero))

        assert dec.dim_v == 0
        np.testing.assert_array_equal(dec.w_basis, np.eye(mesh.n))

    def test_exception(self, mesh):
        spec = power_spec(Family.PURE_POWER, 3, 0, 10, 1, 2)
        zero = DiscreteField.zeros(mesh)

        with pytest.raises(InfiniteIndexError):
            build_decomposition(spec, zero, compute_morse(spec, zero))


class Test_psi_map:
    def test_normal_origin(self, reduced_p2):
        spec, zero, dec = reduced_p2
        sample = psi_map(spec, zero, dec, [0.0, 0.0])

        assert sample.phi == 0
        assert sample.psi_field.sup_norm() == 0
        np.testing.assert_array_equal(sample.grad_phi, [0.0, 0.0])

    def test_normal(self, reduced_p2):
        spec, zero, dec = reduced_p2
        sample = psi_map(spec, zero, dec, [0.05, -0.03])

        # the V directions carry negative curvature
        assert sample.phi < 0
        np.testing.assert_allclose(dec.v_basis.T @ dec.b @ sample.psi_field.values, 0, atol=1e-10)

    @pytest.mark.parametrize(["coords"], [[[0.0]], [[0.0, 0.0, 0.0]], [[0.1, 0.1]]])
    def test_exception(self, reduced_p2, coords):
        spec, zero, dec = reduced_p2

        with pytest.raises(ValueError):
            psi_map(spec, zero, dec, coords)


class Test_reduced_checks:
    def test_normal_gradient(self, reduced_p2):
        spec, zero, dec = reduced_p2

        assert reduced_gradient_check(spec, zero, dec, samples=4) <= 1e-4

    def test_normal_hessian(self, reduced_p2):
        spec, zero, dec = reduced_p2
        hessian = reduced_hessian_at_zero(spec, zero, dec)

        np.testing.assert_allclose(hessian, np.diag(dec.eigenvalues), atol=1e-3 * 50)

    def test_normal_trivial(self, mesh):
        spec = rational_spec(50, -45)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero))

        assert reduced_gradient_check(spec, zero, dec) == 0

    def test_exception_regime(self, mesh):
        spec = power_spec(Family.PURE_POWER, 3, 0, 10, -1, 2)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero))

        with pytest.raises(RegimeExcludedError):
            reduced_hessian_at_zero(spec, zero, dec)


class Test_sample_polar_grid:
    def test_normal(self, reduced_p2):
        spec, zero, dec = reduced_p2
        grid = sample_polar_grid(spec, zero, dec)

        assert grid.dim_v == 2
        assert len(grid.samples) == 16 * 8
        assert classify_origin(grid) == OriginClass.LOCAL_MAX

        table_data = grid.as_tabledata()
        assert list(table_data.headers) == ["v1", "v2", "phi", "|gradPhi|"]
        assert len(table_data.rows) == 16 * 8

    def test_normal_every_sample_minimizes_over_w(self, reduced_p2):
        spec, zero, dec = reduced_p2
        grid = sample_polar_grid(spec, zero, dec)
        orthonormal, _ = np.linalg.qr(dec.w_basis)

        for sample in grid.samples:
            u = zero.with_values(dec.v_basis @ sample.coords + sample.psi_field.values)
            residual = assemble_gradient(spec, u)

            assert math.isfinite(sample.phi)
            assert np.all(np.isfinite(sample.grad_phi))
            assert np.max(np.abs(orthonormal @ (orthonormal.T @ residual))) <= 1e-10

    def test_normal_strict_minimum(self, mesh):
        spec = power_spec(Family.SMOOTH_POWER, 1.5, 0, 5, 1, 1.2)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero))
        grid = sample_polar_grid(spec, zero, dec)

        assert grid.dim_v == 0
        assert len(grid.samples) == 1
        assert classify_origin(grid) == OriginClass.LOCAL_MIN

    @pytest.mark.parametrize(["directions", "radii"], [[15, 8], [16, 7]])
    def test_exception_size(self, reduced_p2, directions, radii):
        spec, zero, dec = reduced_p2

        with pytest.raises(ValueError):
            sample_polar_grid(spec, zero, dec, directions=directions, radii=radii)

    def test_exception_dim(self, mesh):
        spec = rational_spec(5, 90)
        zero = DiscreteField.zeros(mesh)
        dec = build_decomposition(spec, zero, compute_morse(spec, zero))

        with pytest.raises(DimTooHighError):
            sample_polar_grid(spec, zero, dec)


class Test_classify_origin:
    @pytest.mark.parametrize(
        ["dim_v", "gaps", "expected"],
        [
            [1, [1.0, 2.0], OriginClass.LOCAL_MIN],
            [1, [-1.0, -2.0], OriginClass.LOCAL_MAX],
            [2, [-1.0, 2.0, 3.0], OriginClass.SADDLE],
            [2, [0.0, 2.0], OriginClass.DEGENERATE],
            [1, [1e-14, -1.0], OriginClass.DEGENERATE],
            [0, [0.0], OriginClass.LOCAL_MIN],
        ],
    )
    def test_normal(self, dim_v, gaps, expected):
        assert classify_origin(make_grid(dim_v, gaps)) == expected

    def test_exception(self):
        with pytest.raises(DimTooHighError):
            classify_origin(make_grid(3, [1.0]))


class Test_with_halving:
    def test_normal(self, reduced_p2):
        _, _, dec = reduced_p2
        calls = []

        def action(d):
            calls.append(d.rho)
            if len(calls) < 3:
                raise SolverFailureError("left the ball")
            return d.rho

        value, final = with_halving(dec, action)

        assert value == pytest.approx(dec.rho / 4)
        assert final.r == pytest.approx(dec.r / 4)
        assert len(calls) == 3

    def test_exception(self, reduced_p2):
        _, _, dec = reduced_p2
        calls = []

        def action(d):
            calls.append(d.rho)
            raise SolverFailureError("left the ball")

        with pytest.raises(SolverFailureError):
            with_halving(dec, action)

        assert len(calls) == 5
