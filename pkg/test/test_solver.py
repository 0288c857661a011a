"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import numpy as np
import pytest

from plaplab import (
    BadConfigError,
    DiscreteField,
    PathCollapseError,
    SolverConfig,
    assemble_energy,
    assemble_gradient,
    build_mesh,
    build_spectrum_table,
    minimize_over_subspace,
    mountain_pass,
    multistart_deflated,
    newton_solve,
    norms,
)
from plaplab.discretization import seminorm_distance
from plaplab.solver import (
    ConeMembership,
    build_starts,
    cone_geometry,
    cone_membership,
    verify_residual,
)

from .fixture import mesh, spec_linear, spec_nonres  # noqa: W0611


def sine(mesh, k, amplitude=1.0):
    return DiscreteField.from_function(mesh, lambda x: amplitude * np.sin(k * math.pi * x))


class Test_SolverConfig:
    def test_normal(self):
        cfg = SolverConfig()

        assert cfg.tol_residual == 1e-10
        assert cfg.with_seed(7).seed == 7
        assert cfg.with_seed(7).starts == cfg.starts

    @pytest.mark.parametrize(
        ["kwargs"],
        [
            [{"tol_residual": 0}],
            [{"tol_residual": -1e-3}],
            [{"max_iter": 0}],
            [{"backtrack": 1.0}],
            [{"backtrack": 0.0}],
            [{"segments": 1}],
            [{"starts": 0}],
        ],
    )
    def test_exception(self, kwargs):
        with pytest.raises(BadConfigError):
            SolverConfig(**kwargs)


class Test_build_starts:
    def test_normal(self, mesh):
        starts = build_starts(mesh, 30, seed=1)

        assert len(starts) == 30
        assert starts[0].sup_norm() == 0
        np.testing.assert_allclose(starts[1].values, sine(mesh, 1, 0.5).values)
        np.testing.assert_array_equal(build_starts(mesh, 30, seed=1)[25].values, starts[25].values)
        assert not np.array_equal(build_starts(mesh, 30, seed=2)[25].values, starts[25].values)

    @pytest.mark.parametrize(["count"], [[1], [5]])
    def test_normal_count(self, mesh, count):
        assert len(build_starts(mesh, count, seed=1)) == count


class Test_newton_solve:
    def test_normal_linear(self, mesh, spec_linear):
        record = newton_solve(spec_linear, sine(mesh, 1))

        assert record.residual <= 1e-10
        assert record.sup_norm <= 1e-9
        assert record.energy == pytest.approx(0, abs=1e-12)
        assert record.method == "newton"

    def test_normal(self, mesh, spec_nonres):
        record = newton_solve(spec_nonres, sine(mesh, 1, 2.0))

        assert record.residual <= 1e-10
        assert verify_residual(spec_nonres, record.field) == pytest.approx(record.residual)
        assert record.iterations <= SolverConfig().max_iter


class Test_multistart_deflated:
    def test_normal(self, mesh, spec_nonres):
        cfg = SolverConfig(starts=16)
        records = multistart_deflated(spec_nonres, mesh, cfg)

        assert len(records) >= 3
        assert any(record.sup_norm == 0 for record in records)
        assert any(record.sup_norm > 1e-3 for record in records)

        for i, record in enumerate(records):
            assert record.method == "deflatedNewton"
            assert np.max(np.abs(assemble_gradient(spec_nonres, record.field))) <= 1e-10
            for other in records[i + 1 :]:
                assert norms(record.field - other.field, 2).seminorm > cfg.distinct_tol

    def test_normal_odd_twins(self, mesh, spec_nonres):
        records = multistart_deflated(spec_nonres, mesh, SolverConfig(starts=16))

        for record in records:
            if record.sup_norm == 0:
                continue
            assert any(
                norms(other.field + record.field, 2).seminorm <= 1e-6 for other in records
            )

    def test_exception(self, mesh, spec_nonres):
        with pytest.raises(BadConfigError):
            multistart_deflated(spec_nonres, mesh, starts=0)


class Test_mountain_pass:
    def test_normal(self, mesh, spec_nonres):
        record = mountain_pass(spec_nonres, DiscreteField.zeros(mesh), sine(mesh, 1, 4.0))

        assert record.method == "mountainPass"
        assert record.residual <= 1e-10
        assert record.energy > 0
        assert record.sup_norm > 1e-3

    @pytest.mark.parametrize("segments", [8, 21, 32])
    def test_normal_above_end_points(self, mesh, spec_nonres, segments):
        a = DiscreteField.zeros(mesh)
        b = sine(mesh, 1, 4.0)
        record = mountain_pass(spec_nonres, a, b, segments=segments)

        assert record.energy > max(assemble_energy(spec_nonres, a), assemble_energy(spec_nonres, b))
        assert verify_residual(spec_nonres, record.field) <= 1e-10
        for end in (a, b):
            assert seminorm_distance(record.field, end, 2) > SolverConfig().distinct_tol

    def test_exception_same_end_points(self, mesh, spec_nonres):
        with pytest.raises(PathCollapseError):
            mountain_pass(spec_nonres, DiscreteField.zeros(mesh), DiscreteField.zeros(mesh))

    def test_exception_no_barrier(self, mesh, spec_linear):
        # the energy is convex: no point of the straight path rises above the end points
        with pytest.raises(PathCollapseError):
            mountain_pass(spec_linear, DiscreteField.zeros(mesh), sine(mesh, 1))


class Test_minimize_over_subspace:
    def test_normal(self, mesh, spec_linear):
        base = sine(mesh, 1)
        basis = [sine(mesh, 2), sine(mesh, 3)]
        w = minimize_over_subspace(spec_linear, base, basis, start=sine(mesh, 2, 0.5))

        assert w.sup_norm() <= 1e-8
        residual = assemble_gradient(spec_linear, base + w)
        for v in basis:
            assert abs(float(v.values @ residual)) <= 1e-8

    @pytest.mark.parametrize("modes", [range(3, 6), range(3, 25)])
    def test_normal_nonlinear(self, mesh, spec_nonres, modes):
        base = sine(mesh, 1, 0.5)
        basis = [sine(mesh, k) for k in modes]
        w = minimize_over_subspace(spec_nonres, base, basis)

        matrix = np.array([v.values for v in basis]).T
        orthonormal, _ = np.linalg.qr(matrix)
        residual = assemble_gradient(spec_nonres, base + w)
        assert np.max(np.abs(orthonormal @ (orthonormal.T @ residual))) <= 1e-10

    def test_normal_empty_basis(self, mesh, spec_linear):
        start = sine(mesh, 2)

        assert minimize_over_subspace(spec_linear, sine(mesh, 1), [], start=start) is start


class Test_cone_membership:
    @pytest.mark.parametrize(
        ["m", "modes", "expected"],
        [
            [2, (1,), ConeMembership.IN_X_MINUS],
            [2, (2,), ConeMembership.IN_X_MINUS],
            [2, (3,), ConeMembership.IN_X_PLUS],
            [2, (1, 3), ConeMembership.NEITHER],
            [2, (), ConeMembership.BOTH],
            [0, (1,), ConeMembership.IN_X_PLUS],
        ],
    )
    def test_normal(self, m, modes, expected):
        mesh = build_mesh(1.0, 63)
        u = DiscreteField.zeros(mesh)
        for k in modes:
            u = u + sine(mesh, k)

        geom = cone_geometry(build_spectrum_table(2, 1, 8), m)

        assert cone_membership(geom, u) == expected
