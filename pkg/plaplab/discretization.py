"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Final, NamedTuple, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from tabledata import TableData

from ._common import FloatArray, as_float_array
from ._logger import logger
from ._table import build_table, load_csv, write_csv
from .energy import EnergySpec, psi_grad, psi_hess, psi_value
from .error import BadConfigError, DegenerateElementError


FIELD_HEADERS: Final = ("x", "u")

_gauss_points, _gauss_weights = leggauss(2)
# reference coordinates in [0, 1] and weights summing to 1
GAUSS_T: Final = (_gauss_points + 1) / 2
GAUSS_W: Final = _gauss_weights / 2

_LP_NEAR_CONSTANT: Final = 1e-6


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """
    Mesh of ``[0, L]``. ``nodes`` includes both end points.
    """

    nodes: FloatArray

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def n(self) -> int:
        """
        Number of interior nodes.
        """

        return len(self.nodes) - 2

    @property
    def h(self) -> FloatArray:
        """
        Element lengths.
        """

        return np.diff(self.nodes)

    @property
    def interior(self) -> FloatArray:
        return self.nodes[1:-1]

    def is_same(self, other: "Mesh1D") -> bool:
        return self is other or (
            len(self.nodes) == len(other.nodes) and bool(np.all(self.nodes == other.nodes))
        )

    def quadrature_points(self) -> tuple[FloatArray, FloatArray]:
        """
        :return: Gauss points and weights of every element, shape ``(n+1, 2)``.
        """

        left = self.nodes[:-1, None]
        h = self.h[:, None]

        return (left + h * GAUSS_T[None, :], h * GAUSS_W[None, :])


def build_mesh(L: float, n: int) -> Mesh1D:
    """
    Build a uniform mesh of ``(0, L)`` with ``n`` interior nodes.

    :raises plaplab.BadConfigError: If ``L`` or ``n`` is not positive.
    """

    if not math.isfinite(L) or L <= 0:
        raise BadConfigError(f"length must be positive: actual={L}", key="domain.length")
    if int(n) != n or n < 1:
        raise BadConfigError(f"number of interior nodes must be >= 1: actual={n}", key="mesh.n")

    return Mesh1D(np.linspace(0.0, float(L), int(n) + 2))


def mesh_from_nodes(nodes: "Union[FloatArray, list[float]]") -> Mesh1D:
    x = as_float_array(nodes)

    if x.ndim != 1 or len(x) < 3:
        raise BadConfigError("a mesh requires at least three nodes")
    if x[0] != 0:
        raise BadConfigError(f"the first node must be 0: actual={x[0]}")
    if np.any(np.diff(x) <= 0):
        raise BadConfigError("nodes must be strictly increasing")

    return Mesh1D(x.copy())


class DiscreteField:
    """
    P1 finite element function with zero boundary values.

    :param Mesh1D mesh: Mesh of the field.
    :param values: Values at the interior nodes.
    """

    @property
    def mesh(self) -> Mesh1D:
        return self.__mesh

    @property
    def values(self) -> FloatArray:
        return self.__values

    def __init__(self, mesh: Mesh1D, values: "Union[FloatArray, list[float]]") -> None:
        v = np.array(values, dtype=np.float64)

        if v.shape != (mesh.n,):
            raise ValueError(f"expected {mesh.n} interior values: actual shape={v.shape}")

        self.__mesh = mesh
        self.__values = v

    def __repr__(self) -> str:
        return f"DiscreteField(n={self.mesh.n}, sup={self.sup_norm():.6g})"

    @classmethod
    def zeros(cls, mesh: Mesh1D) -> "DiscreteField":
        return cls(mesh, np.zeros(mesh.n))

    @classmethod
    def from_function(
        cls, mesh: Mesh1D, func: Callable[[FloatArray], FloatArray]
    ) -> "DiscreteField":
        """
        Interpolate ``func`` at the interior nodes.
        """

        return cls(mesh, as_float_array(func(mesh.interior)))

    def full(self) -> FloatArray:
        """
        :return: Nodal values including the zero end points.
        """

        return np.concatenate(([0.0], self.__values, [0.0]))

    def slopes(self) -> FloatArray:
        return np.diff(self.full()) / self.__mesh.h

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.__values)))

    def with_values(self, values: FloatArray) -> "DiscreteField":
        return DiscreteField(self.__mesh, values)

    def __check_mesh(self, other: "DiscreteField") -> None:
        if not self.__mesh.is_same(other.mesh):
            raise ValueError("fields are defined on different meshes")

    def __add__(self, other: "DiscreteField") -> "DiscreteField":
        self.__check_mesh(other)
        return self.with_values(self.__values + other.values)

    def __sub__(self, other: "DiscreteField") -> "DiscreteField":
        self.__check_mesh(other)
        return self.with_values(self.__values - other.values)

    def __mul__(self, scalar: float) -> "DiscreteField":
        return self.with_values(float(scalar) * self.__values)

    __rmul__ = __mul__

    def __neg__(self) -> "DiscreteField":
        return self.with_values(-self.__values)

    def as_tabledata(self, table_name: str = "field") -> TableData:
        return build_table(
            table_name,
            FIELD_HEADERS,
            [[float(x), float(u)] for x, u in zip(self.__mesh.nodes, self.full())],
        )

    def write(self, path: str) -> None:
        """
        Write the field as a ``x,u`` CSV table, end points included.
        """

        write_csv(path, self.as_tabledata())

    @classmethod
    def load(cls, source: str) -> "DiscreteField":
        """
        Load a field from a ``x,u`` CSV file path or text.

        :raises plaplab.BadConfigError: If the table is not a valid field.
        """

        table_data = load_csv(source)

        headers = [str(header).strip() for header in table_data.headers]
        if headers != list(FIELD_HEADERS):
            raise BadConfigError(f"field table requires headers {FIELD_HEADERS}: actual={headers}")

        try:
            matrix = np.array([[float(x), float(u)] for x, u in table_data.rows])
        except (TypeError, ValueError) as e:
            raise BadConfigError(f"invalid field value: {e}") from e

        mesh = mesh_from_nodes(matrix[:, 0] - matrix[0, 0])
        u = matrix[:, 1]
        tol = 1e-12 * (1 + float(np.max(np.abs(u))))
        if abs(u[0]) > tol or abs(u[-1]) > tol:
            raise BadConfigError("field must vanish at both end points")

        logger.debug(f"loaded field: n={mesh.n}, length={mesh.length}")

        return cls(mesh, u[1:-1])


@dataclass(frozen=True, eq=False)
class AssembledQuadratic:
    """
    Quadratic form ``Q(v) = v^T A v - v^T M v`` on the interior nodal values.
    ``A`` and ``M`` are symmetric tridiagonal matrices stored densely.
    """

    a: FloatArray
    m: FloatArray
    mesh: Optional[Mesh1D] = field(default=None)

    @property
    def dim(self) -> int:
        return int(self.a.shape[0])

    def form(self) -> FloatArray:
        return self.a - self.m

    def matvec(self, v: FloatArray) -> FloatArray:
        return self.a @ v - self.m @ v


def to_banded(matrix: FloatArray) -> FloatArray:
    """
    :return: Tridiagonal matrix in the ``(1, 1)`` banded storage of |scipy| ``solve_banded``.
    """

    n = matrix.shape[0]
    ab = np.zeros((3, n))
    ab[1] = np.diag(matrix)
    if n > 1:
        ab[0, 1:] = np.diag(matrix, 1)
        ab[2, :-1] = np.diag(matrix, -1)

    return ab


def _tridiagonal(diag: FloatArray, off: FloatArray) -> FloatArray:
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _stiffness_from_weights(weights: FloatArray) -> FloatArray:
    # weights: per element, already divided by h
    return _tridiagonal(weights[:-1] + weights[1:], -weights[1:-1])


def _weighted_mass(weight_at: FloatArray, qw: FloatArray) -> FloatArray:
    # weight_at/qw: (n+1, 2) weight values and quadrature weights per element
    t = GAUSS_T[None, :]
    wq = weight_at * qw
    m_ll = np.sum(wq * (1 - t) ** 2, axis=1)
    m_rr = np.sum(wq * t**2, axis=1)
    m_lr = np.sum(wq * t * (1 - t), axis=1)

    return _tridiagonal(m_ll[1:] + m_rr[:-1], m_lr[1:-1])


def stiffness_matrix(mesh: Mesh1D) -> FloatArray:
    """
    :return: Stiffness matrix of ``int v'^2``.
    """

    return _stiffness_from_weights(1.0 / mesh.h)


def consistent_mass_matrix(mesh: Mesh1D) -> FloatArray:
    _, qw = mesh.quadrature_points()
    return _weighted_mass(np.ones_like(qw), qw)


def mass_matrix(mesh: Mesh1D) -> FloatArray:
    """
    :return:
        The L2 Gram matrix used for B-orthonormality: the average of the consistent and
        the lumped mass matrices.
    """

    h = mesh.h
    lumped = np.diag((h[:-1] + h[1:]) / 2)

    return (consistent_mass_matrix(mesh) + lumped) / 2


def _check_mesh(spec: EnergySpec, u: DiscreteField) -> None:
    if not math.isclose(u.mesh.length, spec.length, rel_tol=1e-12):
        raise ValueError(
            f"mesh length {u.mesh.length} differs from the domain length {spec.length}"
        )


def _quadrature_values(u: DiscreteField) -> tuple[FloatArray, FloatArray]:
    full = u.full()
    t = GAUSS_T[None, :]
    values = full[:-1, None] * (1 - t) + full[1:, None] * t
    _, qw = u.mesh.quadrature_points()

    return (values, qw)


def assemble_energy(spec: EnergySpec, u: DiscreteField) -> float:
    """
    :return: ``sum_e h_e Psi(slope_e) - int G(u)`` with 2-point Gauss quadrature on ``G``.
    """

    _check_mesh(spec, u)

    principal = float(np.sum(u.mesh.h * psi_value(spec.principal, u.slopes())))
    uq, qw = _quadrature_values(u)
    potential = float(np.sum(qw * spec.nonlinearity.G(uq)))

    return principal - potential


def assemble_gradient(spec: EnergySpec, u: DiscreteField) -> FloatArray:
    """
    :return: Exact gradient of :py:func:`assemble_energy` with respect to the interior values.
    """

    _check_mesh(spec, u)

    flux = as_float_array(psi_grad(spec.principal, u.slopes()))
    uq, qw = _quadrature_values(u)
    gq = qw * spec.nonlinearity.g(uq)
    t = GAUSS_T[None, :]
    load_left = np.sum(gq * (1 - t), axis=1)
    load_right = np.sum(gq * t, axis=1)

    return (flux[:-1] - flux[1:]) - (load_left[1:] + load_right[:-1])


def _regularized_slopes(slopes: FloatArray, eps: float) -> FloatArray:
    abs_s = np.abs(slopes)
    floor = eps * (1 + float(np.max(abs_s)))

    return np.maximum(abs_s, floor)


def assemble_hessian(
    spec: EnergySpec,
    u: DiscreteField,
    regularization: Optional[float] = None,
    masked_elements: Sequence[int] = (),
) -> AssembledQuadratic:
    """
    Assemble the second derivative of the energy at ``u``.

    :param EnergySpec spec: Energy.
    :param DiscreteField u: Point of the evaluation.
    :param float regularization:
        If given and ``kappa=0, p<2``, element slopes are replaced by
        ``max(|slope|, regularization * (1 + max|slope|))``.
    :param masked_elements: Elements assembled with weight zero in ``A``.
    :return: ``A`` from the element weights ``psi_hess(slope)/h``, ``M`` from ``g'(u)``.
    :raises plaplab.DegenerateElementError:
        If ``kappa=0, p<2`` and some element slope is zero without regularization.
    """

    _check_mesh(spec, u)

    slopes = u.slopes()
    masked = np.zeros(len(slopes), dtype=bool)
    masked[list(masked_elements)] = True
    slopes = np.where(masked, 1.0, slopes)

    if spec.principal.is_degenerate:
        if regularization is not None:
            slopes = _regularized_slopes(slopes, regularization)
        else:
            zero_elements = np.flatnonzero(slopes == 0)
            if len(zero_elements) > 0:
                raise DegenerateElementError(
                    f"zero slope on {len(zero_elements)} element(s) with kappa=0, p<2",
                    elements=zero_elements.tolist(),
                )

    weights = as_float_array(psi_hess(spec.principal, slopes)) / u.mesh.h
    weights[masked] = 0.0
    uq, qw = _quadrature_values(u)
    m = _weighted_mass(as_float_array(spec.nonlinearity.dg(uq)), qw)

    return AssembledQuadratic(_stiffness_from_weights(weights), m, u.mesh)


class FieldNorms(NamedTuple):
    seminorm: float
    lp: float
    sup: float


def _lp_integral(a: FloatArray, b: FloatArray, h: FloatArray, p: float) -> FloatArray:
    # exact int |u|^p over elements where u is linear from a to b
    diff = b - a
    near = np.abs(diff) <= _LP_NEAR_CONSTANT * (np.abs(a) + np.abs(b))

    def primitive(s: FloatArray) -> FloatArray:
        return np.abs(s) ** p * s / (p + 1)

    safe_diff = np.where(near, 1.0, diff)
    exact = h * (primitive(b) - primitive(a)) / safe_diff
    midpoint = h * np.abs((a + b) / 2) ** p

    return np.where(near, midpoint, exact)


def norms(u: DiscreteField, p: float) -> FieldNorms:
    """
    :return: The W^{1,p} seminorm, the L^p norm and the sup norm of ``u``.
    """

    h = u.mesh.h
    full = u.full()
    seminorm = float(np.sum(h * np.abs(u.slopes()) ** p)) ** (1 / p)
    lp = float(np.sum(_lp_integral(full[:-1], full[1:], h, p))) ** (1 / p)

    return FieldNorms(seminorm=seminorm, lp=lp, sup=u.sup_norm())


def seminorm_gradient(u: DiscreteField, p: float) -> FloatArray:
    """
    :return: Gradient of the W^{1,p} seminorm with respect to the interior values.
    """

    slopes = u.slopes()
    total = float(np.sum(u.mesh.h * np.abs(slopes) ** p))
    if total == 0:
        return np.zeros(u.mesh.n)

    flux = np.sign(slopes) * np.abs(slopes) ** (p - 1)

    return total ** (1 / p - 1) * (flux[:-1] - flux[1:])


def seminorm_distance(u: DiscreteField, v: DiscreteField, p: float) -> float:
    return norms(u - v, p).seminorm
