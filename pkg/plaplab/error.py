"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

from collections.abc import Sequence
from typing import Any, Optional


class PLapLabError(Exception):
    """
    Base class of the exceptions raised by the package.
    """


class BadConfigError(PLapLabError, ValueError):
    """
    Exception raised when a configuration value or a problem parameter is invalid.
    """

    @property
    def key(self) -> Optional[str]:
        return self.__key

    @property
    def line_number(self) -> Optional[int]:
        return self.__line_number

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        self.__key = kwargs.pop("key", None)
        self.__line_number = kwargs.pop("line_number", None)

        super().__init__(*args)

    def __str__(self) -> str:
        msg = super().__str__()
        location = []

        if self.__line_number is not None:
            location.append(f"line={self.__line_number}")
        if self.__key is not None:
            location.append(f"key={self.__key}")

        if not location:
            return msg

        return "{} ({})".format(msg, ", ".join(location))


class DegeneratePointError(PLapLabError, ArithmeticError):
    """
    Exception raised when the second derivative of the principal part is queried
    at a zero slope with ``kappa=0`` and ``p<2``.
    """


class DegenerateElementError(PLapLabError):
    """
    Exception raised when a Hessian is assembled at a field whose slope vanishes on
    some elements while ``kappa=0`` and ``p<2``.
    """

    @property
    def elements(self) -> tuple[int, ...]:
        return self.__elements

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        elements: Sequence[int] = kwargs.pop("elements", ())
        self.__elements = tuple(int(e) for e in elements)

        super().__init__(*args)


class SpectrumError(PLapLabError):
    """
    Base class of the errors related to eigenvalue sequences.
    """


class ResonantError(SpectrumError):
    """
    Exception raised when the asymptotic slope lies on the spectrum in a strict query.
    """


class TableTooShortError(SpectrumError):
    """
    Exception raised when a spectrum table does not bracket the requested value.
    """


class FactorizationBreakdownError(SpectrumError, ArithmeticError):
    """
    Exception raised when a pivot of a symmetric factorization falls in the ambiguous
    band around the zero tolerance.
    """


class ConvergenceFailureError(SpectrumError):
    """
    Exception raised when an eigensolver does not converge.
    """


class ShootingError(PLapLabError):
    """
    Base class of the errors raised by the initial value oracle.
    """


class BlowUpError(ShootingError, OverflowError):
    """
    Exception raised when a trajectory leaves the blow-up guard before the end point.
    """


class BracketFailureError(ShootingError):
    """
    Exception raised when a bisection bracket cannot be established.
    """


class NotFoundError(ShootingError):
    """
    Exception raised when a shooting bracket contains no admissible solution.
    """


class SolverError(PLapLabError):
    """
    Base class of the errors raised by the critical point solvers.
    """

    @property
    def iterations(self) -> Optional[int]:
        return self.__iterations

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        self.__iterations = kwargs.pop("iterations", None)

        super().__init__(*args)


class MaxIterExceededError(SolverError):
    """
    Exception raised when a solver reaches the iteration limit.
    """


class SingularHessianError(SolverError):
    """
    Exception raised when a Newton system cannot be solved even after regularization.
    """


class PathCollapseError(SolverError):
    """
    Exception raised when the maximum of a mountain pass path merges with an end point.
    """


class SolverFailureError(SolverError):
    """
    Exception raised when a parametric minimization fails inside the reduction.
    """


class MorseError(PLapLabError):
    """
    Base class of the errors raised by the index computations and the reduction.
    """


class NotCriticalError(MorseError):
    """
    Exception raised when a quadratic form is requested at a point that is not critical.
    """


class InfiniteIndexError(MorseError):
    """
    Exception raised when a finite dimensional reduction is requested
    while the large Morse index is infinite.
    """


class RegimeExcludedError(MorseError):
    """
    Exception raised when an operation is not available in the regime of ``(p, kappa)``.
    """


class DimTooHighError(MorseError):
    """
    Exception raised when the reduced space is too large for grid sampling.
    """
