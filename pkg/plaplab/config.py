"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import dataclasses
import math
import re
from dataclasses import dataclass
from typing import Any, Final, NamedTuple, Optional

import typepy
from mbstrdecoder import MultiByteStrDecoder
from pathvalidate import ValidationError

from ._logger import logger
from ._validator import validate_config_key
from .discretization import Mesh1D, build_mesh
from .energy import (
    EnergySpec,
    Family,
    Nonlinearity,
    PrincipalPart,
    linear_hook,
    log_oscillating_hook,
    rational_hook,
)
from .error import BadConfigError
from .solver import SolverConfig
from .spectrum import SpectrumTable, build_spectrum_table, eigenvalue_1d


CONFIG_FAMILIES: Final = ("smoothPower", "purePower", "rational", "linear", "logOscillating")
REQUIRED_KEYS: Final = ("problem.p", "nonlinearity.family", "nonlinearity.lambda")

_REAL: Final = "real"
_INTEGER: Final = "integer"
_STRING: Final = "string"

# key -> (value type, default)
CONFIG_SCHEMA: Final[dict[str, tuple[str, Any]]] = {
    "problem.p": (_REAL, None),
    "problem.kappa": (_REAL, 0.0),
    "domain.length": (_REAL, 1.0),
    "mesh.n": (_INTEGER, 255),
    "nonlinearity.family": (_STRING, None),
    "nonlinearity.lambda": (_REAL, None),
    "nonlinearity.mu": (_REAL, 0.0),
    "nonlinearity.q": (_REAL, None),
    "solver.tolResidual": (_REAL, 1e-10),
    "solver.maxIter": (_INTEGER, 200),
    "solver.starts": (_INTEGER, 64),
    "solver.seed": (_INTEGER, 1),
    "spectrum.count": (_INTEGER, 32),
    "reduction.rho": (_REAL, None),
    "reduction.r": (_REAL, None),
}

_RE_LAMBDA_TOKEN: Final = re.compile(r"^lambda_(\d+)$")


class ConfigEntry(NamedTuple):
    key: str
    value: str
    line_number: int


@dataclass(frozen=True)
class ProblemConfig:
    """
    Validated problem configuration.
    """

    p: float
    family: str
    lambda_: float
    kappa: float = 0.0
    length: float = 1.0
    n: int = 255
    mu: float = 0.0
    q: Optional[float] = None
    tol_residual: float = 1e-10
    max_iter: int = 200
    starts: int = 64
    seed: int = 1
    spectrum_count: int = 32
    rho: Optional[float] = None
    r: Optional[float] = None

    def __post_init__(self) -> None:
        if self.family not in CONFIG_FAMILIES:
            raise BadConfigError(
                f"unknown family '{self.family}': expected one of {CONFIG_FAMILIES}",
                key="nonlinearity.family",
            )
        if self.family in ("smoothPower", "purePower") and self.q is None:
            raise BadConfigError(f"{self.family} requires nonlinearity.q", key="nonlinearity.q")
        for key, value in (("reduction.rho", self.rho), ("reduction.r", self.r)):
            if value is not None and not value > 0:
                raise BadConfigError(f"radius must be positive: actual={value}", key=key)

        # re-validate through the domain types
        self.energy_spec()
        self.solver_config()
        build_mesh(self.length, self.n)
        if self.spectrum_count < 1:
            raise BadConfigError(
                f"spectrum count must be >= 1: actual={self.spectrum_count}", key="spectrum.count"
            )

    def nonlinearity(self) -> Nonlinearity:
        if self.family == "rational":
            return Nonlinearity(
                Family.CUSTOM, self.lambda_, self.mu, hook=rational_hook(self.lambda_, self.mu)
            )
        if self.family == "linear":
            return Nonlinearity(Family.CUSTOM, self.lambda_, hook=linear_hook(self.lambda_))
        if self.family == "logOscillating":
            return Nonlinearity(
                Family.CUSTOM,
                self.lambda_,
                self.mu,
                hook=log_oscillating_hook(self.lambda_, self.mu),
            )

        assert self.q is not None

        return Nonlinearity(Family(self.family), self.lambda_, self.mu, self.q, self.p)

    def energy_spec(self) -> EnergySpec:
        return EnergySpec(PrincipalPart(self.p, self.kappa), self.nonlinearity(), self.length)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tol_residual=self.tol_residual,
            max_iter=self.max_iter,
            starts=self.starts,
            seed=self.seed,
        )

    def mesh(self) -> Mesh1D:
        return build_mesh(self.length, self.n)

    def spectrum_table(self) -> SpectrumTable:
        return build_spectrum_table(self.p, self.length, self.spectrum_count)

    def with_seed(self, seed: int) -> "ProblemConfig":
        return dataclasses.replace(self, seed=int(seed))


def decode_text(data: bytes) -> str:
    return MultiByteStrDecoder(data).unicode_str


def split_entries(text: str) -> list[ConfigEntry]:
    """
    Split ``section.key = value`` lines. ``#`` starts a comment.

    :raises plaplab.BadConfigError: If a line is malformed or a key is repeated.
    """

    entries: list[ConfigEntry] = []
    seen: set[str] = set()

    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue

        if "=" not in content:
            raise BadConfigError("expected 'section.key = value'", line_number=line_number)

        key, value = (part.strip() for part in content.split("=", 1))
        try:
            validate_config_key(key)
        except ValidationError as e:
            raise BadConfigError(str(e), key=key, line_number=line_number) from e

        if key in seen:
            raise BadConfigError("duplicate key", key=key, line_number=line_number)
        seen.add(key)

        entries.append(ConfigEntry(key, value, line_number))

    return entries


def _to_real(entry: ConfigEntry) -> float:
    value = typepy.RealNumber(
        entry.value, strict_level=typepy.StrictLevel.MIN, float_type=float
    ).try_convert()

    if value is None or not math.isfinite(float(value)):
        raise BadConfigError(
            f"expected a real number: {entry.value!r}", key=entry.key, line_number=entry.line_number
        )

    return float(value)


def _to_integer(entry: ConfigEntry) -> int:
    value = typepy.Integer(entry.value, strict_level=typepy.StrictLevel.MIN).try_convert()

    if value is None or _to_real(entry) != int(value):
        raise BadConfigError(
            f"expected an integer: {entry.value!r}", key=entry.key, line_number=entry.line_number
        )

    return int(value)


def _to_string(entry: ConfigEntry) -> str:
    value = typepy.String(entry.value, strict_level=typepy.StrictLevel.MIN).try_convert()

    if not typepy.is_not_null_string(value):
        raise BadConfigError("expected a value", key=entry.key, line_number=entry.line_number)

    return str(value)


def _resolve_lambda(entry: ConfigEntry, p: float, length: float) -> float:
    match = _RE_LAMBDA_TOKEN.search(entry.value)
    if match is None:
        return _to_real(entry)

    try:
        return eigenvalue_1d(p, length, int(match.group(1)))
    except BadConfigError as e:
        raise BadConfigError(str(e), key=entry.key, line_number=entry.line_number) from e


_CONVERTERS: Final = {_REAL: _to_real, _INTEGER: _to_integer, _STRING: _to_string}

_FIELD_OF_KEY: Final = {
    "problem.p": "p",
    "problem.kappa": "kappa",
    "domain.length": "length",
    "mesh.n": "n",
    "nonlinearity.family": "family",
    "nonlinearity.lambda": "lambda_",
    "nonlinearity.mu": "mu",
    "nonlinearity.q": "q",
    "solver.tolResidual": "tol_residual",
    "solver.maxIter": "max_iter",
    "solver.starts": "starts",
    "solver.seed": "seed",
    "spectrum.count": "spectrum_count",
    "reduction.rho": "rho",
    "reduction.r": "r",
}


def build_config(entries: list[ConfigEntry]) -> ProblemConfig:
    """
    Convert and validate configuration entries.

    :raises plaplab.BadConfigError:
        If a key is unknown, a required key is missing or a value is invalid.
    """

    by_key = {}
    for entry in entries:
        if entry.key not in CONFIG_SCHEMA:
            raise BadConfigError("unknown key", key=entry.key, line_number=entry.line_number)
        by_key[entry.key] = entry

    for key in REQUIRED_KEYS:
        if key not in by_key:
            raise BadConfigError("required key is missing", key=key)

    values: dict[str, Any] = {}
    for key, (value_type, default) in CONFIG_SCHEMA.items():
        if key == "nonlinearity.lambda":
            continue
        entry = by_key.get(key)
        values[key] = default if entry is None else _CONVERTERS[value_type](entry)

    values["nonlinearity.lambda"] = _resolve_lambda(
        by_key["nonlinearity.lambda"], values["problem.p"], values["domain.length"]
    )

    try:
        config = ProblemConfig(**{_FIELD_OF_KEY[key]: value for key, value in values.items()})
    except BadConfigError as e:
        entry = by_key.get(e.key) if e.key else None
        raise BadConfigError(
            str(e.args[0]) if e.args else "invalid configuration",
            key=e.key,
            line_number=entry.line_number if entry else None,
        ) from e

    logger.debug(f"config: {config}")

    return config


def parse_config_text(text: str) -> ProblemConfig:
    return build_config(split_entries(text))


def parse_config(path: str) -> ProblemConfig:
    """
    Read a configuration file.

    :param str path: Path to a ``section.key = value`` text file.
    :return: Validated configuration with the defaults filled.
    :raises plaplab.BadConfigError: If the file cannot be read or is invalid.
    """

    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise BadConfigError(f"failed to read the configuration: {e}") from e

    logger.debug(f"reading config: {path}")

    return parse_config_text(decode_text(data))
