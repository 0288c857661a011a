import re
from typing import Final

from pathvalidate import unprintable_ascii_chars, validate_filename
from pathvalidate.error import ErrorReason, ValidationError


__RE_INVALID_CHARS: Final = re.compile(
    "[{:s}]".format(re.escape("".join(unprintable_ascii_chars))), re.UNICODE
)
__RE_CONFIG_KEY: Final = re.compile(r"^[a-z]+\.[A-Za-z][A-Za-z0-9_]*$")
__RE_SCENARIO_NAME: Final = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


def validate_config_key(key: str) -> None:
    """
    :param str key: ``section.key`` name to validate.
    :raises pathvalidate.ValidationError:
        If the ``key`` is empty, includes unprintable character(s)
        or is not of the form ``section.key``.
    """

    if not key:
        raise ValidationError(["null key"], reason=ErrorReason.NULL_NAME)

    if __RE_INVALID_CHARS.search(key):
        raise ValidationError(["unprintable character found"], reason=ErrorReason.INVALID_CHARACTER)

    if not __RE_CONFIG_KEY.search(key):
        raise ValidationError(
            [f"'{key}' is not of the form section.key"], reason=ErrorReason.INVALID_CHARACTER
        )


def validate_scenario_name(name: str) -> None:
    """
    Scenario names are used as output file names.

    :param str name: Name to validate.
    :raises pathvalidate.ValidationError: If the ``name`` is not a portable file name.
    """

    if not name:
        raise ValidationError(["null name"], reason=ErrorReason.NULL_NAME)

    validate_filename(name, platform="universal")

    if not __RE_SCENARIO_NAME.search(name):
        raise ValidationError(
            [f"'{name}' includes characters other than [A-Za-z0-9._-]"],
            reason=ErrorReason.INVALID_CHARACTER,
        )
