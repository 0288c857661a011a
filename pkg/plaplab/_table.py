"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import os
from collections.abc import Sequence
from typing import Any, Optional

from pathvalidate import ValidationError, validate_filepath
from pytablewriter import dumps_tabledata
from tabledata import TableData

from ._logger import logger
from .error import BadConfigError


def build_table(
    table_name: str, headers: Sequence[str], rows: Sequence[Sequence[Any]]
) -> TableData:
    return TableData(table_name, headers, rows)


def dumps_csv(table_data: TableData) -> str:
    return dumps_tabledata(table_data, format_name="csv")


def validate_output_path(path: str) -> None:
    try:
        validate_filepath(path, platform="auto")
    except ValidationError as e:
        raise BadConfigError(f"invalid output path: {e}") from e


def write_text(path: str, text: str) -> None:
    validate_output_path(path)

    dir_path = os.path.dirname(path)
    if dir_path:
        os.makedirs(dir_path, exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)

    logger.debug(f"written: {path}")


def write_csv(path: str, table_data: TableData) -> None:
    write_text(path, dumps_csv(table_data))


def load_csv(source: str, headers: Optional[Sequence[str]] = None) -> TableData:
    """
    Load the first table from a CSV file path or a CSV text.
    """

    import pytablereader as ptr

    loader = ptr.CsvTableFileLoader(source)
    if headers:
        loader.headers = headers

    try:
        for table_data in loader.load():
            return table_data
    except (ptr.InvalidFilePathError, OSError):
        pass

    loader = ptr.CsvTableTextLoader(source)
    if headers:
        loader.headers = headers

    for table_data in loader.load():
        return table_data

    raise BadConfigError("no table found")
