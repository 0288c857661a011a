"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

from typing import Final

import pytablewriter
import tabledata

from ._null_logger import NullLogger  # type: ignore


MODULE_NAME: Final = "plaplab"


try:
    from loguru import logger

    logger.disable(MODULE_NAME)
except ImportError:
    logger = NullLogger()


def set_logger(is_enable: bool, propagation_depth: int = 2) -> None:
    """
    Enable or disable the logging of the package.

    :param bool is_enable: |True| to enable logging.
    :param int propagation_depth:
        Depth of the propagation to the logger settings of the dependency packages.
    """

    if is_enable:
        logger.enable(MODULE_NAME)
    else:
        logger.disable(MODULE_NAME)

    if propagation_depth <= 0:
        return

    tabledata.set_logger(is_enable, propagation_depth - 1)

    try:
        pytablewriter.set_logger(is_enable, propagation_depth - 1)
    except (AttributeError, TypeError):
        pass

    try:
        import pytablereader

        pytablereader.set_logger(is_enable, propagation_depth - 1)
    except (ImportError, TypeError):
        pass
