from ._logger import logger, set_logger


__all__ = ("logger", "set_logger")
