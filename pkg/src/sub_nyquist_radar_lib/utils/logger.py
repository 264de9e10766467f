import logging
import os

from sub_nyquist_radar_lib.utils.util import DirectoryFactory

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s :%(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
ENV_CONSOLE_LEVEL = "GESEDD_LOG_LEVEL"


class LoggerFactory:
    """One logger per module: console at GESEDD_LOG_LEVEL (default INFO), file at DEBUG."""
    __LOGGERS = {}

    @staticmethod
    def console_level() -> int:
        name = os.environ.get(ENV_CONSOLE_LEVEL, "INFO").upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.INFO

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        if cls.__LOGGERS.get(name) is not None:
            return cls.__LOGGERS[name]

        logger = logging.getLogger(name)
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
        formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)

        console = logging.StreamHandler()
        console.setFormatter(formatter)
        console.setLevel(cls.console_level())
        logger.addHandler(console)

        # sweeps log per module; trial workers append to the same files
        log_dir = DirectoryFactory.get_directory(DirectoryFactory.DirectoryName.LOG)
        log_file_path = log_dir / f"{name.removeprefix('sub_nyquist_radar_lib.')}.log"
        file_handler = logging.FileHandler(log_file_path, encoding="utf-8")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)
        logger.addHandler(file_handler)

        cls.__LOGGERS[name] = logger
        logger.debug(f"Logging to {log_file_path}")
        return logger
