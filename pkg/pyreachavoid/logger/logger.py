import logging
import pathlib
from typing import Optional, Union

FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Logger:
    def __init__(self, name: str, log_file: Optional[Union[str, pathlib.Path]] = None, level: int = logging.INFO):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        formatter = logging.Formatter(FORMAT)
        if not any(type(handler) is logging.StreamHandler for handler in self.logger.handlers):
            stream = logging.StreamHandler()
            stream.setFormatter(formatter)
            self.logger.addHandler(stream)
        if log_file is not None:
            path = pathlib.Path(log_file).absolute()
            path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(path)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)
            self.log_file = path
        else:
            self.log_file = None

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)

    def debug(self, message: str):
        self.logger.debug(message)

    def critical(self, message: str):
        self.logger.critical(message)

    def exception(self, message: str):
        self.logger.exception(message)

    def close(self):
        for handler in list(self.logger.handlers):
            if isinstance(handler, logging.FileHandler):
                handler.close()
                self.logger.removeHandler(handler)

    def get_logger(self):
        return self.logger
