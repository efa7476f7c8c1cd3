import inspect
import logging
import os
import sys


LOG_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - "
    "%(caller_file)s:%(caller_line)d - %(message)s"
)


class Logger:
    def __init__(self, name: str = "hamflow", level: str = None) -> None:
        self.logger = logging.getLogger(name)
        self.handler = None
        if level is not None:
            self.init_app(level=level)

    def init_app(self, level: str = "INFO", quiet: bool = False) -> None:
        """
        Attaches a single stderr handler to the hamflow logger.

        Args:
            level (str): Logging level name, e.g. "DEBUG" or "INFO".
            quiet (bool): Only warnings and errors reach the console.
        """
        if quiet:
            level = "WARNING"
        self.logger.setLevel(getattr(logging, str(level).upper(), logging.INFO))
        self.logger.propagate = False

        if self.handler is None:
            self.handler = logging.StreamHandler(sys.stderr)
            self.handler.setFormatter(logging.Formatter(LOG_FORMAT))
            self.logger.addHandler(self.handler)
        else:
            # follow a redirected stderr
            self.handler.setStream(sys.stderr)

    def _log(self, level, msg):
        # Get the caller's frame
        current_frame = inspect.currentframe()
        caller_frame = current_frame.f_back

        # Find the first frame that is not in this file
        while caller_frame.f_back and caller_frame.f_code.co_filename == __file__:
            caller_frame = caller_frame.f_back

        filename = os.path.basename(caller_frame.f_code.co_filename)
        lineno = caller_frame.f_lineno

        extra = {"caller_file": filename, "caller_line": lineno}
        getattr(self.logger, level)(msg, extra=extra)

    def info(self, msg):
        self._log("info", msg)

    def debug(self, msg):
        self._log("debug", msg)

    def warning(self, msg):
        self._log("warning", msg)

    def error(self, msg):
        self._log("error", msg)


logger = Logger()
