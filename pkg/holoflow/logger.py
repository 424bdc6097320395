"""
Run log for long analyses: tract growth, quadrature failures and worker progress

Lines go to holoflow.log under the holoflow home once the level is below ERROR.
ERROR lines are echoed to stderr as well. Each line carries the process id, as
several runs may share one holoflow home.
"""

import os
import sys
from datetime import datetime
from enum import IntEnum
from pathlib import Path
from typing import Optional, Union


LEVEL_ENV = "HOLOFLOW_LOG_LEVEL"
HOME_ENV = "HOLOFLOW_HOME"
LOG_FILE_NAME = "holoflow.log"


class LogLevel(IntEnum):
    DEBUG = 0
    VERBOSE = 1
    INFO = 2
    WARNING = 3
    ERROR = 4


def parse_log_level(value: Union[str, int, None], default: int = LogLevel.ERROR) -> int:
    """Level from a name ("debug"), a digit string or an int; ints are clamped, junk gives default"""
    if value is None:
        return default
    if isinstance(value, int):
        return LogLevel(min(max(value, LogLevel.DEBUG), LogLevel.ERROR))

    text = str(value).strip().upper()
    if text.isdigit():
        return parse_log_level(int(text), default)
    return LogLevel.__members__.get(text, default)


class Logger:
    """
    Process-wide run log

    The level comes from HOLOFLOW_LOG_LEVEL unless the CLI's --log-level overrides
    it. Nothing touches the disk at the default ERROR level.
    """

    _instance: Optional['Logger'] = None
    _log_file: Optional[Path] = None
    _log_level: Optional[int] = None

    def __init__(self):
        self.config_dir = self._get_config_dir()

    @classmethod
    def get_instance(cls) -> 'Logger':
        if cls._instance is None:
            cls._instance = Logger()
        return cls._instance

    @staticmethod
    def _get_config_dir() -> Path:
        """HOLOFLOW_HOME, else $XDG_CONFIG_HOME/holoflow, else ~/.config/holoflow"""
        home = os.environ.get(HOME_ENV)
        if home:
            return Path(home)
        base = os.environ.get("XDG_CONFIG_HOME")
        return (Path(base) if base else Path.home() / ".config") / "holoflow"

    def get_log_level(self) -> int:
        if self._log_level is None:
            self._log_level = parse_log_level(os.environ.get(LEVEL_ENV))
        return self._log_level

    def set_log_level(self, level: Union[str, int]) -> None:
        """Override the level for the rest of the run; the log file is resolved again"""
        self._log_level = parse_log_level(level, self.get_log_level())
        self._log_file = None

    def get_log_file(self) -> Optional[Path]:
        """holoflow.log in the config dir, created on demand; None at ERROR"""
        if self._log_file is None and self.get_log_level() < LogLevel.ERROR:
            self.config_dir.mkdir(parents=True, exist_ok=True, mode=0o700)
            self._log_file = self.config_dir / LOG_FILE_NAME
        return self._log_file

    @staticmethod
    def _render(level: int, message: str, args: tuple) -> str:
        # a bad format string still gets logged verbatim
        try:
            text = message % args if args else message
        except (TypeError, ValueError):
            text = message
        stamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        return f"[{stamp}] [{os.getpid()}] {LogLevel(level).name}: {text}\n"

    def log(self, level: int, message: str, *args) -> None:
        """
        Write one line if level is enabled

        Args:
            level: LogLevel value
            message: %-style format, only rendered when the line is kept
            *args: format arguments
        """
        if level < self.get_log_level():
            return
        line = self._render(level, message, args)

        log_file = self.get_log_file()
        if log_file:
            try:
                with open(log_file, 'a') as f:
                    f.write(line)
            except OSError:
                pass
        if level >= LogLevel.ERROR:
            sys.stderr.write(line)

    def debug(self, message: str, *args) -> None:
        self.log(LogLevel.DEBUG, message, *args)

    def verbose(self, message: str, *args) -> None:
        self.log(LogLevel.VERBOSE, message, *args)

    def info(self, message: str, *args) -> None:
        self.log(LogLevel.INFO, message, *args)

    def warning(self, message: str, *args) -> None:
        self.log(LogLevel.WARNING, message, *args)

    def error(self, message: str, *args) -> None:
        self.log(LogLevel.ERROR, message, *args)


def get_logger() -> Logger:
    """The shared run log"""
    return Logger.get_instance()
