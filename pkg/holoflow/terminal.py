"""
Colored terminal output for verdicts and messages
"""

import os
import sys
from enum import Enum
from typing import Optional, TextIO


class ColorMode(Enum):
    """Color output modes"""
    AUTO = "auto"
    ALWAYS = "always"
    NEVER = "never"


class Ansi:
    """ANSI escape codes"""
    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    BLUE = "\033[34m"
    MAGENTA = "\033[35m"
    CYAN = "\033[36m"
    BOLD = "\033[1m"
    DIM = "\033[2m"
    RESET = "\033[0m"


# verdict word -> codes
VERDICT_COLORS = {
    "Zero": (Ansi.GREEN,),
    "Pole": (Ansi.RED,),
    "Essential": (Ansi.MAGENTA, Ansi.BOLD),
    "Regular": (Ansi.DIM,),
    "Undetermined": (Ansi.YELLOW,),
    "Complete": (Ansi.GREEN,),
    "Incomplete": (Ansi.RED, Ansi.BOLD),
    "IncompleteAtPole": (Ansi.RED, Ansi.BOLD),
    "IncompleteEscape": (Ansi.RED, Ansi.BOLD),
    "BudgetExhausted": (Ansi.YELLOW,),
    "Inconclusive": (Ansi.YELLOW,),
    "Converged": (Ansi.GREEN,),
    "Diverged": (Ansi.BLUE,),
    "NoLimit": (Ansi.DIM,),
    "Algebraic": (Ansi.CYAN,),
    "Logarithmic": (Ansi.GREEN, Ansi.BOLD),
    "DirectNonLogarithmic": (Ansi.MAGENTA,),
    "Indirect": (Ansi.BLUE,),
    "Unresolved": (Ansi.YELLOW,),
}


class Terminal:
    """Process-wide color policy"""

    _color_mode: ColorMode = ColorMode.AUTO
    _color_enabled: Optional[bool] = None

    @classmethod
    def set_color_mode(cls, mode: ColorMode) -> None:
        cls._color_mode = mode
        cls._color_enabled = None

    @classmethod
    def parse_color_mode(cls, mode_str: str) -> ColorMode:
        try:
            return ColorMode(mode_str.lower())
        except ValueError:
            return ColorMode.AUTO

    @classmethod
    def is_color_enabled(cls, stream: Optional[TextIO] = None) -> bool:
        """Colors on for ALWAYS; for AUTO only on a tty with NO_COLOR unset and a real TERM"""
        if cls._color_enabled is not None:
            return cls._color_enabled

        if cls._color_mode == ColorMode.ALWAYS:
            cls._color_enabled = True
        elif cls._color_mode == ColorMode.NEVER:
            cls._color_enabled = False
        else:
            stream = stream or sys.stdout
            term = os.environ.get("TERM", "")
            cls._color_enabled = (
                stream.isatty()
                and not os.environ.get("NO_COLOR")
                and term not in ("", "dumb")
            )
        return cls._color_enabled

    @classmethod
    def colorize(cls, text: str, *codes: str) -> str:
        if not codes or not cls.is_color_enabled():
            return text
        return f"{''.join(codes)}{text}{Ansi.RESET}"

    @classmethod
    def verdict(cls, text: str) -> str:
        """Color a verdict by its leading word (Zero(2), Logarithmic(Elliptic), ...)"""
        word = text.split("(", 1)[0]
        return cls.colorize(text, *VERDICT_COLORS.get(word, ()))

    @classmethod
    def error(cls, text: str) -> str:
        return cls.colorize(text, Ansi.RED, Ansi.BOLD)

    @classmethod
    def warning(cls, text: str) -> str:
        return cls.colorize(text, Ansi.YELLOW, Ansi.BOLD)

    @classmethod
    def header(cls, text: str) -> str:
        return cls.colorize(text, Ansi.BOLD)

    @classmethod
    def print_error(cls, message: str) -> None:
        print(cls.error(f"Error: {message}"), file=sys.stderr)
