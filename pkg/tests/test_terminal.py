"""
Tests for terminal color functionality
"""

import pytest
from unittest.mock import patch

from holoflow.terminal import Ansi, ColorMode, Terminal


@pytest.mark.unit
class TestTerminal:
    """Test terminal color functionality"""

    def test_color_mode_always(self):
        """Test always color mode"""
        Terminal.set_color_mode(ColorMode.ALWAYS)
        assert Terminal.is_color_enabled() is True

    def test_color_mode_never(self):
        """Test never color mode"""
        Terminal.set_color_mode(ColorMode.NEVER)
        assert Terminal.is_color_enabled() is False

    def test_color_mode_auto_tty(self):
        """Test auto color mode with a tty and a real terminal"""
        Terminal.set_color_mode(ColorMode.AUTO)
        with patch('sys.stdout.isatty', return_value=True), \
             patch.dict('os.environ', {'TERM': 'xterm-256color', 'NO_COLOR': ''}):
            assert Terminal.is_color_enabled() is True

    def test_color_mode_auto_no_tty(self):
        """Test auto color mode without a tty"""
        Terminal.set_color_mode(ColorMode.AUTO)
        with patch('sys.stdout.isatty', return_value=False):
            assert Terminal.is_color_enabled() is False

    def test_no_color_env(self):
        """Test NO_COLOR disables colors on a tty"""
        Terminal.set_color_mode(ColorMode.AUTO)
        with patch('sys.stdout.isatty', return_value=True), \
             patch.dict('os.environ', {'TERM': 'xterm', 'NO_COLOR': '1'}):
            assert Terminal.is_color_enabled() is False

    def test_dumb_terminal(self):
        """Test TERM=dumb disables colors"""
        Terminal.set_color_mode(ColorMode.AUTO)
        with patch('sys.stdout.isatty', return_value=True), \
             patch.dict('os.environ', {'TERM': 'dumb', 'NO_COLOR': ''}):
            assert Terminal.is_color_enabled() is False

    def test_parse_color_mode(self):
        """Test parsing of mode strings"""
        assert Terminal.parse_color_mode("Always") == ColorMode.ALWAYS
        assert Terminal.parse_color_mode("never") == ColorMode.NEVER
        assert Terminal.parse_color_mode("sometimes") == ColorMode.AUTO

    def test_colorize(self):
        """Test colorize with colors on and off"""
        Terminal.set_color_mode(ColorMode.ALWAYS)
        assert Terminal.colorize("x", Ansi.GREEN) == f"{Ansi.GREEN}x{Ansi.RESET}"
        Terminal.set_color_mode(ColorMode.NEVER)
        assert Terminal.colorize("x", Ansi.GREEN) == "x"

    def test_verdict_colors_by_leading_word(self):
        """Test verdicts are colored by kind"""
        Terminal.set_color_mode(ColorMode.ALWAYS)
        assert Terminal.verdict("Pole(1)").startswith(Ansi.RED)
        assert Terminal.verdict("Zero(2)").startswith(Ansi.GREEN)
        assert Terminal.verdict("Logarithmic(Elliptic)").startswith(Ansi.GREEN + Ansi.BOLD)

    def test_unknown_verdict_plain(self):
        """Test unknown words are left alone"""
        Terminal.set_color_mode(ColorMode.ALWAYS)
        assert Terminal.verdict("Something") == "Something"

    def test_print_error(self, capsys):
        """Test errors print as Error: ... on stderr"""
        Terminal.set_color_mode(ColorMode.ALWAYS)
        Terminal.print_error("bad window")
        err = capsys.readouterr().err
        assert "Error: bad window" in err
        assert Ansi.RED in err


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
