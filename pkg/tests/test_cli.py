"""
Tests for CLI module
"""

import json
import math
import pytest
from io import StringIO
from unittest.mock import Mock, patch

from holoflow.cli import CLI, attach_option_values, main, parse_complex, parse_window
from holoflow.exceptions import ConfigError, HoloflowException
from holoflow.families import CrosscheckReport
from holoflow.models import LimitKind, LimitVerdict, LocalClass, PointKind
from holoflow.report import strip_wall_time


@pytest.fixture
def cli():
    """Create CLI instance"""
    return CLI()


@pytest.fixture
def fast_config(tmp_path):
    """Settings override with coarser probes"""
    path = tmp_path / "fast.json"
    path.write_text(json.dumps({
        "analysis": {"probe_samples": 1024, "census_seeds": 16, "scan_spacing": 0.2},
    }))
    return str(path)


def run_json(cli, capsys, argv):
    """Run a command and parse the report printed on stdout"""
    code = cli.run(argv)
    captured = capsys.readouterr()
    return code, json.loads(captured.out), captured.err


@pytest.mark.unit
class TestArgumentHelpers:
    """Test command line value parsing"""

    def test_parse_window(self):
        """Test four comma-separated numbers"""
        assert parse_window("-5,5,-3,3") == (-5.0, 5.0, -3.0, 3.0)

    @pytest.mark.parametrize("text", ["1,2,3", "a,b,c,d"])
    def test_parse_window_invalid(self, text):
        """Test malformed windows"""
        with pytest.raises(ConfigError) as exc_info:
            parse_window(text)
        assert exc_info.value.key == "window"

    @pytest.mark.parametrize("text,value", [("3.5", 3.5), ("1-2i", 1 - 2j), ("pi/2", math.pi / 2)])
    def test_parse_complex(self, text, value):
        """Test constant expressions"""
        assert abs(parse_complex(text) - value) < 1e-15

    def test_attach_option_values(self):
        """Test values starting with a minus sign stay attached to their option"""
        argv = ["classify", "-f", "-z", "--window", "-5,5,-3,3", "--seed", "1", "--json", "-"]
        assert attach_option_values(argv) == [
            "classify", "--field=-z", "--window=-5,5,-3,3", "--seed", "1", "--json", "-"]

    def test_attach_skips_long_options(self):
        """Test a missing value is left for argparse to report"""
        assert attach_option_values(["--window", "--tol", "1e-6"]) == ["--window", "--tol", "1e-6"]


@pytest.mark.integration
class TestCLIRun:
    """Test CLI run method"""

    def test_run_no_args_shows_help(self, cli, capsys):
        """Test running with no args shows help"""
        assert cli.run([]) == 2
        assert "usage: hflow" in capsys.readouterr().out

    def test_run_with_help_flag(self, cli):
        """Test running with --help flag"""
        with pytest.raises(SystemExit) as exc_info:
            cli.run(['--help'])
        assert exc_info.value.code == 0

    def test_run_with_version_flag(self, cli):
        """Test running with --version flag"""
        with pytest.raises(SystemExit) as exc_info:
            cli.run(['--version'])
        assert exc_info.value.code == 0

    def test_argparse_error(self, cli):
        """Test an invalid choice exits with usage status"""
        with pytest.raises(SystemExit) as exc_info:
            cli.run(['flow', '-f', 'z', '--dir', 'x'])
        assert exc_info.value.code == 2

    def test_missing_field(self, cli):
        """Test a command without a field is a usage error"""
        with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
            assert cli.run(['classify']) == 2
            assert "Error: Give -f/--field" in mock_stderr.getvalue()

    def test_syntax_error(self, cli):
        """Test a malformed expression is a usage error"""
        with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
            assert cli.run(['classify', '-f', 'sin((z)']) == 2
            assert "Error:" in mock_stderr.getvalue()

    def test_unknown_identifier(self, cli):
        """Test an unknown function name is a usage error"""
        with patch('sys.stderr', new_callable=StringIO):
            assert cli.run(['classify', '-f', 'cosh(z)']) == 2

    def test_run_catches_holoflow_exception(self, cli):
        """Test run maps analysis failures to status 3"""
        with patch('holoflow.cli.scan_window', side_effect=HoloflowException("Test error")):
            with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
                assert cli.run(['classify', '-f', 'z']) == 3
                assert "Error: Test error" in mock_stderr.getvalue()

    def test_run_catches_keyboard_interrupt(self, cli):
        """Test run catches KeyboardInterrupt"""
        with patch('holoflow.cli.scan_window', side_effect=KeyboardInterrupt()):
            with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
                assert cli.run(['classify', '-f', 'z']) == 130
                assert "Aborted" in mock_stderr.getvalue()

    def test_run_catches_unexpected_exception(self, cli):
        """Test run catches unexpected exceptions"""
        with patch('holoflow.cli.scan_window', side_effect=RuntimeError("Unexpected")):
            with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
                assert cli.run(['classify', '-f', 'z']) == 3
                assert "Unexpected error: Unexpected" in mock_stderr.getvalue()

    def test_inconclusive_exit_status(self, cli, capsys):
        """Test an undetermined point gives status 4"""
        points = [LocalClass(0j, PointKind.UNDETERMINED, note="probe failed")]
        with patch('holoflow.cli.scan_window', return_value=points):
            code, report, err = run_json(cli, capsys, ['classify', '-f', 'z'])
        assert code == 4
        assert report["inconclusive"] == ["undetermined point 0j: probe failed"]
        assert "Inconclusive" in err

    def test_log_level_flag(self, cli, capsys):
        """Test --log-level reaches the logger"""
        with patch('holoflow.cli.get_logger') as mock_logger:
            cli.run(['classify', '-f', '1', '--log-level', 'DEBUG'])
            mock_logger.return_value.set_log_level.assert_called_once_with('DEBUG')


@pytest.mark.integration
class TestClassify:
    """Test classify command"""

    def test_sec_poles(self, cli, capsys, fast_config):
        """Test sec has four simple poles in [-5,5]x[-3,3]"""
        code, report, _ = run_json(cli, capsys, [
            'classify', '-f', 'sec(z)', '--window', '-5,5,-3,3', '--config', fast_config])
        assert code == 0
        assert report["results"]["counts"]["Pole"] == 4
        assert [p["multiplicity"] for p in report["catalogue"]] == [-1] * 4
        assert report["results"]["window"] == [-5.0, 5.0, -3.0, 3.0]

    def test_format_lines(self, cli, capsys, fast_config):
        """Test --format prints one line per point"""
        code = cli.run(['classify', '-f', 'cos(z) + 1', '--config', fast_config, '--format', '%k'])
        assert code == 0
        assert capsys.readouterr().out.splitlines() == ["Zero(2)", "Zero(2)"]

    def test_regular_everywhere(self, cli, capsys, fast_config):
        """Test f = 1 has an empty catalogue"""
        code, report, _ = run_json(cli, capsys, ['classify', '-f', '1', '--config', fast_config])
        assert code == 0
        assert report["catalogue"] == []
        assert report["results"]["counts"] == {"Zero": 0, "Pole": 0, "Essential": 0, "Undetermined": 0}

    def test_point(self, cli, capsys, fast_config):
        """Test --point classifies one point"""
        code, report, _ = run_json(cli, capsys, [
            'classify', '-f', 'sec(z)', '--point', 'pi/2', '--config', fast_config])
        assert code == 0
        assert report["catalogue"][0]["kind"] == "Pole"

    def test_at_infinity(self, cli, capsys, fast_config):
        """Test --at-infinity"""
        code, report, _ = run_json(cli, capsys, [
            'classify', '-f', '1', '--at-infinity', '--config', fast_config])
        assert code == 0
        assert report["catalogue"][0]["kind"] == "Zero"
        assert report["catalogue"][0]["multiplicity"] == 2

    def test_periods(self, cli, capsys, fast_config):
        """Test residues of zeros give the period lattice"""
        code, report, _ = run_json(cli, capsys, [
            'classify', '-f', 'z', '--window', '-1,1,-1,1', '--config', fast_config])
        assert code == 0
        period = report["results"]["periods"][0]
        assert abs(period["im"] - 2 * math.pi) < 1e-6

    def test_json_file_is_deterministic(self, cli, capsys, tmp_path, fast_config):
        """Test repeated runs differ only in wall time"""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for path in (first, second):
            assert cli.run(['classify', '-f', 'tan(z)', '--window', '-2,2,-1,1',
                            '--config', fast_config, '--json', str(path)]) == 0
        assert capsys.readouterr().out == ""
        a, b = json.loads(first.read_text()), json.loads(second.read_text())
        assert "wall_time" in a["provenance"]
        assert strip_wall_time(a) == strip_wall_time(b)


@pytest.mark.integration
class TestSettingsFlags:
    """Test flag and file precedence"""

    def test_flags_override_config(self, cli, capsys, tmp_path):
        """Test --rays beats the override file and --tol sets the Cauchy tolerance"""
        path = tmp_path / "override.json"
        path.write_text(json.dumps({"analysis": {"rays": 4, "max_tau": 7.0}}))
        code, report, _ = run_json(cli, capsys, [
            'family', '--family', 'exponential', '--config', str(path), '--rays', '12',
            '--tol', '1e-9', '--budget-steps', '500'])
        assert code == 0
        settings = report["provenance"]["settings"]
        assert settings["rays"] == 12
        assert settings["max_tau"] == 7.0
        assert settings["cauchy_tol"] == 1e-9
        assert settings["max_steps"] == 500

    def test_unknown_config_key(self, cli, tmp_path):
        """Test an unknown setting is a usage error"""
        path = tmp_path / "override.json"
        path.write_text(json.dumps({"analysis": {"speed": 3}}))
        with patch('sys.stderr', new_callable=StringIO):
            assert cli.run(['family', '--family', 'exponential', '--config', str(path)]) == 2


@pytest.mark.integration
class TestFlow:
    """Test flow command"""

    def test_sec_backward_to_pole(self, cli, capsys):
        """Test sec from 3.5 reaches 3 pi / 2 in negative time"""
        code, report, err = run_json(cli, capsys, ['flow', '-f', 'sec(z)', '--seed', '3.5', '--dir', '-'])
        assert code == 0
        verdict = report["results"]["verdict"]
        assert verdict.startswith("IncompleteAtPole(")
        assert abs(float(verdict[len("IncompleteAtPole("):-1]) - 3 * math.pi / 2) < 1e-6
        assert report["results"]["completeness"]["verdict"] == "Incomplete"
        assert "IncompleteAtPole" in err

    def test_negative_seed(self, cli, capsys):
        """Test a seed with a leading minus sign"""
        code, report, _ = run_json(cli, capsys, [
            'flow', '-f', '1', '--seed', '-1-1i', '--max-tau', '2'])
        assert code == 0
        assert report["trajectories"][0]["seed"] == {"re": -1.0, "im": -1.0}

    def test_window_budget(self, cli, capsys):
        """Test --window stops the trajectory"""
        code, report, _ = run_json(cli, capsys, ['flow', '-f', '1', '--window', '-1,1,-1,1'])
        assert code == 0
        assert report["trajectories"][0]["stop_reason"] == "window"


@pytest.mark.integration
class TestAsymptotics:
    """Test asymptotics command"""

    def test_exponential(self, cli, capsys):
        """Test e^z has the single finite value 1"""
        code, report, _ = run_json(cli, capsys, ['asymptotics', '-f', 'exp(z)', '--rays', '4'])
        assert code == 0
        values = report["results"]["values"]
        assert len(values) == 1
        assert abs(values[0]["re"] - 1) < 1e-6
        assert report["results"]["diverging_sectors"] == 1

    def test_no_essential_point(self, cli, capsys):
        """Test a polynomial field has no asymptotic values"""
        code, report, _ = run_json(cli, capsys, ['asymptotics', '-f', '1'])
        assert code == 0
        assert report["results"]["values"] == []
        assert "no essential point" in report["results"]["note"]

    def test_periodic_family(self, cli, capsys):
        """Test w/(w^2+1) has a0 = a_inf = 0"""
        code, report, _ = run_json(cli, capsys, [
            'asymptotics', '--family', 'periodic', '--R', 'w/(w^2+1)'])
        assert code == 0
        assert report["results"]["case"] == "ii"
        assert report["results"]["a0"] == {"re": 0.0, "im": 0.0}
        for probe in report["results"]["probes"].values():
            assert probe["kind"] == "Converged"

    def test_periodic_needs_rational(self, cli):
        """Test --family periodic without --R"""
        with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
            assert cli.run(['asymptotics', '--family', 'periodic']) == 2
            assert "--R" in mock_stderr.getvalue()

    def test_all_rays_unsettled(self, cli, capsys):
        """Test a probe set without any limit is inconclusive"""
        verdicts = [LimitVerdict(LimitKind.NO_LIMIT, anchor=0j, direction=1 + 0j)] * 8
        with patch('holoflow.cli.probe_rays', return_value=verdicts):
            code, report, _ = run_json(cli, capsys, ['asymptotics', '-f', 'exp(z)'])
        assert code == 4
        assert report["inconclusive"] == ["no probe ray settled"]


@pytest.mark.integration
class TestFamily:
    """Test family and crosscheck commands"""

    def test_exponential_prediction(self, cli, capsys):
        """Test r critical points and 2d values"""
        code, report, _ = run_json(cli, capsys, [
            'family', '--family', 'exponential', '--P', 'z^2 - 1', '--E', 'z^2'])
        assert code == 0
        prediction = report["results"]["prediction"]
        assert len(prediction["critical_points"]) == 2
        assert prediction["asymptotic_value_count"] == 4
        assert report["field"]["family"]["d"] == 2

    def test_periodic_prediction(self, cli, capsys):
        """Test the case of w + 1/w"""
        code, report, _ = run_json(cli, capsys, ['family', '--family', 'periodic', '--R', 'w + 1/w'])
        assert code == 0
        assert report["results"]["prediction"]["case"] == "iv"

    def test_family_required(self, cli):
        """Test family without --family"""
        with patch('sys.stderr', new_callable=StringIO):
            assert cli.run(['family']) == 2

    def test_degenerate_member(self, cli):
        """Test a rational function with a common factor"""
        with patch('sys.stderr', new_callable=StringIO) as mock_stderr:
            assert cli.run(['family', '--family', 'periodic', '--R', '(w-1)/(w^2-1)']) == 3
            assert "degenerate" in mock_stderr.getvalue()

    def test_crosscheck_mismatch_is_inconclusive(self, cli, capsys):
        """Test mismatches give status 4"""
        result = CrosscheckReport(member={}, prediction={})
        result.check("zero accumulation", False, "0 zeros in window")
        with patch('holoflow.cli.crosscheck', return_value=result) as mock_crosscheck:
            code, report, _ = run_json(cli, capsys, [
                'crosscheck', '--family', 'periodic', '--R', 'w/(w^2+1)'])
        assert code == 4
        assert report["results"]["agrees"] is False
        assert mock_crosscheck.call_args[0][1] == (-10.0, 10.0, -10.0, 10.0)

    def test_crosscheck_agreement(self, cli, capsys):
        """Test a clean crosscheck exits 0"""
        result = CrosscheckReport(member={}, prediction={})
        result.check("a0 probe", True)
        with patch('holoflow.cli.crosscheck', return_value=result):
            code, report, _ = run_json(cli, capsys, [
                'crosscheck', '--family', 'exponential', '--window', '-2,2,-2,2'])
        assert code == 0
        assert report["results"]["crosscheck"]["matches"] == ["a0 probe"]


@pytest.mark.integration
class TestPortrait:
    """Test portrait command"""

    def test_writes_svg(self, cli, capsys, tmp_path, fast_config):
        """Test sec portrait with its separatrix skeleton"""
        output = tmp_path / "sec.svg"
        code, report, _ = run_json(cli, capsys, [
            'portrait', '-f', 'sec(z)', '--window', '-3,3,-2,2', '--density', '0.5',
            '--config', fast_config, '-o', str(output)])
        assert code == 0
        assert output.read_text(encoding="utf-8").startswith("<?xml")
        assert report["results"]["separatrices"] >= 8
        assert report["results"]["svg"]["path"] == str(output)

    def test_output_required(self, cli):
        """Test -o is mandatory"""
        with pytest.raises(SystemExit) as exc_info:
            cli.run(['portrait', '-f', 'z'])
        assert exc_info.value.code == 2

    def test_empty_window(self, cli, capsys, tmp_path):
        """Test an empty window writes a legend-only document"""
        output = tmp_path / "empty.svg"
        code, report, _ = run_json(cli, capsys, [
            'portrait', '-f', 'z', '--window', '0,0,0,1', '-o', str(output)])
        assert code == 0
        assert report["results"]["svg"]["polylines"] == 0
        assert report["results"]["streamlines"] == 0

    def test_style_pair(self, cli, capsys, tmp_path):
        """Test --style reaches the document"""
        output = tmp_path / "styled.svg"
        cli.run(['portrait', '-f', '1', '--window', '-1,1,-1,1', '--no-skeleton',
                 '--style', 'streamline_color=#010203', '-o', str(output)])
        capsys.readouterr()
        assert 'stroke="#010203"' in output.read_text(encoding="utf-8")

    @pytest.mark.parametrize("pair", ["nonsense", "glow=1"])
    def test_bad_style(self, cli, tmp_path, pair):
        """Test malformed or unknown style pairs"""
        with patch('sys.stderr', new_callable=StringIO):
            assert cli.run(['portrait', '-f', 'z', '--style', pair, '-o', str(tmp_path / "x.svg")]) == 2


@pytest.mark.integration
class TestMain:
    """Test main entry point"""

    def test_main_function(self):
        """Test main function calls CLI.run()"""
        with patch('holoflow.cli.CLI') as mock_cli_class:
            mock_cli = Mock()
            mock_cli.run.return_value = 4
            mock_cli_class.return_value = mock_cli

            with patch('sys.exit') as mock_exit:
                main()
                mock_cli.run.assert_called_once()
                mock_exit.assert_called_once_with(4)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
