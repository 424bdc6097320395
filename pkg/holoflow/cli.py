"""
Command-line interface for holoflow
"""

import sys
import math
import argparse
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .asymptotic import (
    RaySpec, RegionCache, asymptotic_value_along_path, build_catalogue,
    classify_inverse_singularity, coherence_check, dichotomy_check, distinct_limits,
    period_lattice, probe_rays, ray_singularity,
)
from .config import AnalysisSettings, Config
from .exceptions import (
    ConfigError, ExprSyntaxError, HoloflowException, NotRationalError, SeedOutsideDiskError,
    UnknownIdentifierError,
)
from .expr import evaluate
from .families import (
    ExponentialFamilyMember, PeriodicFamilyMember, analyze_exponential, analyze_periodic,
    crosscheck,
)
from .field import VectorField
from .flow import Budget, Window, completeness_report, integrate_real_flow
from .format import DEFAULT_FORMAT, format_complex, format_point
from .localclass import classify_infinity, classify_point, scan_window
from .logger import get_logger
from .models import (
    Completeness, LimitKind, LimitVerdict, LocalClass, PointKind, SingularityKind,
    TrajectoryVerdict,
)
from .parser import parse
from .portrait import STRATEGIES, PortraitSpec, compute_streamlines, separatrix_skeleton
from .report import Report, write_report
from .svg import emit_svg, summary, write_svg
from .terminal import Terminal


DEFAULT_WINDOW: Window = (-5.0, 5.0, -5.0, 5.0)
FAMILY_WINDOW: Window = (-10.0, 10.0, -10.0, 10.0)

# exceptions that mean the command line itself was wrong
USAGE_ERRORS = (ExprSyntaxError, UnknownIdentifierError, NotRationalError, ConfigError)

# options whose values may start with a minus sign
VALUE_OPTIONS = ('-f', '--field', '--window', '--seed', '--point', '--base',
                 '--P', '--E', '--R', '--T')


def attach_option_values(argv: Sequence[str]) -> List[str]:
    """Rewrite '--window -5,5,-3,3' as '--window=-5,5,-3,3' so argparse keeps the value"""
    result: List[str] = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith('-') \
                and not argv[i + 1].startswith('--'):
            name = '--field' if arg == '-f' else arg
            result.append(f"{name}={argv[i + 1]}")
            i += 2
            continue
        result.append(arg)
        i += 1
    return result


def parse_window(text: str) -> Window:
    """x0,x1,y0,y1"""
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"Window must be x0,x1,y0,y1, got '{text}'", key="window")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"Window must hold four numbers, got '{text}'", key="window")


def _window_arg(text: str) -> Window:
    try:
        return parse_window(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e))


def parse_complex(text: str) -> complex:
    """A constant expression such as 3.5, pi/2 or 1-2i"""
    return evaluate(parse(text), 0j)


def parse_style_pairs(pairs: Optional[List[str]]) -> Dict[str, str]:
    style: Dict[str, str] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"Style must be key=value, got '{pair}'", key="style")
        style[key.strip()] = value.strip()
    return style


def distinct_rays(verdicts: Sequence[LimitVerdict]) -> List[RaySpec]:
    """The first probe ray reaching each distinct limit"""
    rays: List[RaySpec] = []
    seen = set()
    for v in verdicts:
        if v.kind == LimitKind.NO_LIMIT:
            continue
        if v.kind == LimitKind.DIVERGED:
            key = "infinity"
        else:
            key = (round(v.value.real, 6), round(v.value.imag, 6))
        if key in seen:
            continue
        seen.add(key)
        rays.append(RaySpec(v.anchor, v.direction))
    return rays


class CLI:
    """Command-line interface handler"""

    def __init__(self):
        self.config = Config()

    def run(self, args: Optional[List[str]] = None) -> int:
        """Run CLI with arguments"""
        parser = self._create_parser()

        if args is None:
            args = sys.argv[1:]

        if not args:
            parser.print_help()
            return 2

        parsed_args = parser.parse_args(attach_option_values(args))
        if not hasattr(parsed_args, "func"):
            parser.print_help()
            return 2
        Terminal.set_color_mode(Terminal.parse_color_mode(parsed_args.color))
        if parsed_args.log_level:
            get_logger().set_log_level(parsed_args.log_level)

        try:
            return parsed_args.func(parsed_args)
        except USAGE_ERRORS as e:
            Terminal.print_error(str(e))
            return 2
        except HoloflowException as e:
            Terminal.print_error(str(e))
            return 3
        except KeyboardInterrupt:
            print("\nAborted", file=sys.stderr)
            return 130
        except Exception as e:
            print(f"Unexpected error: {e}", file=sys.stderr)
            return 3

    def _create_parser(self) -> argparse.ArgumentParser:
        """Create argument parser"""
        parser = argparse.ArgumentParser(
            prog='hflow',
            description='Analysis of singular complex analytic vector fields',
        )

        parser.add_argument('--version', action='version',
                            version=f'hflow v{__version__}')

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('-f', '--field', metavar='EXPR', help='Field f(z) of X = f d/dz')
        common.add_argument('--family', choices=['exponential', 'periodic'],
                            help='Use a closed-form family member instead of --field')
        common.add_argument('--P', dest='P', metavar='EXPR', default='1',
                            help='Polynomial P(z) of exp(E)/P')
        common.add_argument('--E', dest='E', metavar='EXPR', default='z',
                            help='Polynomial E(z) of exp(E)/P')
        common.add_argument('--R', dest='R', metavar='EXPR',
                            help='Rational R(w) of Psi = R(exp(2 pi i z / T))')
        common.add_argument('--T', dest='T', metavar='PERIOD', help='Period T (default 2*pi)')
        common.add_argument('--window', type=_window_arg, metavar='x0,x1,y0,y1',
                            help='Analysis window')
        common.add_argument('--base', metavar='Z0', help='Base point of Psi')
        common.add_argument('--budget-steps', type=int, metavar='N', help='Step budget per trajectory')
        common.add_argument('--max-tau', type=float, metavar='T', help='Time budget per trajectory')
        common.add_argument('--tol', type=float, metavar='EPS', help='Cauchy tolerance of limit probes')
        common.add_argument('--rays', type=int, metavar='N', help='Number of probe rays')
        common.add_argument('--config', type=Path, metavar='FILE', help='JSON settings override')
        common.add_argument('--json', type=Path, metavar='PATH', help='Write the report to PATH')
        common.add_argument('--log-level', metavar='LEVEL', help='Log level name or number')
        common.add_argument('--color', choices=['auto', 'never', 'always'],
                            default='auto', help='Color output mode')

        subparsers = parser.add_subparsers(dest='command', help='Commands')

        # Classify
        classify_parser = subparsers.add_parser('classify', parents=[common],
                                                help='Catalogue singular points')
        classify_parser.add_argument('--point', metavar='Z', help='Classify a single point')
        classify_parser.add_argument('--at-infinity', action='store_true',
                                     help='Classify the point at infinity')
        classify_parser.add_argument('--format', metavar='FMT', nargs='?', const=DEFAULT_FORMAT,
                                     help='Print one formatted line per point instead of JSON')
        classify_parser.set_defaults(func=self.cmd_classify)

        # Flow
        flow_parser = subparsers.add_parser('flow', parents=[common],
                                            help='Integrate one real trajectory')
        flow_parser.add_argument('--seed', metavar='Z', default='0', help='Initial point')
        flow_parser.add_argument('--dir', choices=['+', '-'], default='+',
                                 help='Direction of real time')
        flow_parser.set_defaults(func=self.cmd_flow)

        # Asymptotics
        asymptotics_parser = subparsers.add_parser('asymptotics', parents=[common],
                                                   help='Asymptotic values of Psi')
        asymptotics_parser.add_argument('--taxonomy', action='store_true',
                                        help='Classify the singularities of the inverse of Psi')
        asymptotics_parser.add_argument('--dichotomy', action='store_true',
                                        help='Check finite values against pole accumulation')
        asymptotics_parser.set_defaults(func=self.cmd_asymptotics)

        # Family
        family_parser = subparsers.add_parser('family', parents=[common],
                                              help='Closed-form predictions for a family member')
        family_parser.set_defaults(func=self.cmd_family)

        # Portrait
        portrait_parser = subparsers.add_parser('portrait', parents=[common],
                                                help='Write an SVG phase portrait')
        portrait_parser.add_argument('-o', '--output', type=Path, required=True, metavar='PATH',
                                     help='SVG output path')
        portrait_parser.add_argument('--density', type=float, default=1.0,
                                     help='Streamline density')
        portrait_parser.add_argument('--strategy', choices=STRATEGIES, default='psi',
                                     help='Seed placement strategy')
        portrait_parser.add_argument('--tracts', action='store_true',
                                     help='Shade tracts of the asymptotic values')
        portrait_parser.add_argument('--no-skeleton', action='store_true',
                                     help='Omit the separatrix skeleton')
        portrait_parser.add_argument('--style', action='append', metavar='KEY=VALUE',
                                     help='Style override (repeatable)')
        portrait_parser.set_defaults(func=self.cmd_portrait)

        # Crosscheck
        crosscheck_parser = subparsers.add_parser('crosscheck', parents=[common],
                                                  help='Compare family predictions with numerics')
        crosscheck_parser.add_argument('--taxonomy', action='store_true',
                                       help='Also classify the predicted tracts')
        crosscheck_parser.set_defaults(func=self.cmd_crosscheck)

        return parser

    # ------------------------------------------------------------------
    # shared plumbing
    # ------------------------------------------------------------------

    def _settings(self, args) -> AnalysisSettings:
        flags = {
            "max_steps": args.budget_steps,
            "max_tau": args.max_tau,
            "cauchy_tol": args.tol,
            "rays": args.rays,
        }
        return self.config.load_settings(args.config, flags)

    def _member(self, args):
        if args.family == 'exponential':
            return ExponentialFamilyMember.from_expressions(args.P, args.E)
        if args.family == 'periodic':
            if not args.R:
                raise ConfigError("--family periodic needs --R", key="R")
            period = parse_complex(args.T) if args.T else 2 * math.pi
            return PeriodicFamilyMember.from_expression(args.R, period)
        return None

    def _field(self, args, member=None) -> VectorField:
        base = parse_complex(args.base) if args.base else None
        if member is not None:
            return member.field(base_point=base) if base is not None else member.field()
        if not args.field:
            raise ConfigError("Give -f/--field EXPR or --family", key="field")
        return VectorField.from_source(args.field, base_point=base)

    def _report(self, command: str, settings: AnalysisSettings, field: Optional[VectorField],
                member=None) -> Report:
        report = Report(command, settings, __version__)
        if field is not None:
            report.field = field.describe()
            report.field["constant_shift"] = field.base_value
        if member is not None:
            report.field = dict(report.field or {}, family=member.to_dict())
        return report

    def _emit(self, report: Report, args, stdout: bool = True) -> int:
        text = report.to_json()
        if args.json is not None or stdout:
            write_report(text, args.json)
        for reason in report.inconclusive:
            print(Terminal.warning(f"Inconclusive: {reason}"), file=sys.stderr)
        return 4 if report.inconclusive else 0

    # ------------------------------------------------------------------
    # commands
    # ------------------------------------------------------------------

    def cmd_classify(self, args) -> int:
        """Handle classify command"""
        settings = self._settings(args)
        member = self._member(args)
        field = self._field(args, member)
        report = self._report("classify", settings, field, member)

        if args.at_infinity:
            points = [classify_infinity(field, settings)]
        elif args.point:
            points = [classify_point(field, parse_complex(args.point), settings=settings)]
        else:
            window = args.window or DEFAULT_WINDOW
            report.results["window"] = list(window)
            points = scan_window(field, window, settings=settings)

        report.catalogue = points
        report.results["counts"] = {
            kind.value: sum(1 for p in points if p.kind == kind)
            for kind in (PointKind.ZERO, PointKind.POLE, PointKind.ESSENTIAL, PointKind.UNDETERMINED)
        }
        report.results["periods"] = period_lattice(
            p.residue for p in points if p.kind == PointKind.ZERO)
        for p in points:
            if p.kind == PointKind.UNDETERMINED:
                report.mark_inconclusive(f"undetermined point {p.point}: {p.note}")

        if args.format is not None:
            for point in points:
                print(self._format_line(args.format, point))
            return self._emit(report, args, stdout=False)
        return self._emit(report, args)

    @staticmethod
    def _format_line(fmt: str, point: LocalClass) -> str:
        line = format_point(fmt, point)
        if point.label in line:
            line = line.replace(point.label, Terminal.verdict(point.label), 1)
        return line

    def cmd_flow(self, args) -> int:
        """Handle flow command"""
        settings = self._settings(args)
        member = self._member(args)
        field = self._field(args, member)
        report = self._report("flow", settings, field, member)

        seed = parse_complex(args.seed)
        direction = 1.0 if args.dir == '+' else -1.0
        budget = Budget.from_settings(settings, window=args.window)
        trajectory = integrate_real_flow(field, seed, direction, budget, settings)
        completeness = completeness_report(field, trajectory, settings)

        report.trajectories = [trajectory]
        report.results["verdict"] = trajectory.verdict.value
        if trajectory.verdict == TrajectoryVerdict.INCOMPLETE_AT_POLE:
            report.results["verdict"] = f"IncompleteAtPole({format_complex(trajectory.pole)})"
        report.results["completeness"] = completeness
        if completeness.verdict == Completeness.INCONCLUSIVE:
            report.mark_inconclusive(f"completeness of the trajectory from {seed}: {completeness.witness}")
        print(Terminal.verdict(trajectory.verdict.value), file=sys.stderr)
        return self._emit(report, args)

    def cmd_asymptotics(self, args) -> int:
        """Handle asymptotics command"""
        settings = self._settings(args)
        member = self._member(args)
        field = self._field(args, member)
        report = self._report("asymptotics", settings, field, member)

        if isinstance(member, PeriodicFamilyMember):
            self._periodic_asymptotics(field, member, settings, report)
            return self._emit(report, args)

        infinity = classify_infinity(field, settings)
        report.results["infinity"] = infinity
        if infinity.kind not in (PointKind.ESSENTIAL, PointKind.UNDETERMINED):
            # Psi has no asymptotic values without an essential point
            report.results["values"] = []
            report.results["diverging_sectors"] = 0
            report.results["note"] = f"infinity is {infinity.label}: no essential point"
            return self._emit(report, args)

        verdicts = probe_rays(field, count=settings.rays, settings=settings)
        values, sectors = distinct_limits(verdicts, settings.cauchy_tol * 10)
        report.results["rays"] = verdicts
        report.results["values"] = values
        report.results["diverging_sectors"] = sectors
        if isinstance(member, ExponentialFamilyMember):
            report.results["prediction"] = analyze_exponential(member, settings)
        if all(v.kind == LimitKind.NO_LIMIT for v in verdicts):
            report.mark_inconclusive("no probe ray settled")

        if args.dichotomy:
            report.results["dichotomy"] = dichotomy_check(field, settings=settings)
        if args.taxonomy:
            self._taxonomy(field, verdicts, args.window or DEFAULT_WINDOW, settings, report)
        return self._emit(report, args)

    def _periodic_asymptotics(self, field: VectorField, member: PeriodicFamilyMember,
                              settings: AnalysisSettings, report: Report) -> None:
        prediction = analyze_periodic(member)
        report.results["prediction"] = prediction
        report.results["case"] = prediction.case
        report.results["a0"] = prediction.a0
        report.results["a_inf"] = prediction.a_inf
        probes = {}
        for name, direction in sorted(prediction.rays.items()):
            probes[name] = asymptotic_value_along_path(
                field, RaySpec(field.base_point, direction), settings)
        report.results["probes"] = probes

    def _taxonomy(self, field: VectorField, verdicts, window: Window,
                  settings: AnalysisSettings, report: Report) -> None:
        """One ray per distinct limit, classified against the window catalogue"""
        catalogue = build_catalogue(field, window, distinct_rays(verdicts), settings=settings)
        report.catalogue = catalogue.points
        coherence = []
        for u in catalogue.singularities:
            classify_inverse_singularity(field, u, catalogue, settings)
        for u in catalogue.singularities:
            check = coherence_check(field, u, catalogue, settings)
            check["label"] = u.label
            coherence.append(check)
            if u.kind == SingularityKind.UNRESOLVED:
                report.mark_inconclusive(f"singularity {u.label}: {u.note}")
        report.singularities = catalogue.singularities
        report.results["coherence"] = coherence

    def cmd_family(self, args) -> int:
        """Handle family command"""
        settings = self._settings(args)
        member = self._member(args)
        if member is None:
            raise ConfigError("family needs --family exponential|periodic", key="family")
        report = self._report("family", settings, None, member)
        if isinstance(member, ExponentialFamilyMember):
            report.results["prediction"] = analyze_exponential(member, settings)
        else:
            report.results["prediction"] = analyze_periodic(member)
        return self._emit(report, args)

    def cmd_crosscheck(self, args) -> int:
        """Handle crosscheck command"""
        settings = self._settings(args)
        member = self._member(args)
        if member is None:
            raise ConfigError("crosscheck needs --family exponential|periodic", key="family")
        report = self._report("crosscheck", settings, None, member)
        window = args.window or FAMILY_WINDOW
        result = crosscheck(member, window, settings, taxonomy=args.taxonomy)
        report.results["crosscheck"] = result
        report.results["agrees"] = result.agrees
        for mismatch in result.mismatches:
            report.mark_inconclusive(f"mismatch {mismatch}")
        return self._emit(report, args)

    def cmd_portrait(self, args) -> int:
        """Handle portrait command"""
        settings = self._settings(args)
        member = self._member(args)
        field = self._field(args, member)
        report = self._report("portrait", settings, field, member)

        style = self.config.load_style(args.config, parse_style_pairs(args.style))
        window = args.window or DEFAULT_WINDOW
        spec = PortraitSpec(window, density=args.density, strategy=args.strategy,
                            skeleton=not args.no_skeleton, style=style, max_tau=args.max_tau)
        if not spec.is_empty:
            spec.points = scan_window(field, window, settings=settings)
            if args.tracts:
                spec.tracts = self._tracts(field, window, settings, report)

        streamlines = compute_streamlines(field, spec, settings)
        skeleton = separatrix_skeleton(field, spec, settings, streamlines) if spec.skeleton else []
        document = emit_svg(field, spec, streamlines, skeleton)
        write_svg(document, args.output)

        report.catalogue = spec.points or []
        report.results["svg"] = dict(summary(document), path=str(args.output))
        report.results["streamlines"] = len(streamlines)
        report.results["separatrices"] = len(skeleton)
        return self._emit(report, args)

    @staticmethod
    def _tracts(field: VectorField, window: Window, settings: AnalysisSettings, report: Report):
        cache = RegionCache()
        rho = min(settings.rho_schedule)
        regions = []
        for k, ray in enumerate(distinct_rays(probe_rays(field, settings=settings))):
            u = ray_singularity(field, ray, label=f"tract{k}", settings=settings)
            if u is None:
                continue
            try:
                regions.append(cache.get(field, u, rho, window, settings))
            except SeedOutsideDiskError as e:
                report.mark_inconclusive(f"tract over {u.value} not grown: {e}")
        return regions


def main():
    """Main entry point"""
    cli = CLI()
    sys.exit(cli.run())


if __name__ == '__main__':
    main()
