"""
Closed-form families with known answers: exponential fields e^E/P and periodic
fields whose Psi is a rational function of exp(2 pi i z / T)
"""

import cmath
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .asymptotic import (
    RaySpec, asymptotic_value_along_path, build_catalogue, classify_inverse_singularity,
    distinct_limits, probe_rays, ray_singularity,
)
from .config import AnalysisSettings, DEFAULT_SETTINGS
from .exceptions import (
    DegenerateRationalError, InvalidFamilyMemberError, NonConvergentError, PathHitsSingularityError,
    PathThroughSingularityError, RootFindingFailedError,
)
from .expr import ExprAst, Var, div, func, lit, mul, poly, to_rational
from .field import VectorField
from .flow import Window, psi_value
from .localclass import scan_window
from .logger import get_logger
from .models import (
    INFINITY, LimitKind, PointKind, SingularityKind, TractType, decode_complex, encode_complex,
    is_infinite,
)
from .parser import parse


COEFFICIENT_TOL = 1e-14


def _coefficients(values: Sequence[Any], name: str) -> Tuple[complex, ...]:
    coeffs = [decode_complex(v) if isinstance(v, (dict, str)) else complex(v) for v in values]
    while len(coeffs) > 1 and abs(coeffs[-1]) <= COEFFICIENT_TOL:
        coeffs.pop()
    if not coeffs or (len(coeffs) == 1 and abs(coeffs[0]) <= COEFFICIENT_TOL):
        raise InvalidFamilyMemberError(f"{name} is the zero polynomial")
    return tuple(coeffs)


def _polynomial_of(source: str, variable: str, name: str) -> Tuple[complex, ...]:
    numerator, denominator = to_rational(parse(source, variable))
    if len(denominator) != 1:
        raise InvalidFamilyMemberError(f"{name} must be a polynomial, got '{source}'")
    return _coefficients(numerator / denominator[0], name)


def polish_roots(coeffs: Sequence[complex], steps: int = 1) -> List[complex]:
    """
    Roots from the companion matrix eigenvalues, then Newton polish

    Raises:
        RootFindingFailedError: non-finite roots or a residual that will not settle
    """
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2:
        return []
    try:
        roots = P.polyroots(c)
    except np.linalg.LinAlgError as e:
        raise RootFindingFailedError(f"Companion eigenvalues failed: {e}")
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailedError("Companion eigenvalues are not finite")
    derivative = P.polyder(c)
    polished = []
    scale = np.max(np.abs(c))
    for root in roots:
        z = complex(root)
        for _ in range(steps):
            slope = P.polyval(z, derivative)
            if abs(slope) > 1e-300:
                z -= P.polyval(z, c) / slope
        if abs(P.polyval(z, c)) > 1e-6 * scale * max(1.0, abs(z)) ** (len(c) - 1):
            raise RootFindingFailedError(f"Root {z} of {list(coeffs)} does not polish")
        polished.append(z)
    return sorted(polished, key=lambda w: (round(w.real, 9), round(w.imag, 9)))


# ---------------------------------------------------------------------------
# e^E / P
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentialFamilyMember:
    """f = exp(E) / P with coefficients lowest degree first"""
    P: Tuple[complex, ...]
    E: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "P", _coefficients(self.P, "P"))
        object.__setattr__(self, "E", _coefficients(self.E, "E"))
        if len(self.E) < 2:
            raise InvalidFamilyMemberError("E must have degree d >= 1")

    @classmethod
    def from_expressions(cls, p_source: str, e_source: str) -> "ExponentialFamilyMember":
        return cls(_polynomial_of(p_source, "z", "P"), _polynomial_of(e_source, "z", "E"))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExponentialFamilyMember":
        try:
            return cls(tuple(data["P"]), tuple(data["E"]))
        except KeyError as e:
            raise InvalidFamilyMemberError(f"Missing family key {e}")

    @property
    def r(self) -> int:
        return len(self.P) - 1

    @property
    def d(self) -> int:
        return len(self.E) - 1

    def field(self, **kwargs) -> VectorField:
        z = Var("z")
        ast = ExprAst(div(func("exp", poly(self.E, z)), poly(self.P, z)))
        kwargs.setdefault("label", f"exp({poly_text(self.E)})/({poly_text(self.P)})")
        return VectorField(ast, **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": "exponential",
            "P": [encode_complex(c) for c in self.P],
            "E": [encode_complex(c) for c in self.E],
            "r": self.r,
            "d": self.d,
        }


def poly_text(coeffs: Sequence[complex], variable: str = "z") -> str:
    return ExprAst(poly(coeffs, Var(variable)), variable).text


@dataclass
class ExponentialPrediction:
    critical_points: List[complex]
    critical_values: List[complex]
    asymptotic_value_count: int
    finite_directions: List[float]
    infinite_directions: List[float]
    pairings: List[Tuple[float, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "critical_points": [encode_complex(z) for z in self.critical_points],
            "critical_values": [encode_complex(v) for v in self.critical_values],
            "asymptotic_value_count": self.asymptotic_value_count,
            "finite_directions": self.finite_directions,
            "infinite_directions": self.infinite_directions,
            "pairings": [list(p) for p in self.pairings],
        }


def analyze_exponential(member: ExponentialFamilyMember,
                        settings: AnalysisSettings = DEFAULT_SETTINGS) -> ExponentialPrediction:
    """
    r critical points at the roots of P and 2d asymptotic values

    Psi is finite along directions where Re(e_d z^d) -> +inf and diverges where it
    tends to -inf. Each finite direction pairs with the next diverging one: the two
    bound an entire sector.
    """
    field = member.field()
    roots = polish_roots(member.P)
    values = []
    for p in roots:
        try:
            values.append(psi_value(field, p, settings))
        except (PathThroughSingularityError, NonConvergentError) as e:
            get_logger().warning("Critical value at %s unavailable: %s", p, e)
            values.append(complex(math.nan, math.nan))

    d = member.d
    phase = cmath.phase(member.E[-1])
    finite = sorted(((2 * math.pi * j - phase) / d) % (2 * math.pi) for j in range(d))
    infinite = sorted(((2 * math.pi * j + math.pi - phase) / d) % (2 * math.pi) for j in range(d))
    pairings = [(a, (a + math.pi / d) % (2 * math.pi)) for a in finite]
    return ExponentialPrediction(roots, values, 2 * d, finite, infinite, pairings)


# ---------------------------------------------------------------------------
# R(exp(2 pi i z / T))
# ---------------------------------------------------------------------------

def scaled_resultant(numerator: Sequence[complex], denominator: Sequence[complex]) -> float:
    """Sylvester resultant normalised by the coefficient scale"""
    a = np.asarray(numerator, dtype=complex)[::-1]
    b = np.asarray(denominator, dtype=complex)[::-1]
    m, n = len(a) - 1, len(b) - 1
    if m == 0 or n == 0:
        return 1.0
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    size = m + n
    sylvester = np.zeros((size, size), dtype=complex)
    for i in range(n):
        sylvester[i, i:i + m + 1] = a
    for i in range(m):
        sylvester[n + i, i:i + n + 1] = b
    return float(abs(np.linalg.det(sylvester)))


@dataclass(frozen=True)
class PeriodicFamilyMember:
    """Psi = N(w)/D(w) with w = exp(2 pi i z / T), coefficients lowest degree first"""
    numerator: Tuple[complex, ...]
    denominator: Tuple[complex, ...]
    period: complex = 2 * math.pi

    def __post_init__(self):
        object.__setattr__(self, "numerator", _coefficients(self.numerator, "numerator"))
        object.__setattr__(self, "denominator", _coefficients(self.denominator, "denominator"))
        object.__setattr__(self, "period", complex(self.period))
        if self.period == 0:
            raise InvalidFamilyMemberError("The period T must be nonzero")
        if self.degree < 1:
            raise InvalidFamilyMemberError("R must have degree >= 1")
        resultant = scaled_resultant(self.numerator, self.denominator)
        if resultant < DEFAULT_SETTINGS.resultant_tol:
            raise DegenerateRationalError(resultant)

    @classmethod
    def from_expression(cls, source: str, period: complex = 2 * math.pi) -> "PeriodicFamilyMember":
        numerator, denominator = to_rational(parse(source, "w"))
        return cls(tuple(numerator), tuple(denominator), period)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PeriodicFamilyMember":
        try:
            period = decode_complex(data.get("T", 2 * math.pi))
            if "R" in data:
                return cls.from_expression(data["R"], period)
            return cls(tuple(data["numerator"]), tuple(data["denominator"]), period)
        except KeyError as e:
            raise InvalidFamilyMemberError(f"Missing family key {e}")

    @property
    def r(self) -> int:
        return len(self.numerator) - 1

    @property
    def s(self) -> int:
        return len(self.denominator) - 1

    @property
    def degree(self) -> int:
        return max(self.r, self.s)

    def rational(self, w: complex) -> complex:
        den = P.polyval(w, self.denominator)
        if den == 0:
            return INFINITY
        return complex(P.polyval(w, self.numerator) / den)

    def psi_ast(self) -> ExprAst:
        w = func("exp", mul(lit(2j * math.pi / self.period), Var("z")))
        return ExprAst(div(poly(self.numerator, w), poly(self.denominator, w)))

    def field(self, **kwargs) -> VectorField:
        kwargs.setdefault("label", f"periodic R={self.rational_text()} T={self.period:.6g}")
        return VectorField.from_psi(self.psi_ast(), **kwargs)

    def rational_text(self) -> str:
        return f"({poly_text(self.numerator, 'w')})/({poly_text(self.denominator, 'w')})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": "periodic",
            "numerator": [encode_complex(c) for c in self.numerator],
            "denominator": [encode_complex(c) for c in self.denominator],
            "T": encode_complex(self.period),
            "degree": self.degree,
        }


@dataclass
class PeriodicPrediction:
    a0: complex
    a_inf: complex
    case: str
    zero_accumulation: bool
    pole_accumulation: bool
    zero_order: Optional[int]
    tract_types: Dict[str, TractType] = dataclass_field(default_factory=dict)
    rays: Dict[str, complex] = dataclass_field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a0": encode_complex(self.a0),
            "a_inf": encode_complex(self.a_inf),
            "case": self.case,
            "zero_accumulation": self.zero_accumulation,
            "pole_accumulation": self.pole_accumulation,
            "zero_order": self.zero_order,
            "tract_types": {k: v.value for k, v in self.tract_types.items()},
            "rays": {k: encode_complex(v) for k, v in self.rays.items()},
        }


def _same_value(a: complex, b: complex, tol: float = 1e-12) -> bool:
    if is_infinite(a) or is_infinite(b):
        return is_infinite(a) and is_infinite(b)
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def periodic_case(a0: complex, a_inf: complex) -> str:
    """Configuration of {a0, a_inf, infinity}"""
    infinite = is_infinite(a0) + is_infinite(a_inf)
    if infinite == 2:
        return "iv"
    if infinite == 1:
        return "iii"
    return "ii" if _same_value(a0, a_inf) else "i"


def analyze_periodic(member: PeriodicFamilyMember) -> PeriodicPrediction:
    """
    Asymptotic values from the coefficients, never from evaluation at a large argument

    Poles of f come from critical points of R in C* with finite critical values; zeros
    of f from poles of R in C*, which exist exactly when infinity is not an asymptotic
    value.
    """
    c, b = member.numerator, member.denominator
    a0 = INFINITY if abs(b[0]) <= COEFFICIENT_TOL else c[0] / b[0]
    if member.r > member.s:
        a_inf = INFINITY
    elif member.r < member.s:
        a_inf = 0j
    else:
        a_inf = c[-1] / b[-1]

    wronskian = P.polysub(P.polymul(P.polyder(c), b), P.polymul(c, P.polyder(b))) \
        if len(c) > 1 or len(b) > 1 else np.zeros(1)
    critical = []
    if np.any(np.abs(wronskian) > COEFFICIENT_TOL):
        trimmed = np.trim_zeros(np.asarray(wronskian, dtype=complex), "b")
        for w in polish_roots(trimmed):
            if abs(w) > 1e-9 and abs(P.polyval(w, b)) > 1e-9 * max(1.0, abs(w)) ** member.s:
                critical.append(w)

    poles_of_r = [w for w in polish_roots(b) if abs(w) > 1e-9] if member.s >= 1 else []
    zero_accumulation = not (is_infinite(a0) or is_infinite(a_inf))
    zero_order = None
    if poles_of_r:
        counts = [sum(1 for v in poles_of_r if abs(v - w) < 1e-6) for w in poles_of_r]
        zero_order = min(counts) + 1

    unit = member.period / abs(member.period)
    prediction = PeriodicPrediction(
        a0=a0, a_inf=a_inf, case=periodic_case(a0, a_inf),
        zero_accumulation=zero_accumulation and bool(poles_of_r),
        pole_accumulation=bool(critical), zero_order=zero_order,
        rays={"a0": 1j * unit, "a_inf": -1j * unit})
    for name, value in (("a0", a0), ("a_inf", a_inf)):
        prediction.tract_types[name] = TractType.ELLIPTIC if is_infinite(value) else TractType.HYPERBOLIC
    return prediction


def _unit_disk_sample(rng: np.random.Generator, count: int) -> np.ndarray:
    radius = np.sqrt(rng.random(count))
    angle = 2 * math.pi * rng.random(count)
    return radius * np.exp(1j * angle)


def random_periodic_member(rng: np.random.Generator, degree: int,
                           attempts: int = 100) -> PeriodicFamilyMember:
    """
    Coefficients sampled in the unit polydisk, filtered for validity

    Constant terms are zeroed now and then so that every case of the table occurs.
    """
    for _ in range(attempts):
        r, s = degree, int(rng.integers(0, degree + 1))
        if rng.random() < 0.5:
            r, s = s, r
        numerator = _unit_disk_sample(rng, r + 1)
        denominator = _unit_disk_sample(rng, s + 1)
        choice = rng.random()
        if choice < 0.25 and s >= 1:
            denominator[0] = 0
        elif choice < 0.5 and r >= 1:
            numerator[0] = 0
        elif choice < 0.6 and r == s and abs(denominator[0]) > 0:
            # equal values at 0 and infinity
            numerator[-1] = numerator[0] * denominator[-1] / denominator[0]
        try:
            return PeriodicFamilyMember(tuple(numerator), tuple(denominator), 2 * math.pi)
        except (InvalidFamilyMemberError, DegenerateRationalError):
            continue
    raise InvalidFamilyMemberError(f"No valid member of degree {degree} after {attempts} draws")


# ---------------------------------------------------------------------------
# Cross-check against the numeric pipeline
# ---------------------------------------------------------------------------

@dataclass
class CrosscheckReport:
    member: Dict[str, Any]
    prediction: Dict[str, Any]
    matches: List[str] = dataclass_field(default_factory=list)
    mismatches: List[str] = dataclass_field(default_factory=list)
    observed: Dict[str, Any] = dataclass_field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        (self.matches if ok else self.mismatches).append(f"{name}: {detail}" if detail else name)

    @property
    def agrees(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> Dict[str, Any]:
        return {
            "member": self.member,
            "prediction": self.prediction,
            "observed": self.observed,
            "matches": self.matches,
            "mismatches": self.mismatches,
        }


def _limit_matches(observed, expected: complex, tol: float = 1e-6) -> bool:
    if is_infinite(expected):
        return observed.kind == LimitKind.DIVERGED
    return observed.kind == LimitKind.CONVERGED and abs(observed.value - expected) <= tol * max(1.0, abs(expected))


def _crosscheck_exponential(member: ExponentialFamilyMember, window: Window,
                            settings: AnalysisSettings, report: CrosscheckReport) -> None:
    prediction = analyze_exponential(member, settings)
    report.prediction = prediction.to_dict()
    field = member.field()
    points = scan_window(field, window, settings=settings)
    poles = [p for p in points if p.kind == PointKind.POLE]
    inside = [z for z in prediction.critical_points if _window_contains(window, z)]
    report.observed["critical_points"] = [encode_complex(p.point) for p in poles]
    report.check("critical point count", len(poles) == len(inside),
                 f"found {len(poles)}, predicted {len(inside)}")

    count = max(settings.rays, 4 * member.d)
    verdicts = probe_rays(field, count=count, settings=settings)
    values, sectors = distinct_limits(verdicts)
    report.observed["finite_values"] = [encode_complex(v) for v in values]
    report.observed["diverging_sectors"] = sectors
    report.check("finite asymptotic values", len(values) == member.d,
                 f"found {len(values)}, predicted {member.d}")
    report.check("diverging sectors", sectors == member.d, f"found {sectors}, predicted {member.d}")


def _window_contains(window: Window, z: complex) -> bool:
    x0, x1, y0, y1 = window
    return x0 < z.real < x1 and y0 < z.imag < y1


def _crosscheck_periodic(member: PeriodicFamilyMember, window: Window, settings: AnalysisSettings,
                         report: CrosscheckReport, taxonomy: bool) -> None:
    prediction = analyze_periodic(member)
    report.prediction = prediction.to_dict()
    field = member.field()
    points = scan_window(field, window, settings=settings)
    zeros = [p for p in points if p.kind == PointKind.ZERO]
    poles = [p for p in points if p.kind == PointKind.POLE]
    report.observed["zeros"] = [p.to_dict() for p in zeros]
    report.observed["poles"] = [p.to_dict() for p in poles]
    report.check("zero accumulation", bool(zeros) == prediction.zero_accumulation,
                 f"{len(zeros)} zeros in window")
    report.check("pole accumulation", bool(poles) == prediction.pole_accumulation,
                 f"{len(poles)} poles in window")
    if zeros and prediction.zero_order:
        orders = {p.multiplicity for p in zeros}
        residues_vanish = all(p.residue is None or abs(p.residue) < 1e-6 for p in zeros)
        report.check("zero multiplicity", orders == {prediction.zero_order} and residues_vanish,
                     f"orders {sorted(orders)}")

    singularities = {}
    for name, expected in (("a0", prediction.a0), ("a_inf", prediction.a_inf)):
        ray = RaySpec(field.base_point, prediction.rays[name])
        try:
            observed = asymptotic_value_along_path(field, ray, settings)
        except PathHitsSingularityError as e:
            report.check(f"{name} probe", False, str(e))
            continue
        report.observed[name] = observed.to_dict()
        report.check(f"{name} probe", _limit_matches(observed, expected),
                     f"{observed.kind.value} {encode_complex(observed.value)}")
        singularities[name] = ray

    if taxonomy and len(singularities) == 2:
        catalogue = build_catalogue(field, window, scan=False, settings=settings)
        found = {}
        for name, ray in singularities.items():
            u = ray_singularity(field, ray, label=name, settings=settings)
            if u is not None:
                catalogue.singularities.append(u)
                found[name] = u
        for name, u in found.items():
            classify_inverse_singularity(field, u, catalogue, settings)
            if u.kind == SingularityKind.UNRESOLVED:
                report.observed[f"{name}_taxonomy"] = u.note
                continue
            expected = prediction.tract_types[name]
            report.check(f"{name} tract", u.kind == SingularityKind.LOGARITHMIC and u.tract == expected,
                         u.verdict)


def crosscheck(member, window: Window = (-10.0, 10.0, -10.0, 10.0),
               settings: AnalysisSettings = DEFAULT_SETTINGS, taxonomy: bool = False) -> CrosscheckReport:
    """
    Compare family predictions with the numeric pipeline over a window

    Mismatches are data: they are listed in the report, never raised.
    """
    logger = get_logger()
    report = CrosscheckReport(member=member.to_dict(), prediction={})
    if isinstance(member, ExponentialFamilyMember):
        _crosscheck_exponential(member, window, settings, report)
    else:
        _crosscheck_periodic(member, window, settings, report, taxonomy)
    logger.info("Crosscheck: %d matches, %d mismatches", len(report.matches), len(report.mismatches))
    return report
