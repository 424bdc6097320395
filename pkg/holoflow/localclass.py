"""
Local classification of singular points: argument principle, residue of the time
form, and sector census of Re X on a probe circle
"""

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import AnalysisSettings, DEFAULT_SETTINGS
from .exceptions import (
    CensusUnstableError, EvalOverflowError, EvalPoleError, NonConvergentError,
    NonIntegerWindingError, OnCircleSingularityError,
)
from .expr import POLE_THRESHOLD
from .field import VectorField
from .flow import Budget, integrate_real_flow
from .logger import get_logger
from .models import Census, LocalClass, PointKind


NEAR_VANISHING = 1e-12
RADIAL_FLAT = 1e-9


@dataclass
class Probe:
    """One circle of the argument principle"""
    radius: float
    winding: int
    decades: float


def _circle(center: complex, radius: float, n: int, offset: float = 0.0):
    theta = 2.0 * np.pi * (np.arange(n) + offset) / n
    return theta, center + radius * np.exp(1j * theta)


def _sample(field: VectorField, points: np.ndarray) -> np.ndarray:
    values = np.empty(len(points), dtype=complex)
    for k, z in enumerate(points):
        try:
            values[k] = field(complex(z))
        except (EvalPoleError, EvalOverflowError):
            raise OnCircleSingularityError(f"Singular value on the probe circle at z = {complex(z)}")
    magnitudes = np.abs(values)
    smallest = magnitudes.min()
    if smallest < POLE_THRESHOLD or smallest < NEAR_VANISHING * np.median(magnitudes):
        raise OnCircleSingularityError(f"f nearly vanishes on the probe circle (min |f| = {smallest:.3e})")
    return values


def _probe(field: VectorField, center: complex, radius: float, n: int,
           tolerance: float) -> Probe:
    _, points = _circle(center, radius, n)
    values = _sample(field, points)
    magnitudes = np.abs(values)

    steps = np.angle(np.roll(values, -1) / values)
    if np.max(np.abs(steps)) > np.pi / 2:
        raise NonIntegerWindingError(float(steps.sum() / (2 * np.pi)))

    try:
        derivs = np.array([field.derivative(complex(z)) for z in points])
        value = float(np.mean(derivs / values * (points - center)).real)
    except (EvalPoleError, EvalOverflowError):
        value = float(steps.sum() / (2 * np.pi))

    if abs(value - round(value)) > tolerance:
        raise NonIntegerWindingError(value)

    decades = float(np.log10(magnitudes.max() / magnitudes.min()))
    return Probe(radius, int(round(value)), decades)


def winding_number(field: VectorField, center: complex, radius: float,
                   settings: AnalysisSettings = DEFAULT_SETTINGS) -> int:
    """
    Zeros minus poles enclosed by the circle |z - center| = radius

    Raises:
        OnCircleSingularityError: f vanishes or blows up on or near the circle
        NonIntegerWindingError: the accumulated argument is not close to an integer
    """
    return _probe(field, center, radius, settings.probe_samples, settings.winding_tol).winding


def _residue_sum(field: VectorField, p: complex, radius: float, n: int) -> complex:
    _, points = _circle(p, radius, n)
    values = _sample(field, points)
    return complex(np.mean((points - p) / values))


def residue_of_time_form(field: VectorField, p: complex, radius: float,
                         settings: AnalysisSettings = DEFAULT_SETTINGS) -> complex:
    """
    (1/2 pi i) times the integral of dz/f over the circle around p

    Trapezoid sums with N and 2N samples must agree.

    Raises:
        OnCircleSingularityError: as for winding_number
        NonConvergentError: the doubled sum moved by more than residue_tol
    """
    n = settings.probe_samples
    coarse = _residue_sum(field, p, radius, n)
    fine = _residue_sum(field, p, radius, 2 * n)
    if abs(fine - coarse) > settings.residue_tol * max(1.0, abs(fine)):
        raise NonConvergentError(
            f"Residue at {p} not converged: {coarse} vs {fine} (radius {radius})")
    return fine


def _windings_agree(probes: Sequence[Probe]) -> bool:
    return len({probe.winding for probe in probes}) == 1


def _is_essential(probes: Sequence[Probe], settings: AnalysisSettings,
                  last_attempt: bool) -> Optional[str]:
    if not _windings_agree(probes):
        # a neighbouring zero or pole inside the outer probe also changes the winding
        return "winding changes under radius refinement" if last_attempt else None
    decades = [probe.decades for probe in probes]
    if max(decades) >= settings.essential_decades:
        return f"|f| spans {max(decades):.1f} decades on the probe circle"
    growing = all(b > a for a, b in zip(decades, decades[1:]))
    if growing and decades[-1] > 2.0:
        return f"|f| range grows under refinement ({decades[0]:.1f} to {decades[-1]:.1f} decades)"
    return None


def classify_point(field: VectorField, p: complex, probe_radius: Optional[float] = None,
                   settings: AnalysisSettings = DEFAULT_SETTINGS,
                   census: bool = True) -> LocalClass:
    """
    Classify p as Regular, Zero(s), Pole(-k) or Essential

    Three concentric probes (r, r/2, r/4) must agree on the winding number. The radius
    is halved, up to probe_shrinks times, while a probe fails or the windings disagree.
    Undetermined is returned when every attempt fails.
    """
    logger = get_logger()
    radius = probe_radius or settings.probe_radius
    failures: List[str] = []

    for attempt in range(settings.probe_shrinks + 1):
        probes: List[Probe] = []
        for scale in (1.0, 0.5, 0.25):
            try:
                probes.append(_probe(field, p, radius * scale, settings.probe_samples,
                                     settings.winding_tol))
            except (OnCircleSingularityError, NonIntegerWindingError) as e:
                failures.append(f"r={radius * scale:.3g}: {e}")
                logger.debug("Probe at %s radius %.3g failed: %s", p, radius * scale, e)

        if len(probes) >= 2:
            reason = _is_essential(probes, settings, attempt == settings.probe_shrinks)
            if reason:
                logger.debug("Essential point at %s: %s", p, reason)
                return LocalClass(p, PointKind.ESSENTIAL, probe_radius=radius, note=reason)
        if len(probes) == 3 and _windings_agree(probes):
            break
        radius *= 0.5
    else:
        logger.warning("All probes failed at %s", p)
        return LocalClass(p, PointKind.UNDETERMINED, probe_radius=radius,
                          note="; ".join(failures[-3:]))

    m = probes[0].winding
    if m == 0:
        note = "" if field.is_regular(p) else "removable: f is not finite and nonzero at p"
        return LocalClass(p, PointKind.REGULAR, probe_radius=radius, note=note)

    result = LocalClass(p, PointKind.ZERO if m > 0 else PointKind.POLE, multiplicity=m,
                        probe_radius=radius)
    if m > 0:
        try:
            result.residue = residue_of_time_form(field, p, radius, settings)
        except NonConvergentError as e:
            result.note = str(e)
    if census:
        try:
            result.census = sector_census(field, p, radius, settings=settings, kind=result.kind,
                                          multiplicity=m)
        except CensusUnstableError as e:
            logger.warning("%s", e)
            result.note = str(e)
    return result


def classify_infinity(field: VectorField,
                      settings: AnalysisSettings = DEFAULT_SETTINGS) -> LocalClass:
    """Classify the point at infinity through the chart w = 1/z"""
    result = classify_point(field.at_infinity(), 0j, settings=settings)
    result.point = complex(math.inf, 0.0)
    return result


# ---------------------------------------------------------------------------
# Sector census
# ---------------------------------------------------------------------------

def _radial(field: VectorField, p: complex, radius: float):
    """v(theta) = Re(conj(z - p) f(z)), positive where the flow leaves the circle"""
    def v(theta: float) -> float:
        z = p + radius * cmath.exp(1j * theta)
        return float((((z - p).conjugate()) * field(z)).real)
    return v


def _tangencies(field: VectorField, p: complex, radius: float,
                n: int) -> Tuple[List[float], np.ndarray, bool]:
    """Angles where the radial component changes sign, the sampled component, flatness"""
    theta, points = _circle(p, radius, n, offset=0.5)
    values = _sample(field, points)
    v = ((points - p).conjugate() * values).real
    if np.max(np.abs(v)) < RADIAL_FLAT * radius * np.abs(values).max():
        return [], v, True

    radial = _radial(field, p, radius)
    roots: List[float] = []
    for k in range(n):
        a, b = theta[k], theta[k] + 2 * np.pi / n
        va, vb = v[k], v[(k + 1) % n]
        if va == 0.0:
            roots.append(float(a % (2 * np.pi)))
        elif va * vb < 0:
            roots.append(float(brentq(radial, a, b, xtol=1e-13) % (2 * np.pi)))
    return sorted(roots), v, False


def _curvature(field: VectorField, p: complex, q: complex) -> float:
    """Second tau-derivative of |z - p|^2 along the trajectory through q"""
    f = field(q)
    return float(2 * abs(f) ** 2 + 2 * ((q - p).conjugate() * field.derivative(q) * f).real)


def _count(field: VectorField, p: complex, radius: float, n: int):
    roots, v, flat = _tangencies(field, p, radius, n)
    hyperbolic = elliptic = 0
    for theta in roots:
        q = p + radius * cmath.exp(1j * theta)
        if _curvature(field, p, q) < 0:
            elliptic += 1
        else:
            hyperbolic += 1
    return hyperbolic, elliptic, roots, v, flat


def _leading_coefficient(field: VectorField, p: complex, radius: float, order: int,
                         n: int) -> complex:
    """c in f ~ c (z - p)^order, from the mean of f (z - p)^(-order) on the circle"""
    _, points = _circle(p, radius, n)
    values = _sample(field, points)
    return complex(np.mean(values * (points - p) ** (-order)))


def _parabolic_arcs(field: VectorField, p: complex, radius: float, roots: List[float],
                    n: int, settings: AnalysisSettings) -> Tuple[int, bool]:
    """
    Count arcs between tangencies where seeds fall into p one way and leave the other

    Returns (count, confident).
    """
    far = 50.0 * radius
    window = (p.real - far, p.real + far, p.imag - far, p.imag + far)
    theta, points = _circle(p, radius, n, offset=0.5)
    bounds = roots + [roots[0] + 2 * np.pi]
    parabolic = 0
    confident = True
    for a, b in zip(bounds, bounds[1:]):
        inside = [k for k in range(n) if a < theta[k] < b or a < theta[k] + 2 * np.pi < b]
        if len(inside) < 2:
            continue
        hits = 0
        for k in (inside[1:-1] or inside)[:4]:
            z = complex(points[k])
            f = field(z)
            inward = -1.0 if ((z - p).conjugate() * f).real > 0 else 1.0
            budget = Budget(max_tau=200.0 * radius / abs(f), max_steps=2000, window=window,
                            stop_near=(p, radius / 50.0))
            into = integrate_real_flow(field, z, inward, budget, settings)
            away = integrate_real_flow(field, z, -inward, budget, settings)
            if abs(into.end - p) < radius / 10.0 and abs(away.end - p) > 0.9 * far:
                hits += 1
            elif "max_steps" in (into.stop_reason, away.stop_reason):
                confident = False
        if hits >= 2:
            parabolic += 1
    return parabolic, confident


def sector_census(field: VectorField, p: complex, radius: float,
                  seeds: Optional[int] = None, settings: AnalysisSettings = DEFAULT_SETTINGS,
                  kind: Optional[PointKind] = None, multiplicity: int = 0) -> Census:
    """
    Hyperbolic, elliptic and parabolic sector counts around p

    Tangencies of Re X with the probe circle are the sign changes of the radial
    component. A tangency touched from inside bounds an elliptic sector, one touched
    from outside a hyperbolic sector. Counts from N and 2N seeds must agree.

    Raises:
        CensusUnstableError: counts differ between N and 2N seeds
        OnCircleSingularityError: the circle meets a zero or pole
    """
    n = seeds or settings.census_seeds
    if kind is None:
        try:
            multiplicity = winding_number(field, p, radius, settings)
        except NonIntegerWindingError:
            multiplicity = 0
        if multiplicity:
            kind = PointKind.ZERO if multiplicity > 0 else PointKind.POLE

    h1, e1, roots, v, flat = _count(field, p, radius, n)
    h2, e2, _, _, _ = _count(field, p, radius, 2 * n)
    if (h1, e1) != (h2, e2):
        raise CensusUnstableError((h1, e1), (h2, e2))

    census = Census(hyperbolic=h1, elliptic=e1, seeds=n)
    if kind == PointKind.ZERO and multiplicity == 1:
        if flat:
            census.pattern = "center"
        else:
            census.pattern = "source" if np.all(v > 0) else "sink"
            census.parabolic = 1
        return census

    if kind == PointKind.POLE:
        # only hyperbolic sectors occur at a pole
        k = -multiplicity
        c = _leading_coefficient(field, p, radius, multiplicity, settings.probe_samples)
        census.separatrix_angles = sorted(
            float(((cmath.phase(c) + j * math.pi) / (k + 1)) % (2 * math.pi))
            for j in range(2 * k + 2)
        )
        return census

    if roots:
        parabolic, confident = _parabolic_arcs(field, p, radius, roots, n, settings)
        census.parabolic = parabolic
        if not confident:
            census.confidence = "low"
    return census


# ---------------------------------------------------------------------------
# Window scan
# ---------------------------------------------------------------------------

Window = Tuple[float, float, float, float]


def _log_magnitude(field: VectorField, z: complex) -> float:
    try:
        value = field(z)
    except (EvalPoleError, EvalOverflowError):
        return math.inf
    magnitude = abs(value)
    return math.log(magnitude) if magnitude > 0 else -math.inf


def _newton(field: VectorField, z: complex, sign: float, iterations: int = 200) -> Optional[complex]:
    """Newton on f (sign -1) or on 1/f (sign +1); multiple roots converge linearly"""
    for _ in range(iterations):
        try:
            f = field(z)
            df = field.derivative(z)
        except (EvalPoleError, EvalOverflowError):
            return z if sign > 0 else None
        if abs(f) < POLE_THRESHOLD:
            return z if sign < 0 else None
        if df == 0:
            return None
        step = sign * f / df
        z = z + step
        if abs(step) < 1e-13 * (1.0 + abs(z)):
            return z
    return z


def scan_window(field: VectorField, window: Window, spacing: Optional[float] = None,
                settings: AnalysisSettings = DEFAULT_SETTINGS) -> List[LocalClass]:
    """
    Locate and classify the zeros and poles of f inside a rectangle

    log|f| is harmonic away from zeros and poles, so interior grid extrema mark
    candidates. Each candidate is refined by Newton's method, confirmed with
    classify_point and de-duplicated.
    """
    logger = get_logger()
    h = spacing or settings.scan_spacing
    x0, x1, y0, y1 = window
    xs = np.arange(x0, x1 + 0.5 * h, h)
    ys = np.arange(y0, y1 + 0.5 * h, h)
    grid = np.array([[_log_magnitude(field, complex(x, y)) for x in xs] for y in ys])

    candidates: List[Tuple[complex, float]] = []
    for j in range(1, len(ys) - 1):
        for i in range(1, len(xs) - 1):
            value = grid[j, i]
            neighbours = np.delete(grid[j - 1:j + 2, i - 1:i + 2].ravel(), 4)
            z = complex(xs[i], ys[j])
            if value == math.inf or (value > neighbours).all():
                candidates.append((z, 1.0))
            elif value == -math.inf or (value < neighbours).all():
                candidates.append((z, -1.0))
    logger.debug("Scan of %s found %d candidates", window, len(candidates))

    found: List[complex] = []
    for z, sign in candidates:
        root = _newton(field, z, sign)
        if root is None or abs(root - z) > 2 * h:
            continue
        if not (x0 <= root.real <= x1 and y0 <= root.imag <= y1):
            continue
        if any(abs(root - other) < 0.5 * h for other in found):
            continue
        found.append(root)

    found.sort(key=lambda w: (round(w.real, 6), round(w.imag, 6)))
    results: List[LocalClass] = []
    for k, z in enumerate(found):
        gaps = [abs(z - w) for j, w in enumerate(found) if j != k]
        radius = min([settings.probe_radius, h] + [0.25 * g for g in gaps])
        result = classify_point(field, z, radius, settings)
        if result.kind != PointKind.REGULAR:
            results.append(result)
    return results
