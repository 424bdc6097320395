"""
Real flow of Re X: flow-box time, adaptive trajectories and completeness

Psi(z) = integral of dz/f, so along an exact trajectory of dz/dtau = d f(z) the flow-box
coordinate advances by exactly d * tau. Every accepted step is checked against this.
"""

import cmath
import math
import warnings
from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad

from .config import AnalysisSettings, DEFAULT_SETTINGS
from .exceptions import (
    EvalOverflowError, EvalPoleError, NonConvergentError, PathThroughSingularityError,
)
from .expr import POLE_THRESHOLD
from .field import VectorField
from .logger import get_logger
from .models import (
    Completeness, CompletenessReport, Trajectory, TrajectoryVerdict,
)


Window = Tuple[float, float, float, float]

# Cash-Karp embedded pair (the field is autonomous, so stage times are not needed)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_BERR = (-277 / 64512, 0.0, 6925 / 370944, -6925 / 202752, -277 / 14336, 277 / 7084)

CAPTURE_GROWTH = 1e4
ESCAPE_GROWTH = 1e8
OVERFLOW_LEVEL = 1e250
CHART_FLOOR = 1e-9
DIVERGENCE_CAP = 1e12


@lru_cache(maxsize=4)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


@dataclass(frozen=True)
class Budget:
    """Stopping conditions for one trajectory"""
    max_tau: float = 50.0
    max_steps: int = 20000
    window: Optional[Window] = None
    stop_near: Optional[Tuple[complex, float]] = None
    poles: Tuple[complex, ...] = ()

    @classmethod
    def from_settings(cls, settings: AnalysisSettings, **kwargs) -> "Budget":
        kwargs.setdefault("max_tau", settings.max_tau)
        kwargs.setdefault("max_steps", settings.max_steps)
        return cls(**kwargs)


def in_window(z: complex, window: Optional[Window]) -> bool:
    if window is None:
        return True
    x0, x1, y0, y1 = window
    return x0 <= z.real <= x1 and y0 <= z.imag <= y1


def _unit(direction) -> complex:
    if isinstance(direction, str):
        direction = -1.0 if direction.strip() in ("-", "backward") else 1.0
    d = complex(direction)
    if d == 0:
        raise ValueError("Direction must be nonzero")
    return d / abs(d)


# ---------------------------------------------------------------------------
# Time along paths
# ---------------------------------------------------------------------------

def segment_time(field: VectorField, a: complex, b: complex, order: int = 10) -> complex:
    """
    Integral of dz/f along the chord a -> b by fixed-order Gauss-Legendre

    Falls back to adaptive quadrature when the rule produces a non-finite value.

    Raises:
        PathThroughSingularityError: a node lands on a zero of f
    """
    nodes, weights = _gauss_legendre(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    total = 0j
    for x, w in zip(nodes, weights):
        total += w * field.time_density(mid + half * x)
    total *= half
    if not cmath.isfinite(total):
        return flow_time(field, [a, b])
    return total


def _quad_segment(field: VectorField, a: complex, b: complex, settings: AnalysisSettings) -> complex:
    delta = b - a

    def real_part(t: float) -> float:
        return (delta * field.time_density(a + t * delta)).real

    def imag_part(t: float) -> float:
        return (delta * field.time_density(a + t * delta)).imag

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            re, _ = quad(real_part, 0.0, 1.0, epsrel=settings.quad_rtol, epsabs=1e-14, limit=200)
            im, _ = quad(imag_part, 0.0, 1.0, epsrel=settings.quad_rtol, epsabs=1e-14, limit=200)
        except IntegrationWarning as e:
            raise NonConvergentError(f"Quadrature from {a} to {b} did not converge: {e}")
    return complex(re, im)


def _check_vertex(field: VectorField, z: complex) -> None:
    try:
        value = field(z)
    except (EvalPoleError, EvalOverflowError):
        return
    if abs(value) < POLE_THRESHOLD:
        raise PathThroughSingularityError(z)


def flow_time(field: VectorField, path: Sequence[complex], max_segment: Optional[float] = None,
              settings: AnalysisSettings = DEFAULT_SETTINGS) -> complex:
    """
    Integral of dz/f along a polyline

    Real and imaginary parts go through adaptive Gauss-Kronrod quadrature with relative
    tolerance quad_rtol. Segments longer than max_segment are subdivided.

    Raises:
        PathThroughSingularityError: the path meets a zero of f
        NonConvergentError: quadrature reported an integration warning
    """
    points = [complex(z) for z in path]
    total = 0j
    for a, b in zip(points, points[1:]):
        _check_vertex(field, a)
        _check_vertex(field, 0.5 * (a + b))
        pieces = 1
        if max_segment and abs(b - a) > max_segment:
            pieces = int(math.ceil(abs(b - a) / max_segment))
        for k in range(pieces):
            u = a + (b - a) * k / pieces
            v = a + (b - a) * (k + 1) / pieces
            total += _quad_segment(field, u, v, settings)
    if points:
        _check_vertex(field, points[-1])
    return total


def psi_value(field: VectorField, z: complex, settings: AnalysisSettings = DEFAULT_SETTINGS) -> complex:
    """
    Psi(z) anchored at the base point of the field

    Uses the closed form when the field carries one, otherwise quadrature along the
    straight path from the base point with two detours if that path meets a zero.
    """
    z = complex(z)
    if field.psi is not None:
        return field.psi(z)
    base = field.base_point
    if z == base:
        return field.base_value
    # detours bend off the chord along its normal
    normal = 1j * (z - base) / abs(z - base)
    offset = (0.5 * abs(z - base) + 0.5) * normal
    mid = 0.5 * (base + z)
    last_error: Exception = PathThroughSingularityError(z)
    for path in ([base, z], [base, mid + offset, z], [base, mid - offset, z]):
        try:
            return field.base_value + flow_time(field, path, settings=settings)
        except (PathThroughSingularityError, NonConvergentError) as e:
            last_error = e
    raise last_error


# ---------------------------------------------------------------------------
# Dyadic tails
# ---------------------------------------------------------------------------

@dataclass
class TailEstimate:
    """Integral of dz/f over segments of doubling length"""
    status: str  # converged, divergent, inconclusive
    value: complex = 0j
    partials: List[complex] = dataclass_field(default_factory=list)
    points: List[complex] = dataclass_field(default_factory=list)


def dyadic_points(start: complex, direction: complex, length: float,
                  count: int) -> Iterator[complex]:
    """start + (2^j - 1) * length * direction for j = 0..count"""
    for j in range(count + 1):
        yield start + (2.0 ** j - 1.0) * length * direction


def dyadic_partials(field: VectorField, points: Sequence[complex]) -> Iterator[Tuple[complex, complex]]:
    """Running (point, integral) pairs along consecutive chords"""
    total = 0j
    iterator = iter(points)
    previous = next(iterator)
    for point in iterator:
        total += segment_time(field, previous, point, order=20)
        yield point, total
        previous = point


def _tail(field: VectorField, points: Sequence[complex], settings: AnalysisSettings) -> TailEstimate:
    estimate = TailEstimate("inconclusive")
    increments: List[float] = []
    previous = 0j
    try:
        for point, total in dyadic_partials(field, points):
            increments.append(abs(total - previous))
            previous = total
            estimate.points.append(point)
            estimate.partials.append(total)
            estimate.value = total
            if len(increments) >= 3 and \
                    max(increments[-3:]) < settings.cauchy_tol * max(1.0, abs(total)):
                estimate.status = "converged"
                return estimate
            if abs(total) > DIVERGENCE_CAP:
                estimate.status = "divergent"
                return estimate
    except (PathThroughSingularityError, NonConvergentError) as e:
        get_logger().debug("Tail estimate stopped: %s", e)
        return estimate

    if len(increments) >= 6 and increments[-1] >= 0.5 * increments[-6]:
        estimate.status = "divergent"
    return estimate


def ray_tail(field: VectorField, start: complex, direction: complex,
             settings: AnalysisSettings = DEFAULT_SETTINGS) -> TailEstimate:
    """Time from start to infinity along the ray start + s * direction"""
    u = direction / abs(direction)
    length = max(1.0, abs(start))
    return _tail(field, list(dyadic_points(start, u, length, settings.max_doublings)), settings)


def point_tail(field: VectorField, start: complex, target: complex,
               settings: AnalysisSettings = DEFAULT_SETTINGS) -> TailEstimate:
    """Time from start to target over chords halving toward target"""
    points = [target + (start - target) * 0.5 ** j for j in range(settings.max_doublings + 1)]
    return _tail(field, points, settings)


# ---------------------------------------------------------------------------
# Integrator
# ---------------------------------------------------------------------------

def _rk_step(field: VectorField, z: complex, h: float, d: complex) -> Tuple[complex, complex]:
    """One Cash-Karp step: fifth-order solution and embedded error"""
    k: List[complex] = []
    for i in range(6):
        zi = z + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(d * field(zi))
    z5 = z + h * sum(b * kj for b, kj in zip(_B5, k))
    err = h * sum(e * kj for e, kj in zip(_BERR, k))
    return z5, err


@dataclass
class _State:
    field: VectorField
    chart: str
    z: complex
    tau: float = 0.0
    psi: complex = 0j


def _to_plane(state: _State) -> complex:
    if state.chart == "w":
        return 1.0 / state.z if state.z != 0 else complex(math.inf, 0)
    return state.z


def _min_on_circle(field: VectorField, p: complex, radius: float) -> float:
    values = []
    for k in range(4):
        try:
            values.append(abs(field(p + radius * cmath.exp(0.5j * math.pi * (k + 0.5)))))
        except (EvalPoleError, EvalOverflowError):
            values.append(math.inf)
    return min(values)


def _pole_like(field: VectorField, p: complex, distance: float) -> bool:
    """|f| grows at least like 1/|z - p| when closing in on p"""
    if distance == 0:
        return True
    outer = _min_on_circle(field, p, distance / 4)
    inner = _min_on_circle(field, p, distance / 16)
    return inner >= 3.0 * outer


def _pole_candidate(field: VectorField, z: complex, known: Sequence[complex],
                    capture: float) -> Optional[complex]:
    """Nearby pole of f from f/f' (order 1..6) refined by Newton on 1/f"""
    for p in known:
        if abs(z - p) < capture:
            return p
    try:
        f = field(z)
        df = field.derivative(z)
    except (EvalPoleError, EvalOverflowError):
        return None
    if df == 0:
        return None
    best: Optional[Tuple[float, complex, int]] = None
    for k in range(1, 7):
        p = z + k * f / df
        try:
            magnitude = abs(field(p))
        except (EvalPoleError, EvalOverflowError):
            magnitude = math.inf
        if best is None or magnitude > best[0]:
            best = (magnitude, p, k)
    assert best is not None
    _, p, k = best
    for _ in range(8):
        try:
            fp = field(p)
            dfp = field.derivative(p)
        except (EvalPoleError, EvalOverflowError):
            break
        if dfp == 0:
            break
        step = k * fp / dfp
        p = p + step
        if abs(step) < 1e-15 * (1 + abs(p)):
            break
    return p if _pole_like(field, p, abs(z - p)) else None


def _try_capture(state: _State, d: complex, known: Sequence[complex],
                 settings: AnalysisSettings) -> Optional[Tuple[complex, float]]:
    """Pole p ahead on the current streamline and the time left to reach it"""
    p = _pole_candidate(state.field, state.z, known, settings.pole_capture)
    if p is None or abs(p - state.z) > settings.pole_capture * (1 + abs(p)):
        return None
    try:
        remaining = segment_time(state.field, state.z, p, order=20) / d
    except PathThroughSingularityError:
        return None
    if remaining.real < -settings.streamline_tol or abs(remaining.imag) > settings.streamline_tol:
        return None
    return p, max(0.0, remaining.real)


def integrate_real_flow(field: VectorField, z0: complex, direction=1.0,
                        budget: Optional[Budget] = None,
                        settings: AnalysisSettings = DEFAULT_SETTINGS) -> Trajectory:
    """
    Trajectory of dz/dtau = d f(z) by adaptive Cash-Karp RK5(4)

    A step is accepted when the embedded error is within rtol/atol and the chord
    increment of Psi stays on the streamline (|Im(dPsi / d)| < drift_tol).

    Verdicts:
        IncompleteAtPole: a pole is reached in finite time (final sample is the pole)
        IncompleteEscape: the time to infinity is finite
        Complete: escape to infinity takes infinite time
        BudgetExhausted: any other stop; stop_reason tells which
    """
    logger = get_logger()
    d = _unit(direction)
    budget = budget or Budget.from_settings(settings)
    z0 = complex(z0)
    traj = Trajectory(seed=z0, direction=d, taus=[0.0], points=[z0])

    try:
        f0 = field(z0)
    except (EvalPoleError, EvalOverflowError):
        traj.stop_reason = "singular_seed"
        traj.witness.append("seed is a pole or overflow point")
        return traj
    if abs(f0) < POLE_THRESHOLD:
        traj.verdict = TrajectoryVerdict.COMPLETE
        traj.tau_infinite = True
        traj.stop_reason = "stationary"
        traj.witness.append("seed is a zero of f")
        return traj

    state = _State(field, field.chart, z0)
    scale = max(1.0, abs(f0))
    capture_level = CAPTURE_GROWTH * scale
    escape_level = ESCAPE_GROWTH * scale
    h = min(budget.max_tau, 0.05 * (1.0 + abs(z0)) / abs(f0))
    steps = 0
    stage_singular = False
    floor_tried = False

    def finish(reason: str) -> Trajectory:
        traj.stop_reason = reason
        traj.tau_max = traj.taus[-1]
        traj.psi_span = state.psi
        return traj

    while True:
        if state.tau >= budget.max_tau * (1 - 1e-14):
            return finish("max_tau")
        if steps >= budget.max_steps:
            return finish("max_steps")
        h = min(h, budget.max_tau - state.tau)
        steps += 1

        accepted = False
        try:
            z_new, err = _rk_step(state.field, state.z, h, d)
            stage_singular = False
            scale_z = max(abs(state.z), abs(z_new))
            norm = abs(err) / (settings.atol + settings.rtol * scale_z) if cmath.isfinite(err) else math.inf
            if norm <= 1.0:
                delta = segment_time(state.field, state.z, z_new)
                drift = abs((delta / d).imag)
                if drift <= settings.drift_tol:
                    accepted = True
                else:
                    logger.debug("Step rejected for drift %.2e at %s", drift, state.z)
                    norm = max(norm, 2.0)
        except (EvalPoleError, EvalOverflowError, PathThroughSingularityError):
            stage_singular = True
            norm = math.inf

        if not accepted:
            if h <= settings.step_floor:
                captured = _try_capture(state, d, budget.poles, settings)
                if captured:
                    return _close_at_pole(traj, state, captured, finish)
                tail = _escape_tail(state, d, settings)
                if tail is not None:
                    return _close_escape(traj, state, tail, finish)
                traj.witness.append("step size fell below the floor")
                return finish("overflow" if stage_singular else "step_floor")
            factor = 0.25 if not math.isfinite(norm) else max(0.2, 0.9 * norm ** -0.2)
            h = max(settings.step_floor, h * min(factor, 0.5))
            continue

        state.z = z_new
        state.tau += h
        state.psi += delta
        plane = _to_plane(state)
        traj.taus.append(state.tau)
        traj.points.append(plane)
        traj.psi_drift = max(traj.psi_drift, abs((state.psi / d).imag))
        h *= min(5.0, max(0.2, 0.9 * (norm ** -0.2 if norm > 0 else 5.0)))

        if budget.stop_near and abs(plane - budget.stop_near[0]) < budget.stop_near[1]:
            return finish("target")
        if not in_window(plane, budget.window):
            return finish("window")

        try:
            magnitude = abs(state.field(state.z))
        except (EvalPoleError, EvalOverflowError):
            magnitude = math.inf

        near_known = state.chart == "z" and any(abs(state.z - p) < settings.pole_capture
                                                for p in budget.poles)
        if magnitude > capture_level or near_known:
            captured = _try_capture(state, d, budget.poles, settings)
            if captured:
                return _close_at_pole(traj, state, captured, finish)

        if state.chart == "z" and (magnitude > escape_level or magnitude > OVERFLOW_LEVEL):
            tail = _escape_tail(state, d, settings)
            if tail is not None:
                return _close_escape(traj, state, tail, finish)
            escape_level = magnitude * ESCAPE_GROWTH

        if state.chart == "z" and abs(state.z) > settings.escape_radius and field.chart == "z":
            logger.debug("Chart flip at |z| = %.3e, tau = %.6f", abs(state.z), state.tau)
            state.field = field.at_infinity()
            state.chart = "w"
            state.z = 1.0 / state.z
            try:
                h = min(h, 0.05 * abs(state.z) / max(abs(state.field(state.z)), 1e-300))
            except (EvalPoleError, EvalOverflowError):
                pass
        elif state.chart == "w" and abs(state.z) < CHART_FLOOR and not floor_tried:
            floor_tried = True
            tail = point_tail(state.field, state.z, 0j, settings)
            if tail.status in ("converged", "divergent"):
                return _close_escape(traj, state, tail, finish)


def _escape_tail(state: _State, d: complex, settings: AnalysisSettings) -> Optional["TailEstimate"]:
    """Ray tail along the current velocity; None unless it settles the question"""
    if state.chart != "z":
        return point_tail(state.field, state.z, 0j, settings) if abs(state.z) < 1e-3 else None
    try:
        velocity = d * state.field(state.z)
    except (EvalPoleError, EvalOverflowError):
        velocity = d * state.z if state.z != 0 else d
    tail = ray_tail(state.field, state.z, velocity, settings)
    if tail.status == "converged":
        remaining = tail.value / d
        if remaining.real >= 0 and abs(remaining.imag) <= 1e-6 * max(1.0, abs(remaining)):
            return tail
        return None
    if tail.status == "divergent" and abs(state.z) > settings.escape_radius:
        return tail
    return None


def _close_at_pole(traj: Trajectory, state: _State, captured: Tuple[complex, float],
                   finish) -> Trajectory:
    p, remaining = captured
    d = traj.direction
    plane = 1.0 / p if state.chart == "w" else p
    state.psi += remaining * d
    if remaining > 0:
        traj.taus.append(state.tau + remaining)
        traj.points.append(plane)
    else:
        traj.points[-1] = plane
    traj.verdict = TrajectoryVerdict.INCOMPLETE_AT_POLE
    traj.pole = plane
    traj.witness.append(f"pole reached with {remaining:.3e} time left at capture")
    get_logger().debug("Captured at pole %s, tau_max %.10f", plane, traj.taus[-1])
    return finish("pole")


def _close_escape(traj: Trajectory, state: _State, tail: TailEstimate, finish) -> Trajectory:
    d = traj.direction
    if tail.status == "divergent":
        traj.verdict = TrajectoryVerdict.COMPLETE
        traj.tau_infinite = True
        traj.witness.append("time to infinity diverges along the escape tail")
        result = finish("escape")
        return result
    remaining = (tail.value / d).real
    state.psi += tail.value
    traj.verdict = TrajectoryVerdict.INCOMPLETE_ESCAPE
    traj.witness.append(f"finite escape tail {remaining:.3e}")
    result = finish("escape")
    result.tau_max = state.tau + remaining
    return result


# ---------------------------------------------------------------------------
# Completeness
# ---------------------------------------------------------------------------

def _tends_to_zero(field: VectorField, traj: Trajectory) -> bool:
    points = traj.points
    if len(points) < 6:
        return False
    try:
        start = abs(field(traj.seed))
        tail = [abs(field(z)) for z in points[-(len(points) // 3):]]
    except (EvalPoleError, EvalOverflowError):
        return False
    decreasing = all(b <= a * (1 + 1e-9) for a, b in zip(tail, tail[1:]))
    return decreasing and tail[-1] < 1e-3 * start


def completeness_report(field: VectorField, traj: Trajectory,
                        settings: AnalysisSettings = DEFAULT_SETTINGS) -> CompletenessReport:
    """
    Refine a trajectory verdict with the finite-time criterion

    Incomplete trajectories report the time to blow-up. An escape carries the asymptotic
    value a = Psi(seed) + tau_max * direction, a finite singular value of Psi.
    """
    d = traj.direction
    if traj.verdict == TrajectoryVerdict.INCOMPLETE_AT_POLE:
        return CompletenessReport(
            Completeness.INCOMPLETE, time_to_blowup=traj.tau_max,
            witness=f"arrives at the pole {traj.pole} in finite time (critical point of Psi)")
    if traj.verdict == TrajectoryVerdict.INCOMPLETE_ESCAPE:
        return CompletenessReport(
            Completeness.INCOMPLETE, time_to_blowup=traj.tau_max,
            asymptotic_value=psi_value(field, traj.seed, settings) + traj.tau_max * d,
            witness="escapes in finite time")
    if traj.verdict == TrajectoryVerdict.COMPLETE:
        return CompletenessReport(Completeness.COMPLETE, witness="; ".join(traj.witness))

    if _tends_to_zero(field, traj):
        return CompletenessReport(
            Completeness.COMPLETE,
            witness="|f| decreases to 0: the trajectory limits to a zero in infinite time")

    end = traj.end
    try:
        velocity = d * field(end)
    except (EvalPoleError, EvalOverflowError):
        return CompletenessReport(Completeness.INCONCLUSIVE, witness="continuation starts at a singular value")
    tail = ray_tail(field, end, velocity, settings)
    if tail.status == "divergent":
        return CompletenessReport(
            Completeness.COMPLETE, witness="time along the continuation ray diverges")
    if tail.status == "converged":
        remaining = tail.value / d
        if remaining.real >= 0 and abs(remaining.imag) <= 1e-6 * max(1.0, abs(remaining)):
            total = traj.tau_max + remaining.real
            return CompletenessReport(
                Completeness.INCOMPLETE, time_to_blowup=total,
                asymptotic_value=psi_value(field, traj.seed, settings) + total * d,
                witness=f"continuation ray adds {remaining.real:.6e}")
    return CompletenessReport(
        Completeness.INCONCLUSIVE, witness="continuation estimate did not settle within budget")
