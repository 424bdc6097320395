"""
Phase portraits: streamlines of Re X, the separatrix skeleton and overlays
"""

import bisect
import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config import AnalysisSettings, Config, DEFAULT_SETTINGS, DEFAULT_STYLE
from .exceptions import (
    ConfigError, EvalOverflowError, EvalPoleError, HoloflowException, PathThroughSingularityError,
)
from .field import VectorField
from .flow import Budget, Window, integrate_real_flow, segment_time
from .localclass import scan_window
from .logger import get_logger
from .models import LocalClass, PointKind, TractRegion, Trajectory


STRATEGIES = ("psi", "grid", "boundary", "singularity")


@dataclass
class PortraitSpec:
    """What to draw and where"""
    window: Window
    density: float = 1.0
    strategy: str = "psi"
    tracts: List[TractRegion] = dataclass_field(default_factory=list)
    skeleton: bool = True
    census_glyphs: bool = True
    style: Dict[str, Any] = dataclass_field(default_factory=lambda: dict(DEFAULT_STYLE))
    max_tau: Optional[float] = None
    points: Optional[List[LocalClass]] = None

    def __post_init__(self):
        self.window = tuple(float(v) for v in self.window)
        if self.density <= 0:
            raise ConfigError(f"Streamline density must be positive, got {self.density}", key="density")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"Unknown seed strategy '{self.strategy}'", key="strategy")

    @property
    def is_empty(self) -> bool:
        x0, x1, y0, y1 = self.window
        return not (x1 > x0 and y1 > y0)

    @property
    def size(self) -> float:
        x0, x1, y0, y1 = self.window
        return max(x1 - x0, y1 - y0)

    @property
    def spacing(self) -> float:
        """Nominal distance between neighbouring streamlines"""
        return self.size / (12.0 * self.density)

    def margin_window(self, fraction: float = 0.05) -> Window:
        x0, x1, y0, y1 = self.window
        mx, my = fraction * (x1 - x0), fraction * (y1 - y0)
        return (x0 - mx, x1 + mx, y0 - my, y1 + my)


def _catalogue(field: VectorField, spec: PortraitSpec, settings: AnalysisSettings) -> List[LocalClass]:
    if spec.points is None:
        spec.points = scan_window(field, spec.window, settings=settings) if not spec.is_empty else []
    return spec.points


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

def _grid_seeds(spec: PortraitSpec, per_axis: int) -> List[complex]:
    x0, x1, y0, y1 = spec.window
    xs = x0 + (np.arange(per_axis) + 0.5) * (x1 - x0) / per_axis
    ys = y0 + (np.arange(per_axis) + 0.5) * (y1 - y0) / per_axis
    return [complex(x, y) for y in ys for x in xs]


def _boundary_seeds(spec: PortraitSpec, per_side: int) -> List[complex]:
    x0, x1, y0, y1 = spec.window
    t = (np.arange(per_side) + 0.5) / per_side
    seeds = [complex(x0 + s * (x1 - x0), y0) for s in t]
    seeds += [complex(x1, y0 + s * (y1 - y0)) for s in t]
    seeds += [complex(x1 - s * (x1 - x0), y1) for s in t]
    seeds += [complex(x0, y1 - s * (y1 - y0)) for s in t]
    return seeds


def _ring_seeds(spec: PortraitSpec, points: Sequence[LocalClass]) -> List[complex]:
    seeds = []
    radius = 0.5 * spec.spacing
    for point in points:
        if point.kind == PointKind.REGULAR:
            continue
        count = max(8, 2 * abs(point.multiplicity) + 2)
        offset = math.pi / count
        seeds += [point.point + radius * cmath.exp(1j * (offset + 2 * math.pi * j / count))
                  for j in range(count)]
    return seeds


def _sample_at(traj: Trajectory, tau: float) -> complex:
    k = bisect.bisect_left(traj.taus, tau)
    if k <= 0:
        return traj.points[0]
    if k >= len(traj.taus):
        return traj.points[-1]
    t0, t1 = traj.taus[k - 1], traj.taus[k]
    s = (tau - t0) / (t1 - t0) if t1 > t0 else 0.0
    return traj.points[k - 1] + s * (traj.points[k] - traj.points[k - 1])


def _regular_start(field: VectorField, spec: PortraitSpec) -> Optional[complex]:
    x0, x1, y0, y1 = spec.window
    center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    for k in range(12):
        z = center + 0.1 * k * spec.spacing * cmath.exp(1j * (0.7 + 2.1 * k))
        if field.is_regular(z):
            return z
    return None


def _psi_seeds(field: VectorField, spec: PortraitSpec, settings: AnalysisSettings) -> List[complex]:
    """
    Equal spacing in Im Psi: march the transversal dz/ds = i f (imaginary time), which
    moves Im Psi at unit rate, and seed at equal steps of s
    """
    start = _regular_start(field, spec)
    if start is None:
        return []
    budget = Budget(max_tau=spec.max_tau or settings.max_tau, max_steps=settings.max_steps // 4,
                    window=spec.window)
    up = integrate_real_flow(field, start, 1j, budget, settings)
    down = integrate_real_flow(field, start, -1j, budget, settings)
    span = up.tau_max + down.tau_max
    lines = max(2, int(round(12 * spec.density)))
    if span <= 0:
        return [start]
    delta = span / lines
    seeds = [_sample_at(down, down.tau_max - (j + 0.5) * delta)
             for j in range(lines) if (j + 0.5) * delta <= down.tau_max]
    seeds.reverse()
    seeds += [_sample_at(up, (j + 0.5) * delta - down.tau_max)
              for j in range(lines) if (j + 0.5) * delta > down.tau_max]
    return seeds


def seed_points(field: VectorField, spec: PortraitSpec,
                settings: AnalysisSettings = DEFAULT_SETTINGS) -> List[complex]:
    """Seeds for the chosen strategy, in a fixed order"""
    per_axis = max(2, int(round(8 * spec.density)))
    if spec.strategy == "grid":
        return _grid_seeds(spec, per_axis)
    if spec.strategy == "boundary":
        return _boundary_seeds(spec, per_axis)
    if spec.strategy == "singularity":
        return _ring_seeds(spec, _catalogue(field, spec, settings)) + _grid_seeds(spec, max(2, per_axis // 2))
    return _psi_seeds(field, spec, settings) + _grid_seeds(spec, max(2, per_axis // 2))


# ---------------------------------------------------------------------------
# Streamlines
# ---------------------------------------------------------------------------

def _join(backward: Trajectory, forward: Trajectory) -> Trajectory:
    """One streamline through the seed, parametrised by signed time"""
    taus = [-t for t in reversed(backward.taus[1:])] + forward.taus
    points = list(reversed(backward.points[1:])) + forward.points
    line = Trajectory(seed=forward.seed, direction=forward.direction, taus=taus, points=points,
                      tau_max=forward.tau_max, tau_infinite=forward.tau_infinite,
                      verdict=forward.verdict, pole=forward.pole,
                      psi_drift=max(forward.psi_drift, backward.psi_drift),
                      psi_span=forward.psi_span - backward.psi_span,
                      stop_reason=f"{backward.stop_reason}/{forward.stop_reason}")
    line.witness = [f"backward: {backward.verdict.value}", f"forward: {forward.verdict.value}"]
    line.separatrix = forward.incomplete or backward.incomplete
    return line


def _integrate_seed(field: VectorField, seed: complex, budget: Budget,
                    settings: AnalysisSettings) -> Optional[Trajectory]:
    logger = get_logger()
    try:
        forward = integrate_real_flow(field, seed, 1.0, budget, settings)
        backward = integrate_real_flow(field, seed, -1.0, budget, settings)
    except HoloflowException as e:
        logger.warning("Streamline from %s failed: %s", seed, e)
        return None
    if forward.stop_reason in ("singular_seed", "stationary"):
        return None
    return _join(backward, forward)


def _is_duplicate(field: VectorField, seed: complex, accepted: Sequence[Trajectory],
                  arrays: Sequence[np.ndarray], gap: float) -> bool:
    """Seed lies on an accepted streamline: close to it and on its Im Psi level"""
    try:
        speed = abs(field(seed))
    except (EvalPoleError, EvalOverflowError):
        return True
    for line, array in zip(accepted, arrays):
        distances = np.abs(array - seed)
        k = int(np.argmin(distances))
        if distances[k] >= gap:
            continue
        try:
            offset = segment_time(field, line.points[k], seed)
        except PathThroughSingularityError:
            continue
        if abs(offset.imag) * speed < 0.25 * gap:
            return True
    return False


def compute_streamlines(field: VectorField, spec: PortraitSpec,
                        settings: AnalysisSettings = DEFAULT_SETTINGS) -> List[Trajectory]:
    """
    Integrate forward and backward from every seed until the trajectory leaves the
    window, is captured, or runs out of budget

    Seeds are integrated on a thread pool (HOLOFLOW_WORKERS); results are taken in
    seed order, so the output does not depend on the worker count.
    """
    logger = get_logger()
    if spec.is_empty:
        return []
    seeds = seed_points(field, spec, settings)
    poles = tuple(p.point for p in (spec.points or []) if p.kind == PointKind.POLE)
    budget = Budget(max_tau=spec.max_tau or settings.max_tau,
                    max_steps=min(settings.max_steps, 4000),
                    window=spec.margin_window(), poles=poles)

    workers = Config.get_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda z: _integrate_seed(field, z, budget, settings), seeds))
    else:
        results = [_integrate_seed(field, z, budget, settings) for z in seeds]

    gap = 0.5 * spec.spacing
    accepted: List[Trajectory] = []
    arrays: List[np.ndarray] = []
    for seed, line in zip(seeds, results):
        if line is None:
            continue
        if line.psi_drift > settings.streamline_tol:
            logger.warning("Streamline from %s drifts off its level (%.2e)", seed, line.psi_drift)
            continue
        if _is_duplicate(field, seed, accepted, arrays, gap):
            continue
        accepted.append(line)
        arrays.append(np.asarray(line.points, dtype=complex))
    logger.debug("%d streamlines from %d seeds", len(accepted), len(seeds))
    return accepted


# ---------------------------------------------------------------------------
# Skeleton
# ---------------------------------------------------------------------------

def _offset_radius(point: LocalClass, points: Sequence[LocalClass], spec: PortraitSpec) -> float:
    others = [abs(q.point - point.point) for q in points if q is not point]
    nearest = min(others) if others else math.inf
    return min(0.02 * spec.size, 0.05, 0.25 * nearest)


def _separatrix(field: VectorField, p: complex, angle: float, radius: float, budget: Budget,
                settings: AnalysisSettings) -> Optional[Trajectory]:
    seed = p + radius * cmath.exp(1j * angle)
    try:
        radial = (field(seed) * cmath.exp(-1j * angle)).real
        direction = 1.0 if radial > 0 else -1.0
        line = integrate_real_flow(field, seed, direction, budget, settings)
    except HoloflowException as e:
        get_logger().warning("Separatrix from %s at angle %.4f failed: %s", p, angle, e)
        return None
    # the separatrix leaves the pole at time 0
    lead = (segment_time(field, p, seed) / direction).real
    line.points.insert(0, p)
    line.taus = [0.0] + [lead + t for t in line.taus]
    line.separatrix = True
    line.witness.append(f"separatrix of the pole {p:.6g} at angle {angle:.6f}")
    return line


def separatrix_skeleton(field: VectorField, spec: PortraitSpec,
                        settings: AnalysisSettings = DEFAULT_SETTINGS,
                        streamlines: Sequence[Trajectory] = ()) -> List[Trajectory]:
    """
    Separatrices: 2k+2 per pole of order k, seeded just off the pole along the
    census separatrix angles and integrated outward, plus every incomplete streamline
    """
    logger = get_logger()
    if spec.is_empty:
        return []
    points = _catalogue(field, spec, settings)
    unresolved = [p for p in points if p.kind == PointKind.UNDETERMINED
                  or (p.kind in (PointKind.ZERO, PointKind.POLE) and p.census is None)]
    if unresolved:
        logger.warning("Incomplete catalogue: %d points without a census in the window", len(unresolved))

    poles = [p for p in points if p.kind == PointKind.POLE]
    budget = Budget(max_tau=spec.max_tau or settings.max_tau,
                    max_steps=min(settings.max_steps, 4000),
                    window=spec.margin_window(), poles=tuple(p.point for p in poles))
    skeleton: List[Trajectory] = []
    for pole in poles:
        if pole.census is None:
            continue
        radius = _offset_radius(pole, points, spec)
        for angle in pole.census.separatrix_angles:
            line = _separatrix(field, pole.point, angle, radius, budget, settings)
            if line is not None:
                skeleton.append(line)
    for line in streamlines:
        if line.separatrix:
            skeleton.append(line)
    return skeleton


def separatrices_by_pole(skeleton: Sequence[Trajectory]) -> Dict[complex, int]:
    counts: Dict[complex, int] = {}
    for line in skeleton:
        if line.points and line.witness and line.witness[-1].startswith("separatrix of the pole"):
            counts[line.points[0]] = counts.get(line.points[0], 0) + 1
    return counts
