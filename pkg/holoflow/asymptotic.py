"""
Asymptotic values of Psi, tract neighborhoods and the taxonomy of singularities of
the inverse of Psi (algebraic, logarithmic, direct non-logarithmic, indirect)
"""

import cmath
import math
from collections import deque
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union


from .config import AnalysisSettings, DEFAULT_SETTINGS
from .exceptions import (
    EvalOverflowError, EvalPoleError, NonConvergentError, PathHitsSingularityError,
    PathThroughSingularityError, SeedOutsideDiskError,
)
from .field import VectorField
from .flow import (
    Budget, Window, completeness_report, dyadic_points, flow_time, in_window,
    integrate_real_flow, psi_value, segment_time,
)
from .localclass import classify_point, scan_window
from .logger import get_logger
from .models import (
    INFINITY, Cell, Completeness, CompletenessReport, InverseSingularity, LimitKind,
    LimitVerdict, LocalClass, PointKind, Separability, SeparabilityResult, SingularityKind,
    TractRegion, TractType, Trajectory, is_infinite,
)


NEIGHBOURS = ((1, 0), (0, 1), (-1, 0), (0, -1))
RING = tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))
NEWTON_STEP_TOL = 1e-10
FLAT_RESOLUTION = 1e-8


@dataclass(frozen=True)
class RaySpec:
    """Probe path anchor + s * direction, s >= 0"""
    anchor: complex
    direction: complex

    @classmethod
    def at_angle(cls, anchor: complex, angle: float) -> "RaySpec":
        return cls(complex(anchor), cmath.exp(1j * angle))


PathSpec = Union[RaySpec, Sequence[complex]]


def _in_disk(psi: complex, a: complex, rho: float) -> bool:
    """Disk condition, spherical (|Psi| > 1/rho) when a is infinity"""
    if not cmath.isfinite(psi):
        return is_infinite(a)
    if is_infinite(a):
        return abs(psi) > 1.0 / rho
    return abs(psi - a) < rho


# ---------------------------------------------------------------------------
# Limits along paths
# ---------------------------------------------------------------------------

def _path_points(path: PathSpec, settings: AnalysisSettings) -> List[complex]:
    if isinstance(path, RaySpec):
        u = path.direction / abs(path.direction)
        length = max(1.0, 0.25 * abs(path.anchor))
        return list(dyadic_points(path.anchor, u, length, settings.max_doublings))
    return [complex(z) for z in path]


def asymptotic_value_along_path(field: VectorField, path: PathSpec,
                                settings: AnalysisSettings = DEFAULT_SETTINGS) -> LimitVerdict:
    """
    Limit of Psi along a ray or an explicit curve

    Converged(a) when the oscillation of Psi over the last three dyadic segments is
    below cauchy_tol; Diverged when |Psi| exceeds 1/rho_min while growing; NoLimit
    otherwise.

    A converged probe keeps doubling until the oscillation drops below cauchy_tol^2
    or the doubling budget runs out, so slowly decaying tails (sin z / z) settle on
    their limit instead of the first Cauchy sample. Losing the Cauchy behaviour
    again reopens the probe.

    Raises:
        PathHitsSingularityError: the path runs into a zero of f
    """
    logger = get_logger()
    points = _path_points(path, settings)
    anchor = points[0]
    direction = path.direction if isinstance(path, RaySpec) else points[-1] - points[-2]
    verdict = LimitVerdict(LimitKind.NO_LIMIT, anchor=anchor, direction=direction)

    try:
        current = psi_value(field, anchor, settings)
    except (PathThroughSingularityError, NonConvergentError) as e:
        raise PathHitsSingularityError(anchor) from e
    verdict.psi_samples.append(current)
    verdict.path_samples.append(anchor)

    cap = 1.0 / settings.rho_min
    floor = settings.cauchy_tol ** 2
    for previous, point in zip(points, points[1:]):
        try:
            if field.psi is not None:
                current = field.psi(point)
            else:
                current = current + flow_time(field, [previous, point], settings=settings)
        except PathThroughSingularityError as e:
            if verdict.kind == LimitKind.CONVERGED:
                return verdict
            raise PathHitsSingularityError(e.location)
        except (NonConvergentError, EvalPoleError, EvalOverflowError) as e:
            logger.debug("Path probe from %s stopped: %s", anchor, e)
            if verdict.kind != LimitKind.CONVERGED:
                verdict.note = f"quadrature stopped near {point}: {e}"
            return verdict
        verdict.psi_samples.append(current)
        verdict.path_samples.append(point)

        last = verdict.psi_samples[-4:]
        if len(last) == 4 and cmath.isfinite(current):
            spread = max(abs(u - v) for u in last for v in last)
            scale = max(1.0, abs(current))
            if spread < settings.cauchy_tol * scale:
                verdict.kind = LimitKind.CONVERGED
                verdict.value = current
                if spread <= floor * scale:
                    return verdict
                continue
            if verdict.kind == LimitKind.CONVERGED:
                logger.debug("Path probe from %s lost Cauchy behaviour at %s", anchor, point)
                verdict.kind, verdict.value = LimitKind.NO_LIMIT, None
        if verdict.kind == LimitKind.CONVERGED:
            return verdict
        magnitudes = [abs(v) for v in verdict.psi_samples[-3:]]
        if not cmath.isfinite(current) or (
                magnitudes[-1] > cap and all(b > a for a, b in zip(magnitudes, magnitudes[1:]))):
            verdict.kind = LimitKind.DIVERGED
            verdict.value = INFINITY
            return verdict

    if verdict.kind == LimitKind.CONVERGED:
        return verdict
    verdict.note = "no Cauchy behaviour within the doubling budget"
    return verdict


def field_value_along_path(field: VectorField, path: PathSpec,
                           settings: AnalysisSettings = DEFAULT_SETTINGS) -> Dict[str, object]:
    """
    Limit of f itself along a path and the prediction it makes for Psi

    A nonzero finite limit, or infinity, predicts a finite asymptotic value of Psi
    (incomplete trajectories, hyperbolic sectors). The limit 0 predicts Psi tending to
    infinity (elliptic sectors). The prediction is checked against the Psi probe.
    """
    points = _path_points(path, settings)
    values: List[complex] = []
    kind = "none"
    limit: Optional[complex] = None
    for z in points:
        try:
            values.append(field(z))
        except EvalOverflowError:
            values.append(INFINITY)
        except EvalPoleError:
            continue
        mags = [abs(v) for v in values[-3:]]
        if len(mags) == 3 and (mags[-1] == math.inf or (
                mags[-1] > 1.0 / settings.rho_min and mags[0] < mags[1] < mags[2])):
            kind, limit = "infinity", INFINITY
            break
        if len(mags) == 3 and mags[-1] < settings.rho_min and mags[0] > mags[1] > mags[2]:
            kind, limit = "zero", 0j
            break
        tail = values[-3:]
        if len(tail) == 3 and all(cmath.isfinite(v) for v in tail):
            spread = max(abs(u - v) for u in tail for v in tail)
            if spread < settings.cauchy_tol * max(1.0, abs(tail[-1])) and abs(tail[-1]) > settings.rho_min:
                kind, limit = "finite", tail[-1]
                break

    if kind in ("finite", "infinity"):
        predicted = "finite"
    elif kind == "zero":
        predicted = "infinity"
    else:
        predicted = "unknown"
    observed = asymptotic_value_along_path(field, path, settings)
    agrees = (predicted == "finite" and observed.kind == LimitKind.CONVERGED) or \
             (predicted == "infinity" and observed.kind == LimitKind.DIVERGED)
    return {
        "field_limit": kind,
        "value": limit,
        "predicted_psi": predicted,
        "observed": observed,
        "agrees": agrees if predicted != "unknown" else None,
    }


def period_lattice(residues: Iterable[complex], tol: float = 1e-8) -> List[complex]:
    """Periods 2 pi i lambda of Psi around zeros with nonzero residue"""
    periods: List[complex] = []
    for residue in residues:
        if residue is None or abs(residue) <= tol:
            continue
        period = 2j * math.pi * residue
        if all(abs(period - p) > tol for p in periods):
            periods.append(period)
    return periods


def probe_rays(field: VectorField, anchor: Optional[complex] = None, count: Optional[int] = None,
               settings: AnalysisSettings = DEFAULT_SETTINGS) -> List[LimitVerdict]:
    """Equiangular ray probes from anchor (default: the base point)"""
    anchor = field.base_point if anchor is None else complex(anchor)
    n = count or settings.rays
    verdicts = []
    for k in range(n):
        ray = RaySpec.at_angle(anchor, 2 * math.pi * k / n)
        try:
            verdicts.append(asymptotic_value_along_path(field, ray, settings))
        except PathHitsSingularityError as e:
            verdicts.append(LimitVerdict(LimitKind.NO_LIMIT, anchor=anchor, direction=ray.direction,
                                         note=str(e)))
    return verdicts


def distinct_limits(verdicts: Sequence[LimitVerdict], tol: float = 1e-6) -> Tuple[List[complex], int]:
    """
    Distinct converged values and the number of diverging sectors

    Diverging sectors are maximal cyclic runs of Diverged rays.
    """
    values: List[complex] = []
    for v in verdicts:
        if v.kind == LimitKind.CONVERGED and v.value is not None:
            if all(abs(v.value - w) > tol * max(1.0, abs(w)) for w in values):
                values.append(v.value)
    flags = [v.kind == LimitKind.DIVERGED for v in verdicts]
    if all(flags):
        return values, 1 if flags else 0
    runs = sum(1 for k in range(len(flags)) if flags[k] and not flags[k - 1])
    return values, runs


# ---------------------------------------------------------------------------
# Tract regions
# ---------------------------------------------------------------------------

def grow_tract(field: VectorField, a: complex, rho: float, seed: complex,
               cell_size: Optional[float] = None, cell_budget: Optional[int] = None,
               window: Optional[Window] = None, seed_psi: Optional[complex] = None,
               settings: AnalysisSettings = DEFAULT_SETTINGS) -> TractRegion:
    """
    Flood-fill the component of the preimage of D(a, rho) containing seed

    Psi is continued cell to cell along the edges of the lattice, never recomputed
    from the base point, so multivalued Psi is followed branch-consistently. The cell
    holding the seed is always admitted.

    Raises:
        SeedOutsideDiskError: the seed does not satisfy the disk condition
    """
    logger = get_logger()
    h = cell_size or settings.cell_size
    budget = cell_budget or settings.cell_budget
    seed = complex(seed)
    psi_seed = psi_value(field, seed, settings) if seed_psi is None else seed_psi
    if not _in_disk(psi_seed, a, rho):
        raise SeedOutsideDiskError(
            f"Psi({seed}) = {psi_seed} is outside the disk of radius {rho} about {a}")

    region = TractRegion(value=a, rho=rho, cell_size=h, seed=seed)
    start = region.cell_of(seed)
    try:
        region.cells[start] = psi_seed + segment_time(field, seed, region.center(start))
    except PathThroughSingularityError:
        region.cells[start] = psi_seed

    queue = deque([start])
    while queue:
        cell = queue.popleft()
        center = region.center(cell)
        for di, dj in NEIGHBOURS:
            neighbour = (cell[0] + di, cell[1] + dj)
            if neighbour in region.cells:
                continue
            target = region.center(neighbour)
            if not in_window(target, window):
                region.boundary.add(cell)
                region.window_clipped = True
                continue
            try:
                psi = region.cells[cell] + segment_time(field, center, target)
            except PathThroughSingularityError:
                region.boundary.add(cell)
                continue
            if not _in_disk(psi, a, rho):
                region.boundary.add(cell)
                continue
            if len(region.cells) >= budget:
                region.truncated = True
                region.boundary.add(cell)
                continue
            region.cells[neighbour] = psi
            queue.append(neighbour)

    if region.truncated:
        logger.warning("Tract about %s (rho=%g) truncated at %d cells", a, rho, budget)
    logger.debug("Tract about %s (rho=%g): %d cells", a, rho, len(region.cells))
    return region


def region_contains_point(field: VectorField, region: TractRegion, z: complex) -> bool:
    """z satisfies the disk condition by continuation from an adjacent region cell"""
    i, j = region.cell_of(z)
    for di, dj in RING:
        cell = (i + di, j + dj)
        if cell in region.cells:
            try:
                psi = region.cells[cell] + segment_time(field, region.center(cell), z)
            except PathThroughSingularityError:
                continue
            return _in_disk(psi, region.value, region.rho)
    return False


def _singularity_key(u: InverseSingularity) -> Tuple:
    value = "inf" if is_infinite(u.value) else (round(u.value.real, 9), round(u.value.imag, 9))
    return (u.label, value, u.critical_point)


class RegionCache:
    """Grown regions keyed by (singularity, rho, cell size)"""

    def __init__(self):
        self._regions: Dict[Tuple, TractRegion] = {}

    def __len__(self) -> int:
        return len(self._regions)

    def get(self, field: VectorField, u: InverseSingularity, rho: float,
            window: Optional[Window], settings: AnalysisSettings) -> TractRegion:
        key = (_singularity_key(u), rho, settings.cell_size)
        if key not in self._regions:
            seed, seed_psi = tract_seed(field, u, min(settings.rho_schedule + (rho,)), window, settings)
            self._regions[key] = grow_tract(field, u.value, rho, seed, window=window,
                                            seed_psi=seed_psi, settings=settings)
        region = self._regions[key]
        u.neighborhoods[rho] = region
        return region


def _chord_psi(field: VectorField, a: complex, psi_a: complex, b: complex,
               settings: AnalysisSettings) -> complex:
    """Psi at b continued from a: closed form when known, adaptive quadrature on long chords"""
    if field.psi is not None:
        return field.psi(b)
    if abs(b - a) <= 1.0:
        return psi_a + segment_time(field, a, b, order=20)
    return psi_a + flow_time(field, [a, b], settings=settings)


def tract_seed(field: VectorField, u: InverseSingularity, rho: float,
               window: Optional[Window] = None,
               settings: AnalysisSettings = DEFAULT_SETTINGS) -> Tuple[complex, complex]:
    """
    A point of the witness path (or the critical point) inside the disk condition

    The witness path is cut where it first leaves the window. Walking back from the
    cut, path points and 16 samples per chord must all satisfy the disk condition
    (Psi at a sample from the closed form when known, else continued from the chord
    start by quadrature); the earliest point of that unbroken tail is the seed. Seeding every radius from
    the smallest one keeps the grown regions nested.

    Raises:
        SeedOutsideDiskError: the last witness point in the window misses the disk
    """
    if u.critical_point is not None:
        return u.critical_point, u.value
    if not u.witness or not u.witness.path_samples:
        raise SeedOutsideDiskError(f"Singularity {u.label} carries no witness path")

    points = list(u.witness.path_samples)
    values = list(u.witness.psi_samples)
    last = len(points)
    for k, z in enumerate(points):
        if not in_window(z, window):
            last = k
            break
    if last == 0 or not _in_disk(values[last - 1], u.value, rho):
        raise SeedOutsideDiskError(
            f"No witness point of {u.label or u.value} satisfies the disk condition "
            f"for rho={rho} in the window")

    seed = (points[last - 1], values[last - 1])
    for k in range(last - 1, 0, -1):
        previous, psi_previous = points[k - 1], values[k - 1]
        for step in range(15, 0, -1):
            candidate = previous + (step / 16.0) * (points[k] - previous)
            try:
                value = _chord_psi(field, previous, psi_previous, candidate, settings)
            except (PathThroughSingularityError, NonConvergentError, EvalPoleError, EvalOverflowError):
                return seed
            if not _in_disk(value, u.value, rho):
                return seed
            seed = (candidate, value)
        if not _in_disk(psi_previous, u.value, rho):
            return seed
        seed = (previous, psi_previous)
    return seed


# ---------------------------------------------------------------------------
# Catalogue
# ---------------------------------------------------------------------------

@dataclass
class Catalogue:
    """Local classes and singularities found in a window"""
    field: VectorField
    window: Optional[Window] = None
    points: List[LocalClass] = dataclass_field(default_factory=list)
    singularities: List[InverseSingularity] = dataclass_field(default_factory=list)
    cache: RegionCache = dataclass_field(default_factory=RegionCache)

    @property
    def zeros(self) -> List[LocalClass]:
        return [p for p in self.points if p.kind == PointKind.ZERO]

    @property
    def poles(self) -> List[LocalClass]:
        return [p for p in self.points if p.kind == PointKind.POLE]

    @property
    def critical_points(self) -> List[complex]:
        return [u.critical_point for u in self.singularities if u.critical_point is not None]

    def others(self, u: InverseSingularity) -> List[InverseSingularity]:
        return [v for v in self.singularities if v is not u]

    def to_dict(self) -> Dict[str, object]:
        return {
            "window": list(self.window) if self.window else None,
            "points": [p.to_dict() for p in self.points],
            "singularities": [u.to_dict() for u in self.singularities],
        }


def critical_singularity(field: VectorField, p: complex, order: Optional[int] = None,
                         label: str = "", settings: AnalysisSettings = DEFAULT_SETTINGS) -> InverseSingularity:
    """Algebraic singularity over the critical value Psi(p) at a pole p of f"""
    if order is None:
        local = classify_point(field, p, settings=settings, census=False)
        order = -local.multiplicity if local.kind == PointKind.POLE else 1
    value = psi_value(field, p, settings)
    return InverseSingularity(value=value, label=label or f"crit@{p:.6g}", critical_point=p,
                              critical_order=order)


def ray_singularity(field: VectorField, ray: RaySpec, label: str = "",
                    declared_value: Optional[complex] = None,
                    settings: AnalysisSettings = DEFAULT_SETTINGS) -> Optional[InverseSingularity]:
    """
    Transcendental singularity witnessed by a ray, or None when Psi has no limit

    A declared value overrides the probed limit; the difference is kept in the note
    as the constant shift.
    """
    verdict = asymptotic_value_along_path(field, ray, settings)
    if declared_value is not None:
        shift = ""
        if verdict.kind == LimitKind.CONVERGED and not is_infinite(declared_value):
            shift = f"; shift to declared value {declared_value - verdict.value:.3e}"
        return InverseSingularity(value=declared_value, label=label, witness=verdict,
                                  note=f"declared value, probe {verdict.kind.value}{shift}")
    if verdict.kind == LimitKind.NO_LIMIT:
        return None
    return InverseSingularity(value=verdict.value, label=label, witness=verdict)


def build_catalogue(field: VectorField, window: Optional[Window] = None,
                    rays: Sequence[RaySpec] = (), scan: bool = True,
                    declared: Sequence[InverseSingularity] = (),
                    settings: AnalysisSettings = DEFAULT_SETTINGS) -> Catalogue:
    """
    Gather local classes, critical points (poles of f) and transcendental
    singularities witnessed by ray probes

    Catalogue assembly is the single writer; tract regions are cached per
    (singularity, rho).
    """
    logger = get_logger()
    catalogue = Catalogue(field=field, window=window)
    if scan and window is not None:
        catalogue.points = scan_window(field, window, settings=settings)
    for point in catalogue.poles:
        try:
            catalogue.singularities.append(
                critical_singularity(field, point.point, -point.multiplicity, settings=settings))
        except (PathThroughSingularityError, NonConvergentError) as e:
            logger.warning("Critical value at %s unavailable: %s", point.point, e)
    for k, ray in enumerate(rays):
        try:
            u = ray_singularity(field, ray, label=f"ray{k}", settings=settings)
        except PathHitsSingularityError as e:
            logger.warning("Ray %d hits a singular point: %s", k, e)
            continue
        if u is not None:
            catalogue.singularities.append(u)
    catalogue.singularities.extend(declared)
    return catalogue


# ---------------------------------------------------------------------------
# Separability and taxonomy
# ---------------------------------------------------------------------------

def _overlap(field: VectorField, ra: TractRegion, rb: TractRegion,
             ua: InverseSingularity, ub: InverseSingularity) -> bool:
    if ra.intersects(rb):
        return True
    if ub.critical_point is not None and region_contains_point(field, ra, ub.critical_point):
        return True
    if ua.critical_point is not None and region_contains_point(field, rb, ua.critical_point):
        return True
    return False


def separability_test(field: VectorField, ua: InverseSingularity, ub: InverseSingularity,
                      rho_schedule: Optional[Sequence[float]] = None,
                      settings: AnalysisSettings = DEFAULT_SETTINGS,
                      cache: Optional[RegionCache] = None,
                      window: Optional[Window] = None) -> SeparabilityResult:
    """
    Separable, NonSeparable or Inconclusive, relative to the window

    Both tracts are grown through the descending schedule. The first disjoint pair
    is Separable. At the smallest radius, NonSeparable when the region of ub, a point
    of its witness path, or its critical point lies inside the region of ua.
    """
    schedule = tuple(sorted(rho_schedule or settings.rho_schedule, reverse=True))
    cache = cache or RegionCache()
    run = settings.merged({"rho_schedule": schedule})
    truncated = False
    ra = rb = None
    for rho in schedule:
        try:
            ra = cache.get(field, ua, rho, window, run)
            rb = cache.get(field, ub, rho, window, run)
        except SeedOutsideDiskError as e:
            return SeparabilityResult(Separability.INCONCLUSIVE, witness=str(e))
        if not _overlap(field, ra, rb, ua, ub):
            if ra.truncated or rb.truncated:
                truncated = True
                continue
            return SeparabilityResult(Separability.SEPARABLE, rho=(rho, rho),
                                      witness="disjoint cell sets")
        truncated = truncated or ra.truncated or rb.truncated

    assert ra is not None and rb is not None
    rho = schedule[-1]
    if rb.cells and ra.contains_region(rb):
        return SeparabilityResult(Separability.NON_SEPARABLE, rho=(rho, rho),
                                  witness=f"region of {ub.label or ub.value} inside region of {ua.label or ua.value}")
    if ub.critical_point is not None and region_contains_point(field, ra, ub.critical_point):
        return SeparabilityResult(Separability.NON_SEPARABLE, rho=(rho, rho),
                                  witness=f"critical point {ub.critical_point:.6g} inside region")
    if ub.witness:
        for z in ub.witness.path_samples:
            if in_window(z, window) and _in_disk(_safe_psi(field, rb, z), ub.value, rho) \
                    and region_contains_point(field, ra, z):
                return SeparabilityResult(Separability.NON_SEPARABLE, rho=(rho, rho),
                                          witness=f"witness point {z:.6g} inside region")
    note = "budget exhausted" if truncated else "regions overlap without containment"
    return SeparabilityResult(Separability.INCONCLUSIVE, rho=(rho, rho), witness=note)


def _safe_psi(field: VectorField, region: TractRegion, z: complex) -> complex:
    i, j = region.cell_of(z)
    for di, dj in RING:
        cell = (i + di, j + dj)
        if cell in region.cells:
            try:
                return region.cells[cell] + segment_time(field, region.center(cell), z)
            except PathThroughSingularityError:
                continue
    try:
        return psi_value(field, z)
    except (PathThroughSingularityError, NonConvergentError):
        return complex(math.nan, math.nan)


def _local_minima(region: TractRegion, target: complex, limit: int = 400) -> List[Cell]:
    """Cells where |Psi - target| is not larger than at any 4-neighbour in the region"""
    scores = {cell: abs(psi - target) for cell, psi in region.cells.items()}
    minima = []
    for cell, score in scores.items():
        if all(scores.get((cell[0] + di, cell[1] + dj), math.inf) >= score for di, dj in NEIGHBOURS):
            minima.append(cell)
    minima.sort(key=lambda c: (scores[c], c))
    return minima[:limit]


def _flat_at(field: VectorField, region: TractRegion, z: complex) -> bool:
    """Psi changes by less than FLAT_RESOLUTION * rho across one cell at z"""
    try:
        speed = abs(field(z))
    except (EvalPoleError, EvalOverflowError):
        return False
    return region.cell_size < FLAT_RESOLUTION * region.rho * speed


def solve_psi(field: VectorField, region: TractRegion, target: complex,
              iterations: int = 40) -> List[complex]:
    """
    Distinct solutions of Psi(z) = target inside a region

    Newton z <- z - (Psi(z) - target) f(z) from the local minima of |Psi - target|, with
    Psi continued from the starting cell. A root is accepted once the Newton step is
    negligible against |z|; the residual alone is no test near a target of 0, where
    exponentially flat tails of Psi come within rounding of any small value. Roots in
    such tails, where Psi moves less than FLAT_RESOLUTION * rho across a cell, are
    dropped as well.
    """
    roots: List[complex] = []
    for cell in _local_minima(region, target):
        z = region.center(cell)
        psi = region.cells[cell]
        converged = False
        for _ in range(iterations):
            try:
                step = -(psi - target) * field(z)
                z_next = z + step
                psi = psi + segment_time(field, z, z_next)
            except (EvalPoleError, EvalOverflowError, PathThroughSingularityError):
                break
            z = z_next
            if abs(step) < NEWTON_STEP_TOL * max(1.0, abs(z)):
                converged = True
                break
            if abs(step) > 4 * region.cell_size:
                break
        if not converged or _flat_at(field, region, z):
            continue
        if region.cell_of(z) not in region.cells and not any(
                (region.cell_of(z)[0] + di, region.cell_of(z)[1] + dj) in region.cells for di, dj in RING):
            continue
        if all(abs(z - r) > 1e-6 * max(1.0, abs(z)) for r in roots):
            roots.append(z)
    return roots


def count_attained(field: VectorField, region: TractRegion,
                   zeros: Sequence[complex] = ()) -> int:
    """
    Distinct points of the region where Psi takes its centre value

    For the value infinity these are the catalogued zeros of f inside the region.
    """
    if is_infinite(region.value):
        return sum(1 for z in zeros if region.cell_of(z) in region.cells or any(
            (region.cell_of(z)[0] + di, region.cell_of(z)[1] + dj) in region.cells for di, dj in RING))
    return len(solve_psi(field, region, region.value))


def recognize_tract(field: VectorField, region: TractRegion,
                    catalogue: Optional[Catalogue] = None) -> Optional[TractType]:
    """
    Tract recognition: an unbounded region free of catalogued zeros, poles and
    critical points on which the value is omitted is a hyperbolic (finite value) or
    elliptic (infinity) tract
    """
    if not region.unbounded:
        return None
    if catalogue is not None:
        singular = [p.point for p in catalogue.points if p.kind != PointKind.REGULAR]
        singular += catalogue.critical_points
        for z in singular:
            if cmath.isfinite(z) and region.cell_of(z) in region.cells:
                return None
        zeros = [p.point for p in catalogue.zeros]
    else:
        zeros = []
    if count_attained(field, region, zeros):
        return None
    return TractType.ELLIPTIC if is_infinite(region.value) else TractType.HYPERBOLIC


def classify_inverse_singularity(field: VectorField, u: InverseSingularity,
                                 catalogue: Optional[Catalogue] = None,
                                 settings: AnalysisSettings = DEFAULT_SETTINGS) -> SingularityKind:
    """
    Decide the kind of u and record it on u

    1. A critical point gives Algebraic, with ramification from the pole order of f.
    2. The value attained at least attain_count times in every probed region gives
       Indirect.
    3. Separability against every other catalogued singularity: all Separable gives
       Logarithmic (Hyperbolic over a finite value, Elliptic over infinity); any
       NonSeparable gives DirectNonLogarithmic.
    4. Otherwise Unresolved, with the blocking probe in the note.
    """
    logger = get_logger()
    catalogue = catalogue or Catalogue(field=field)
    window = catalogue.window

    if u.critical_point is not None:
        if not u.critical_order:
            local = classify_point(field, u.critical_point, settings=settings, census=False)
            u.critical_order = -local.multiplicity if local.kind == PointKind.POLE else 1
        u.kind = SingularityKind.ALGEBRAIC
        u.note = f"critical point of order {u.critical_order}"
        return u.kind

    zeros = [p.point for p in catalogue.zeros]
    counts = []
    for rho in sorted(settings.rho_schedule, reverse=True):
        try:
            region = catalogue.cache.get(field, u, rho, window, settings)
        except SeedOutsideDiskError as e:
            u.kind = SingularityKind.UNRESOLVED
            u.note = f"blocked: {e}"
            return u.kind
        counts.append(count_attained(field, region, zeros))
    u.attained = counts[-1]
    logger.debug("Attained counts for %s: %s", u.label or u.value, counts)
    if all(c >= settings.attain_count for c in counts):
        u.kind = SingularityKind.INDIRECT
        u.note = f"value attained {counts} times over the schedule"
        return u.kind
    if counts[-1]:
        u.kind = SingularityKind.UNRESOLVED
        u.note = f"blocked: value attained {counts} times, below {settings.attain_count} somewhere"
        return u.kind

    verdicts = []
    for other in catalogue.others(u):
        result = separability_test(field, u, other, settings=settings, cache=catalogue.cache,
                                   window=window)
        verdicts.append((other, result))
        if result.verdict == Separability.NON_SEPARABLE:
            u.kind = SingularityKind.DIRECT_NON_LOGARITHMIC
            u.note = f"not separable from {other.label or other.value}: {result.witness}"
            return u.kind

    blocking = [o for o, r in verdicts if r.verdict == Separability.INCONCLUSIVE]
    if blocking:
        u.kind = SingularityKind.UNRESOLVED
        u.note = "blocked: separability inconclusive against " + ", ".join(
            str(o.label or o.value) for o in blocking)
        return u.kind

    u.kind = SingularityKind.LOGARITHMIC
    u.tract = TractType.ELLIPTIC if is_infinite(u.value) else TractType.HYPERBOLIC
    u.note = "separable from every catalogued singularity (relative to catalogue)"
    return u.kind


def coherence_check(field: VectorField, u: InverseSingularity, catalogue: Catalogue,
                    settings: AnalysisSettings = DEFAULT_SETTINGS) -> Dict[str, object]:
    """
    Compare the separability route with the tract-recognition route

    They contradict when one says logarithmic and the other rules it out.
    """
    if u.kind == SingularityKind.UNRESOLVED and not u.neighborhoods:
        classify_inverse_singularity(field, u, catalogue, settings)
    tract = None
    if u.critical_point is None:
        rho = min(settings.rho_schedule)
        try:
            region = catalogue.cache.get(field, u, rho, catalogue.window, settings)
            tract = recognize_tract(field, region, catalogue)
        except SeedOutsideDiskError:
            tract = None
    logarithmic = u.kind == SingularityKind.LOGARITHMIC
    ruled_out = u.kind in (SingularityKind.DIRECT_NON_LOGARITHMIC, SingularityKind.INDIRECT,
                           SingularityKind.ALGEBRAIC)
    if logarithmic:
        coherent = tract is not None and tract == u.tract
    else:
        coherent = not (ruled_out and tract is not None)
    return {
        "separability_route": u.verdict,
        "tract_route": tract.value if tract else None,
        "coherent": coherent,
    }


# ---------------------------------------------------------------------------
# Incomplete trajectories and the dichotomy
# ---------------------------------------------------------------------------

@dataclass
class IncompleteSeed:
    seed: complex
    direction: float
    trajectory: Trajectory
    report: CompletenessReport
    streamline: int = 0

    @property
    def incomplete(self) -> bool:
        return self.report.verdict == Completeness.INCOMPLETE


def _radical_inverse(k: int) -> float:
    """Base-2 van der Corput point: 1/2, 1/4, 3/4, 1/8, ..."""
    value, scale = 0.0, 0.5
    while k:
        if k & 1:
            value += scale
        k >>= 1
        scale *= 0.5
    return value


def _run_seed(field: VectorField, seed: complex, direction: float, budget: Budget,
              streamline: int, settings: AnalysisSettings) -> IncompleteSeed:
    trajectory = integrate_real_flow(field, seed, direction, budget, settings)
    report = completeness_report(field, trajectory, settings)
    return IncompleteSeed(seed, direction, trajectory, report, streamline)


def seed_incomplete_in_tract(field: VectorField, region: TractRegion, count: Optional[int] = None,
                             settings: AnalysisSettings = DEFAULT_SETTINGS) -> List[IncompleteSeed]:
    """
    Seed trajectories that run into the finite value a of a tract

    Solutions of Psi = a - rho/2 flow forward into a, solutions of Psi = a + rho/2 flow
    backward into it. Distinct solutions share a Psi value, so they lie on distinct
    streamlines. While fewer than count incomplete seeds exist, further seeds are placed
    deeper along the incomplete streamlines, at Psi = a -/+ s with s in (0, rho/2).
    Only seeds whose trajectory is Incomplete are returned.
    """
    if is_infinite(region.value):
        raise ValueError("Incomplete trajectories are seeded in tracts over finite values")
    logger = get_logger()
    wanted = count or settings.incomplete_seeds
    a, rho = region.value, region.rho
    budget = Budget(max_tau=2.0 * rho, max_steps=settings.max_steps)
    results: List[IncompleteSeed] = []
    dropped = 0
    for target, direction in ((a - 0.5 * rho, 1.0), (a + 0.5 * rho, -1.0)):
        for root in solve_psi(field, region, target):
            seeded = _run_seed(field, root, direction, budget, len(results), settings)
            if seeded.incomplete:
                results.append(seeded)
            else:
                dropped += 1

    streamlines = list(results)
    attempts = 0
    while streamlines and len(results) < wanted and attempts < 8 * wanted:
        parent = streamlines[attempts % len(streamlines)]
        lead = 0.5 * rho * _radical_inverse(attempts // len(streamlines) + 1)
        attempts += 1
        advance = integrate_real_flow(field, parent.seed, parent.direction,
                                      Budget(max_tau=lead, max_steps=settings.max_steps), settings)
        if advance.stop_reason != "max_tau":
            continue
        seeded = _run_seed(field, advance.end, parent.direction, budget, parent.streamline, settings)
        if seeded.incomplete:
            results.append(seeded)
        else:
            dropped += 1

    if dropped:
        logger.debug("Dropped %d seeds about %s whose trajectories are not incomplete", dropped, a)
    if len(results) < wanted:
        logger.warning("Only %d incomplete trajectories seeded in the tract about %s", len(results), a)
    return results


def dichotomy_check(field: VectorField, radii: Sequence[float] = (2.0, 4.0, 8.0),
                    settings: AnalysisSettings = DEFAULT_SETTINGS) -> Dict[str, object]:
    """
    Either Psi has a finite asymptotic value, or poles of f accumulate at infinity
    (pole counts grow with the window)
    """
    verdicts = probe_rays(field, settings=settings)
    finite = [v.value for v in verdicts if v.kind == LimitKind.CONVERGED]
    counts = []
    for r in radii:
        points = scan_window(field, (-r, r, -r, r), settings=settings)
        counts.append(sum(1 for p in points if p.kind == PointKind.POLE))
    growing = len(counts) > 1 and all(b > a for a, b in zip(counts, counts[1:]))
    return {
        "finite_values": finite,
        "pole_counts": dict(zip(radii, counts)),
        "poles_accumulate": growing,
        "holds": bool(finite) or growing,
    }
