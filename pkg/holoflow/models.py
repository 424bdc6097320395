"""
Data models for analysis results
"""

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Set, Tuple


INFINITY = complex(math.inf, 0.0)


def is_infinite(value: Optional[complex]) -> bool:
    """True for the point at infinity of the t-plane"""
    return value is not None and cmath.isinf(value)


def encode_complex(value: Optional[complex]) -> Any:
    """JSON form: {"re", "im"}, the string "infinity", or null"""
    if value is None:
        return None
    if is_infinite(value):
        return "infinity"
    return {"re": float(value.real), "im": float(value.imag)}


def decode_complex(data: Any) -> Optional[complex]:
    if data is None:
        return None
    if data == "infinity":
        return INFINITY
    if isinstance(data, dict):
        return complex(data["re"], data["im"])
    return complex(data)


class PointKind(str, Enum):
    """Local class of a point"""
    REGULAR = "Regular"
    ZERO = "Zero"
    POLE = "Pole"
    ESSENTIAL = "Essential"
    UNDETERMINED = "Undetermined"


class TrajectoryVerdict(str, Enum):
    COMPLETE = "Complete"
    INCOMPLETE_AT_POLE = "IncompleteAtPole"
    INCOMPLETE_ESCAPE = "IncompleteEscape"
    BUDGET_EXHAUSTED = "BudgetExhausted"


class Completeness(str, Enum):
    COMPLETE = "Complete"
    INCOMPLETE = "Incomplete"
    INCONCLUSIVE = "Inconclusive"


class LimitKind(str, Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    NO_LIMIT = "NoLimit"


class SingularityKind(str, Enum):
    """Taxonomy of singularities of the inverse of Psi"""
    ALGEBRAIC = "Algebraic"
    LOGARITHMIC = "Logarithmic"
    DIRECT_NON_LOGARITHMIC = "DirectNonLogarithmic"
    INDIRECT = "Indirect"
    UNRESOLVED = "Unresolved"


class TractType(str, Enum):
    HYPERBOLIC = "Hyperbolic"
    ELLIPTIC = "Elliptic"


class Separability(str, Enum):
    SEPARABLE = "Separable"
    NON_SEPARABLE = "NonSeparable"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class Census:
    """Sector counts of Re X on a probe circle"""
    hyperbolic: int = 0
    elliptic: int = 0
    parabolic: int = 0
    pattern: str = "sectors"  # sectors, source, sink, center, regular
    seeds: int = 0
    separatrix_angles: List[float] = field(default_factory=list)
    confidence: str = "high"

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.hyperbolic, self.elliptic, self.parabolic)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "H": self.hyperbolic,
            "E": self.elliptic,
            "P": self.parabolic,
            "pattern": self.pattern,
            "seeds": self.seeds,
            "separatrix_angles": [round(a, 12) for a in self.separatrix_angles],
            "confidence": self.confidence,
        }


@dataclass
class LocalClass:
    """Verdict at a point"""
    point: complex
    kind: PointKind
    multiplicity: int = 0
    residue: Optional[complex] = None
    census: Optional[Census] = None
    probe_radius: float = 0.0
    note: str = ""

    @property
    def label(self) -> str:
        if self.kind in (PointKind.ZERO, PointKind.POLE):
            return f"{self.kind.value}({self.multiplicity})"
        return self.kind.value

    @property
    def multivalued(self) -> bool:
        """Nonzero residue makes Psi multivalued around this zero"""
        return self.residue is not None and abs(self.residue) > 1e-8

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": encode_complex(self.point),
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
            "residue": encode_complex(self.residue),
            "census": self.census.to_dict() if self.census else None,
            "probe_radius": self.probe_radius,
            "note": self.note,
        }


@dataclass
class Trajectory:
    """Numerically integrated real trajectory"""
    seed: complex
    direction: complex
    taus: List[float] = field(default_factory=list)
    points: List[complex] = field(default_factory=list)
    tau_max: float = 0.0
    tau_infinite: bool = False
    verdict: TrajectoryVerdict = TrajectoryVerdict.BUDGET_EXHAUSTED
    pole: Optional[complex] = None
    psi_drift: float = 0.0
    psi_span: complex = 0j
    stop_reason: str = ""
    witness: List[str] = field(default_factory=list)
    separatrix: bool = False

    @property
    def samples(self) -> List[Tuple[float, complex]]:
        return list(zip(self.taus, self.points))

    @property
    def end(self) -> complex:
        return self.points[-1] if self.points else self.seed

    @property
    def arc_length(self) -> float:
        """Length in the flat metric of the field (equals the tau-span)"""
        return abs(self.taus[-1] - self.taus[0]) if self.taus else 0.0

    @property
    def incomplete(self) -> bool:
        return self.verdict in (TrajectoryVerdict.INCOMPLETE_AT_POLE,
                                TrajectoryVerdict.INCOMPLETE_ESCAPE)

    def to_dict(self, decimate: int = 1) -> Dict[str, Any]:
        step = max(1, decimate)
        idx = list(range(0, len(self.points), step))
        if self.points and idx[-1] != len(self.points) - 1:
            idx.append(len(self.points) - 1)
        return {
            "seed": encode_complex(self.seed),
            "direction": "+" if self.direction.real >= 0 else "-",
            "verdict": self.verdict.value,
            "tau_max": "infinity" if self.tau_infinite else self.tau_max,
            "pole": encode_complex(self.pole),
            "psi_drift": self.psi_drift,
            "psi_span": encode_complex(self.psi_span),
            "arc_length": self.arc_length,
            "stop_reason": self.stop_reason,
            "witness": list(self.witness),
            "samples": [[self.taus[i], encode_complex(self.points[i])] for i in idx],
        }


@dataclass
class CompletenessReport:
    verdict: Completeness
    time_to_blowup: Optional[float] = None
    asymptotic_value: Optional[complex] = None
    witness: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "time_to_blowup": self.time_to_blowup,
            "asymptotic_value": encode_complex(self.asymptotic_value),
            "witness": self.witness,
        }


@dataclass
class LimitVerdict:
    """Limit of Psi along a probe path"""
    kind: LimitKind
    value: Optional[complex] = None
    anchor: complex = 0j
    direction: complex = 1 + 0j
    psi_samples: List[complex] = field(default_factory=list)
    path_samples: List[complex] = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "value": encode_complex(self.value),
            "anchor": encode_complex(self.anchor),
            "direction": encode_complex(self.direction),
            "note": self.note,
        }


Cell = Tuple[int, int]


@dataclass
class TractRegion:
    """
    Cell approximation of one component of the preimage of a disk under Psi

    Cells are keyed by integer lattice coordinates; the cell (i, j) is centered
    at (i + 1j * j) * cell_size.
    """
    value: complex
    rho: float
    cell_size: float
    seed: complex
    cells: Dict[Cell, complex] = field(default_factory=dict)
    boundary: Set[Cell] = field(default_factory=set)
    truncated: bool = False
    window_clipped: bool = False

    def center(self, cell: Cell) -> complex:
        return complex(cell[0], cell[1]) * self.cell_size

    def __contains__(self, z: complex) -> bool:
        return self.cell_of(z) in self.cells

    def cell_of(self, z: complex) -> Cell:
        return (int(round(z.real / self.cell_size)), int(round(z.imag / self.cell_size)))

    def intersects(self, other: "TractRegion") -> bool:
        return not self.cells.keys().isdisjoint(other.cells.keys())

    def contains_region(self, other: "TractRegion") -> bool:
        return other.cells.keys() <= self.cells.keys()

    @property
    def unbounded(self) -> bool:
        """Growth was stopped by the budget or the window, not by the disk condition"""
        return self.truncated or self.window_clipped

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": encode_complex(self.value),
            "rho": self.rho,
            "cell_size": self.cell_size,
            "seed": encode_complex(self.seed),
            "cells": len(self.cells),
            "boundary_cells": len(self.boundary),
            "truncated": self.truncated,
            "window_clipped": self.window_clipped,
        }


@dataclass
class InverseSingularity:
    """One singularity of the inverse of Psi over the value a"""
    value: complex
    label: str = ""
    witness: Optional[LimitVerdict] = None
    critical_point: Optional[complex] = None
    critical_order: int = 0
    kind: SingularityKind = SingularityKind.UNRESOLVED
    tract: Optional[TractType] = None
    neighborhoods: Dict[float, TractRegion] = field(default_factory=dict)
    attained: int = 0
    note: str = ""

    @property
    def transcendental(self) -> bool:
        return self.critical_point is None

    @property
    def seed(self) -> complex:
        if self.critical_point is not None:
            return self.critical_point
        if self.witness and self.witness.path_samples:
            return self.witness.path_samples[-1]
        raise ValueError(f"Singularity {self.label or self.value} has no witness")

    @property
    def verdict(self) -> str:
        if self.kind == SingularityKind.LOGARITHMIC and self.tract:
            return f"Logarithmic({self.tract.value})"
        if self.kind == SingularityKind.ALGEBRAIC:
            return f"Algebraic({self.critical_order + 1})"
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": encode_complex(self.value),
            "label": self.label,
            "kind": self.kind.value,
            "tract": self.tract.value if self.tract else None,
            "critical_point": encode_complex(self.critical_point),
            "critical_order": self.critical_order,
            "witness": self.witness.to_dict() if self.witness else None,
            "neighborhoods": [r.to_dict() for _, r in sorted(self.neighborhoods.items())],
            "attained": self.attained,
            "note": self.note,
        }


@dataclass
class SeparabilityResult:
    verdict: Separability
    rho: Optional[Tuple[float, float]] = None
    witness: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "rho": list(self.rho) if self.rho else None,
            "witness": self.witness,
        }
