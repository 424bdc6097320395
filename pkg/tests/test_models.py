"""
Tests for result data models
"""

import math
import pytest

from holoflow.models import (
    INFINITY, Census, InverseSingularity, LimitKind, LimitVerdict, LocalClass, PointKind,
    SingularityKind, TractRegion, TractType, Trajectory, TrajectoryVerdict, decode_complex,
    encode_complex, is_infinite,
)


@pytest.mark.unit
class TestComplexEncoding:
    """Test JSON complex helpers"""

    def test_encode(self):
        """Test finite, infinite and missing values"""
        assert encode_complex(1 + 2j) == {"re": 1.0, "im": 2.0}
        assert encode_complex(INFINITY) == "infinity"
        assert encode_complex(None) is None

    def test_decode(self):
        """Test decoding back"""
        assert decode_complex({"re": 1.0, "im": -1.0}) == 1 - 1j
        assert is_infinite(decode_complex("infinity"))
        assert decode_complex(None) is None
        assert decode_complex(3) == 3 + 0j

    def test_is_infinite(self):
        """Test only the point at infinity counts"""
        assert is_infinite(INFINITY)
        assert not is_infinite(1e300 + 0j)
        assert not is_infinite(None)


@pytest.mark.unit
class TestLocalClass:
    """Test point verdict labels"""

    def test_labels(self):
        """Test zeros and poles carry their multiplicity"""
        assert LocalClass(0j, PointKind.ZERO, multiplicity=2).label == "Zero(2)"
        assert LocalClass(0j, PointKind.POLE, multiplicity=-1).label == "Pole(-1)"
        assert LocalClass(0j, PointKind.ESSENTIAL).label == "Essential"

    def test_multivalued(self):
        """Test the residue threshold"""
        assert LocalClass(0j, PointKind.ZERO, 1, residue=1 + 0j).multivalued
        assert not LocalClass(0j, PointKind.ZERO, 2, residue=1e-12 + 0j).multivalued
        assert not LocalClass(0j, PointKind.POLE, -1).multivalued

    def test_census_dict(self):
        """Test census keys"""
        census = Census(hyperbolic=4, separatrix_angles=[0.1234567890123456])
        data = LocalClass(0j, PointKind.POLE, -1, census=census).to_dict()
        assert data["census"]["H"] == 4
        assert data["census"]["separatrix_angles"] == [0.123456789012]
        assert census.counts == (4, 0, 0)


@pytest.mark.unit
class TestTrajectory:
    """Test trajectory helpers"""

    def test_end_and_arc_length(self):
        """Test end point and tau span"""
        traj = Trajectory(seed=0j, direction=1 + 0j, taus=[0.0, 0.5, 1.5],
                          points=[0j, 0.5 + 0j, 1.5 + 0j])
        assert traj.end == 1.5
        assert traj.arc_length == 1.5
        assert traj.samples[1] == (0.5, 0.5 + 0j)

    def test_empty(self):
        """Test an empty trajectory ends at its seed"""
        traj = Trajectory(seed=2j, direction=-1 + 0j)
        assert traj.end == 2j
        assert traj.arc_length == 0.0
        assert not traj.incomplete

    def test_decimated_dict_keeps_last_sample(self):
        """Test decimation always keeps the final point"""
        traj = Trajectory(seed=0j, direction=-1 + 0j, taus=[float(k) for k in range(5)],
                          points=[complex(k) for k in range(5)], tau_infinite=True,
                          verdict=TrajectoryVerdict.COMPLETE)
        data = traj.to_dict(decimate=3)
        assert [s[0] for s in data["samples"]] == [0.0, 3.0, 4.0]
        assert data["direction"] == "-"
        assert data["tau_max"] == "infinity"


@pytest.mark.unit
class TestInverseSingularity:
    """Test singularity verdicts"""

    def test_verdict_strings(self):
        """Test the verdict labels"""
        log = InverseSingularity(0j, kind=SingularityKind.LOGARITHMIC, tract=TractType.HYPERBOLIC)
        assert log.verdict == "Logarithmic(Hyperbolic)"
        alg = InverseSingularity(1 + 0j, kind=SingularityKind.ALGEBRAIC, critical_point=0j,
                                 critical_order=1)
        assert alg.verdict == "Algebraic(2)"
        assert InverseSingularity(0j, kind=SingularityKind.INDIRECT).verdict == "Indirect"

    def test_seed(self):
        """Test seeds come from the critical point or the witness path"""
        assert InverseSingularity(0j, critical_point=1j).seed == 1j
        witness = LimitVerdict(LimitKind.CONVERGED, 0j, path_samples=[1 + 0j, -5 + 0j])
        singularity = InverseSingularity(0j, witness=witness)
        assert singularity.seed == -5
        assert singularity.transcendental
        with pytest.raises(ValueError):
            InverseSingularity(0j, label="a").seed


@pytest.mark.unit
class TestTractRegion:
    """Test lattice cell regions"""

    def test_cells_and_membership(self):
        """Test cell lookup and containment"""
        region = TractRegion(value=0j, rho=0.5, cell_size=0.25, seed=-1 + 0j,
                             cells={(-4, 0): 0j, (-5, 0): 0j})
        assert -1.05 + 0.1j in region
        assert 1 + 0j not in region
        assert region.center((-4, 0)) == -1

    def test_nesting(self):
        """Test intersection and containment"""
        big = TractRegion(0j, 0.5, 0.25, 0j, cells={(0, 0): 0j, (1, 0): 0j})
        small = TractRegion(0j, 0.25, 0.25, 0j, cells={(1, 0): 0j})
        assert big.intersects(small)
        assert big.contains_region(small)
        assert not small.contains_region(big)

    def test_unbounded(self):
        """Test budget or window stops mark the region unbounded"""
        region = TractRegion(0j, 0.5, 0.25, 0j, truncated=True)
        assert region.unbounded
        assert region.to_dict()["truncated"] is True
        assert math.isclose(region.to_dict()["rho"], 0.5)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
