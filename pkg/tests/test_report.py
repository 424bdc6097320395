"""
Tests for JSON reports
"""

import json
import math
import pytest

from holoflow.config import AnalysisSettings
from holoflow.exceptions import ReportSchemaError
from holoflow.models import (
    Census, LimitKind, LimitVerdict, LocalClass, PointKind, Trajectory, TrajectoryVerdict,
)
from holoflow.report import (
    SCHEMA_VERSION, Report, dumps, strip_wall_time, to_jsonable, validate_report, write_report,
)


def make_report(command="classify"):
    report = Report(command, AnalysisSettings(), "1.2.3")
    report.field = {"expression": "sec(z)", "base_point": 0j, "base_value": 0j, "chart": "z"}
    return report


@pytest.mark.unit
class TestToJsonable:
    """Test value encoding"""

    def test_complex_and_infinity(self):
        """Test complex numbers and the point at infinity"""
        assert to_jsonable(1 - 2j) == {"re": 1.0, "im": -2.0}
        assert to_jsonable(complex(math.inf, 0)) == "infinity"
        assert to_jsonable(complex(math.nan, 0)) is None

    def test_non_finite_floats(self):
        """Test floats that JSON cannot hold"""
        assert to_jsonable(math.inf) == "infinity"
        assert to_jsonable(-math.inf) == "-infinity"
        assert to_jsonable(math.nan) is None

    def test_enums_and_containers(self):
        """Test enums, tuples, sets and complex dict keys"""
        assert to_jsonable(PointKind.POLE) == "Pole"
        assert to_jsonable((1, 2.5)) == [1, 2.5]
        assert to_jsonable({3, 1, 2}) == [1, 2, 3]
        assert to_jsonable({1j: 2}) == {'{"im": 1.0, "re": 0.0}': 2}

    def test_objects_with_to_dict(self):
        """Test result objects expand through to_dict"""
        verdict = LimitVerdict(LimitKind.CONVERGED, value=1 + 0j)
        assert to_jsonable(verdict)["value"] == {"re": 1.0, "im": 0.0}

    def test_unknown_type(self):
        """Test unsupported objects raise TypeError"""
        with pytest.raises(TypeError):
            to_jsonable(object())


@pytest.mark.unit
class TestReport:
    """Test report assembly and validation"""

    def test_minimal_report_validates(self):
        """Test an empty catalogue report"""
        data = make_report().to_dict()
        assert data["catalogue"] == []
        assert data["provenance"]["schema_version"] == SCHEMA_VERSION
        assert data["provenance"]["tool_version"] == "1.2.3"
        assert data["provenance"]["settings"]["cell_budget"] == 4000
        assert data["provenance"]["wall_time"] >= 0

    def test_catalogue_and_trajectory(self):
        """Test populated sections validate"""
        report = make_report("flow")
        report.catalogue = [LocalClass(math.pi / 2 + 0j, PointKind.POLE, multiplicity=-1,
                                       census=Census(hyperbolic=4))]
        traj = Trajectory(seed=3.5 + 0j, direction=1 + 0j, taus=[0.0, 0.5], points=[3.5 + 0j, 3.0 + 0j],
                          tau_max=0.5, verdict=TrajectoryVerdict.INCOMPLETE_AT_POLE,
                          stop_reason="pole", psi_drift=math.nan)
        report.trajectories = [traj]
        data = report.to_dict()
        assert data["catalogue"][0]["kind"] == "Pole"
        assert data["trajectories"][0]["psi_drift"] is None

    def test_inconclusive_recorded_once(self):
        """Test mark_inconclusive de-duplicates"""
        report = make_report()
        report.mark_inconclusive("probe blocked")
        report.mark_inconclusive("probe blocked")
        assert report.to_dict()["inconclusive"] == ["probe blocked"]

    def test_schema_violation(self):
        """Test a bad report raises ReportSchemaError with the path"""
        data = make_report().to_dict()
        data["catalogue"] = [{"point": 1, "kind": "Zero", "multiplicity": 1, "residue": None,
                              "census": None}]
        with pytest.raises(ReportSchemaError) as exc_info:
            validate_report(data)
        assert "catalogue/0" in str(exc_info.value)

    def test_unknown_command_rejected(self):
        """Test the command enum"""
        with pytest.raises(ReportSchemaError):
            make_report("explode").to_dict()

    def test_deterministic_text(self):
        """Test two reports differ only in wall time"""
        a = json.loads(make_report().to_json())
        b = json.loads(make_report().to_json())
        assert strip_wall_time(a) == strip_wall_time(b)
        assert "wall_time" not in strip_wall_time(a)["provenance"]

    def test_dumps_sorted(self):
        """Test canonical key order and NaN rejection"""
        assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')
        with pytest.raises(ValueError):
            dumps({"x": math.nan})

    def test_write_report(self, tmp_path, capsys):
        """Test writing to a path and to stdout"""
        write_report("{}\n", tmp_path / "r.json")
        assert (tmp_path / "r.json").read_text() == "{}\n"
        write_report("{}\n", None)
        assert capsys.readouterr().out == "{}\n"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
