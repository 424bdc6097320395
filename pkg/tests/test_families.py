"""
Tests for the closed-form families and their cross-check against numerics
"""

import math
import numpy as np
import pytest

from holoflow.exceptions import DegenerateRationalError, InvalidFamilyMemberError
from holoflow.families import (
    ExponentialFamilyMember, PeriodicFamilyMember, analyze_exponential, analyze_periodic,
    crosscheck, periodic_case, polish_roots, random_periodic_member, scaled_resultant,
)
from holoflow.models import INFINITY, TractType, encode_complex, is_infinite


@pytest.mark.unit
class TestPolishRoots:
    """Test companion-matrix roots"""

    def test_real_roots(self):
        """Test z^2 - 1"""
        assert polish_roots([-1, 0, 1]) == pytest.approx([-1, 1], abs=1e-12)

    def test_complex_roots_sorted(self):
        """Test w^2 + 1 gives -i then i"""
        roots = polish_roots([1, 0, 1])
        assert abs(roots[0] + 1j) < 1e-12
        assert abs(roots[1] - 1j) < 1e-12

    def test_constant_has_no_roots(self):
        """Test a constant polynomial"""
        assert polish_roots([3]) == []


@pytest.mark.unit
class TestExponentialFamily:
    """Test f = e^E / P"""

    def test_degrees(self):
        """Test r and d from the coefficients"""
        member = ExponentialFamilyMember.from_expressions("z^2 - 1", "2*z^3 + z")
        assert (member.r, member.d) == (2, 3)

    def test_trailing_zeros_trimmed(self):
        """Test vanishing leading coefficients do not count towards the degree"""
        member = ExponentialFamilyMember((1, 0, 0), (0, 1, 0))
        assert (member.r, member.d) == (0, 1)

    def test_constant_exponent_rejected(self):
        """Test d = 0 is not a member"""
        with pytest.raises(InvalidFamilyMemberError):
            ExponentialFamilyMember((1,), (2,))

    def test_zero_polynomial_rejected(self):
        """Test P = 0 is not a member"""
        with pytest.raises(InvalidFamilyMemberError):
            ExponentialFamilyMember((0, 0), (0, 1))

    def test_non_polynomial_rejected(self):
        """Test P must be a polynomial"""
        with pytest.raises(InvalidFamilyMemberError):
            ExponentialFamilyMember.from_expressions("1/z", "z")

    def test_from_dict(self):
        """Test encoded coefficients are accepted"""
        member = ExponentialFamilyMember.from_dict({"P": [encode_complex(1j)], "E": [0, "1"]})
        assert member.P == (1j,)
        assert member.d == 1

    def test_from_dict_missing_key(self):
        """Test a missing key is a member error"""
        with pytest.raises(InvalidFamilyMemberError):
            ExponentialFamilyMember.from_dict({"P": [1]})

    def test_field_value(self):
        """Test f = e^z / (z + 1) at 0"""
        field = ExponentialFamilyMember((1, 1), (0, 1)).field()
        assert abs(field(0j) - 1) < 1e-12
        assert "exp" in field.label

    def test_critical_points_and_count(self):
        """Test r critical points and 2d asymptotic values"""
        prediction = analyze_exponential(ExponentialFamilyMember.from_expressions("z^2 - 1", "z"))
        assert prediction.critical_points == pytest.approx([-1, 1], abs=1e-12)
        assert len(prediction.critical_values) == 2
        assert prediction.asymptotic_value_count == 2

    def test_directions_of_gaussian(self):
        """Test e^{z^2} is finite along the real axis and diverges along the imaginary one"""
        prediction = analyze_exponential(ExponentialFamilyMember((1,), (0, 0, 1)))
        assert prediction.finite_directions == pytest.approx([0, math.pi])
        assert prediction.infinite_directions == pytest.approx([math.pi / 2, 3 * math.pi / 2])
        assert prediction.pairings[0] == pytest.approx((0, math.pi / 2))

    def test_directions_rotate_with_leading_coefficient(self):
        """Test E = i z^2 turns the finite directions by -pi/4"""
        prediction = analyze_exponential(ExponentialFamilyMember((1,), (0, 0, 1j)))
        assert prediction.finite_directions == pytest.approx([3 * math.pi / 4, 7 * math.pi / 4])

    def test_to_dict(self):
        """Test the JSON form"""
        data = ExponentialFamilyMember((1,), (0, 1)).to_dict()
        assert data["family"] == "exponential"
        assert (data["r"], data["d"]) == (0, 1)
        assert data["E"][1] == {"re": 1.0, "im": 0.0}


@pytest.mark.unit
class TestPeriodicMember:
    """Test Psi = R(exp(2 pi i z / T))"""

    def test_from_expression(self):
        """Test numerator and denominator from an expression in w"""
        member = PeriodicFamilyMember.from_expression("w/(w^2 + 1)")
        assert member.numerator == (0j, 1 + 0j)
        assert member.denominator == (1 + 0j, 0j, 1 + 0j)
        assert (member.r, member.s, member.degree) == (1, 2, 2)

    def test_common_factor_rejected(self):
        """Test a shared root makes R degenerate"""
        with pytest.raises(DegenerateRationalError) as exc_info:
            PeriodicFamilyMember.from_expression("(w - 1)/(w^2 - 1)")
        assert exc_info.value.resultant < 1e-12

    def test_constant_rejected(self):
        """Test degree 0 is not a member"""
        with pytest.raises(InvalidFamilyMemberError):
            PeriodicFamilyMember((1,), (2,))

    def test_zero_period_rejected(self):
        """Test T = 0 is not a member"""
        with pytest.raises(InvalidFamilyMemberError):
            PeriodicFamilyMember((0, 1), (1,), 0)

    def test_scaled_resultant(self):
        """Test coprime pairs are far from zero"""
        assert scaled_resultant([0, 1], [1, 0, 1]) > 1e-3
        assert scaled_resultant([-1, 1], [-1, 0, 1]) < 1e-12
        assert scaled_resultant([1, 1], [2]) == 1.0

    def test_rational(self):
        """Test R at a point and at a pole"""
        member = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)")
        assert member.rational(1 + 0j) == 1.5
        assert is_infinite(member.rational(-1 + 0j))

    def test_field_from_psi(self):
        """Test R = w gives Psi = e^{iz} and f = -i e^{-iz}"""
        field = PeriodicFamilyMember.from_expression("w").field()
        assert abs(field(0j) + 1j) < 1e-12
        assert "periodic" in field.label

    def test_from_dict_with_period(self):
        """Test T is decoded with R"""
        member = PeriodicFamilyMember.from_dict({"R": "w", "T": {"re": 0.0, "im": 1.0}})
        assert member.period == 1j

    def test_dict_round_trip(self):
        """Test to_dict output is accepted by from_dict"""
        member = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)", period=3.0)
        assert PeriodicFamilyMember.from_dict(member.to_dict()) == member


@pytest.mark.unit
class TestPeriodicPrediction:
    """Test the case table of asymptotic values"""

    @pytest.mark.parametrize("a0,a_inf,case", [
        (2 + 0j, 1 + 0j, "i"), (0j, 0j, "ii"), (0j, INFINITY, "iii"), (INFINITY, 0j, "iii"),
        (INFINITY, INFINITY, "iv"),
    ])
    def test_periodic_case(self, a0, a_inf, case):
        """Test the configuration of {a0, a_inf, infinity}"""
        assert periodic_case(a0, a_inf) == case

    def test_distinct_finite_values(self):
        """Test a Moebius R has two finite values and double zeros"""
        prediction = analyze_periodic(PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)"))
        assert prediction.case == "i"
        assert (prediction.a0, prediction.a_inf) == (2, 1)
        assert prediction.zero_accumulation
        assert not prediction.pole_accumulation
        assert prediction.zero_order == 2
        assert prediction.tract_types == {"a0": TractType.HYPERBOLIC, "a_inf": TractType.HYPERBOLIC}

    def test_half_tangent_values(self):
        """Test R = -i(w-1)/(w+1), the Psi of tan(z/2) over period 2 pi, has values i and -i"""
        member = PeriodicFamilyMember.from_expression("-i*(w - 1)/(w + 1)", period=2 * math.pi)
        prediction = analyze_periodic(member)
        assert prediction.case == "i"
        assert abs(prediction.a0 - 1j) < 1e-12
        assert abs(prediction.a_inf + 1j) < 1e-12

    def test_equal_values(self):
        """Test w/(w^2+1) has a0 = a_inf = 0 with zeros and poles"""
        prediction = analyze_periodic(PeriodicFamilyMember.from_expression("w/(w^2 + 1)"))
        assert prediction.case == "ii"
        assert prediction.zero_accumulation
        assert prediction.pole_accumulation
        assert prediction.zero_order == 2

    def test_one_infinite_value(self):
        """Test R = w: e^{iz} omits 0 and infinity"""
        prediction = analyze_periodic(PeriodicFamilyMember.from_expression("w"))
        assert prediction.case == "iii"
        assert prediction.a0 == 0
        assert is_infinite(prediction.a_inf)
        assert not prediction.zero_accumulation
        assert not prediction.pole_accumulation
        assert prediction.tract_types["a_inf"] == TractType.ELLIPTIC

    def test_both_infinite(self):
        """Test w + 1/w = 2 cos z has poles and no zeros"""
        prediction = analyze_periodic(PeriodicFamilyMember.from_expression("w + 1/w"))
        assert prediction.case == "iv"
        assert not prediction.zero_accumulation
        assert prediction.pole_accumulation
        assert prediction.zero_order is None

    def test_rays_follow_period(self):
        """Test the probe directions rotate with T"""
        prediction = analyze_periodic(PeriodicFamilyMember.from_expression("w", period=2j * math.pi))
        assert abs(prediction.rays["a0"] + 1) < 1e-12
        assert abs(prediction.rays["a_inf"] - 1) < 1e-12

    def test_to_dict(self):
        """Test infinite values are encoded"""
        data = analyze_periodic(PeriodicFamilyMember.from_expression("w + 1/w")).to_dict()
        assert data["a0"] == "infinity"
        assert data["tract_types"]["a0"] == TractType.ELLIPTIC.value


@pytest.mark.unit
class TestRandomMembers:
    """Test sampling of periodic members"""

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_degree(self, degree):
        """Test samples are valid members of the requested degree"""
        rng = np.random.default_rng(degree)
        for _ in range(20):
            member = random_periodic_member(rng, degree)
            assert member.degree == degree

    def test_all_cases_occur(self):
        """Test every row of the case table is sampled"""
        rng = np.random.default_rng(11)
        cases = {analyze_periodic(random_periodic_member(rng, 2)).case for _ in range(400)}
        assert cases == {"i", "ii", "iii", "iv"}

    def test_case_matches_direct_evaluation(self):
        """Test a0 and a_inf from coefficients against R near 0 and at a large argument"""
        rng = np.random.default_rng(3)
        for _ in range(100):
            member = random_periodic_member(rng, 2)
            prediction = analyze_periodic(member)
            at_zero = member.rational(0j)
            if is_infinite(prediction.a0):
                assert is_infinite(at_zero)
            else:
                assert abs(at_zero - prediction.a0) < 1e-12
            far = member.rational(1e12 + 0j)
            if is_infinite(prediction.a_inf):
                assert abs(far) > 1e3
            else:
                assert abs(far - prediction.a_inf) < 1e-4 * max(1.0, abs(prediction.a_inf))

    def test_period_invariance(self):
        """Test f(z + T) = f(z) for a member of period 3"""
        field = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)", period=3.0).field()
        rng = np.random.default_rng(5)
        for x, y in rng.uniform(-2, 2, size=(100, 2)):
            z = complex(x, y)
            assert abs(field(z + 3) - field(z)) <= 1e-9 * max(1.0, abs(field(z)))

    def test_exhausted_attempts(self, mocker):
        """Test a sampler that only draws invalid members gives up"""
        mocker.patch("holoflow.families.PeriodicFamilyMember",
                     side_effect=InvalidFamilyMemberError("bad"))
        with pytest.raises(InvalidFamilyMemberError, match="after 3 draws"):
            random_periodic_member(np.random.default_rng(0), 1, attempts=3)


@pytest.mark.unit
class TestCrosscheck:
    """Test predictions against the numeric pipeline"""

    def test_exponential_agrees(self, fast_settings):
        """Test e^z: no critical points, one value, one diverging sector"""
        report = crosscheck(ExponentialFamilyMember((1,), (0, 1)), window=(-2, 2, -2, 2),
                            settings=fast_settings)
        assert report.agrees, report.mismatches
        assert report.observed["diverging_sectors"] == 1

    def test_periodic_agrees(self, fast_settings):
        """Test double zeros on the real axis and both limits"""
        member = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)")
        report = crosscheck(member, window=(-4, 4, -2, 2), settings=fast_settings)
        assert report.agrees, report.mismatches
        assert len(report.observed["zeros"]) == 2
        assert "a0 probe" in " ".join(report.matches)

    def test_mismatch_is_reported(self, fast_settings, mocker):
        """Test a disagreement is listed rather than raised"""
        mocker.patch("holoflow.families.scan_window", return_value=[])
        member = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)")
        report = crosscheck(member, window=(-4, 4, -2, 2), settings=fast_settings)
        assert not report.agrees
        assert any(m.startswith("zero accumulation") for m in report.mismatches)
        assert report.to_dict()["mismatches"] == report.mismatches

    @pytest.mark.slow
    @pytest.mark.parametrize("p_source,e_source,r,d", [
        ("1", "z", 0, 1), ("z", "z", 1, 1), ("1", "z^2", 0, 2), ("z^2 - 1", "z^2", 2, 2),
    ])
    def test_exponential_members_agree(self, fast_settings, p_source, e_source, r, d):
        """Test r critical points, d finite values and d diverging sectors in a radius 10 window"""
        member = ExponentialFamilyMember.from_expressions(p_source, e_source)
        assert (member.r, member.d) == (r, d)
        report = crosscheck(member, window=(-10, 10, -10, 10), settings=fast_settings)
        assert report.agrees, report.mismatches
        assert len(report.observed["critical_points"]) == r
        assert len(report.observed["finite_values"]) == d
        assert report.observed["diverging_sectors"] == d

    @pytest.mark.slow
    @pytest.mark.parametrize("source,case,a0,a_inf,zeros,poles", [
        ("-i*(w - 1)/(w + 1)", "i", 1j, -1j, True, False),
        ("w/(w^2 + 1)", "ii", 0j, 0j, True, True),
        ("(w^2 - 1)/(2*i*w)", "iv", INFINITY, INFINITY, False, True),
    ])
    def test_periodic_members_agree(self, fast_settings, source, case, a0, a_inf, zeros, poles):
        """Test case, limits and accumulation of zeros and poles over a radius 10 window"""
        member = PeriodicFamilyMember.from_expression(source)
        prediction = analyze_periodic(member)
        assert prediction.case == case
        for value, expected in ((prediction.a0, a0), (prediction.a_inf, a_inf)):
            if is_infinite(expected):
                assert is_infinite(value)
            else:
                assert abs(value - expected) < 1e-12
        report = crosscheck(member, window=(-10, 10, -10, 10), settings=fast_settings)
        assert report.agrees, report.mismatches
        assert bool(report.observed["zeros"]) == zeros
        assert bool(report.observed["poles"]) == poles
        if zeros:
            assert {p["multiplicity"] for p in report.observed["zeros"]} == {2}
        if poles:
            assert {p["multiplicity"] for p in report.observed["poles"]} == {-1}

    @pytest.mark.slow
    def test_periodic_taxonomy(self, fast_settings):
        """Test both finite values are logarithmic over hyperbolic tracts"""
        member = PeriodicFamilyMember.from_expression("(w + 2)/(w + 1)")
        report = crosscheck(member, window=(-4, 4, -4, 4), settings=fast_settings, taxonomy=True)
        assert report.agrees, report.mismatches


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
