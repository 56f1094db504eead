import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from replicator_lab.certify import certify
from replicator_lab.maps import ConjugateMap, IntervalMap, MapParams, ReplicatorMap, eval_f
from replicator_lab.periodic import (
    PeriodicOrbit,
    attractor_census,
    bifurcation_scan,
    classify,
    find_periodic,
    grid_size,
    periodic_points,
    periodic_search,
    refine_cycle,
    verify_mean_law,
)
from replicator_lab.symbolic import least_period_orbit_counts, lucas

P8 = MapParams(8, 1 / 3)
P12 = MapParams(12, 1 / 3)
P30 = MapParams(30, 1 / 3)


def f_n(params, x, n):
    for _ in range(n):
        x = eval_f(params, x)
    return x


class Parabola(IntervalMap):
    """``x + (x - 1/2)^2`` touches the diagonal without crossing it."""

    name = "parabola"
    domain = (0.0, 1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x + (x - 0.5) ** 2

    def deriv(self, x):
        return 1.0 + 2.0 * (np.asarray(x, dtype=float) - 0.5)


class Logistic(IntervalMap):
    name = "logistic"
    domain = (0.0, 1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return 4.0 * x * (1.0 - x)

    def deriv(self, x):
        return 4.0 - 8.0 * np.asarray(x, dtype=float)


class TestSearch:
    def test_fixed_points_f8(self):
        pts = periodic_points(P8, 1)
        assert len(pts) == 3
        assert pts[0] == 0.0 and pts[2] == 1.0
        assert pts[1] == pytest.approx(1 / 3, abs=1e-15)
        orbs = find_periodic(P8, 1)
        assert [o.interior for o in orbs] == [False, True, False]

    def test_two_cycle_f12_against_dense_grid(self):
        orbs = find_periodic(ReplicatorMap(P12), 2)
        assert len(orbs) == 1
        o = orbs[0]
        assert abs(o.mean - 1 / 3) <= 1e-8
        # oracle: sign changes of f^2(x) - x on a dense grid away from 0, b, 1
        x = np.linspace(1e-6, 1 - 1e-6, 1_000_001)
        F = f_n(P12, x, 2) - x
        idx = np.nonzero(np.sign(F[:-1]) * np.sign(F[1:]) < 0)[0]
        roots = [brentq(lambda t: float(f_n(P12, t, 2)) - t, x[i], x[i + 1], xtol=1e-15) for i in idx]
        roots = [r for r in roots if abs(r - 1 / 3) > 1e-6]
        assert len(roots) == 2
        assert np.allclose(sorted(roots), o.points, atol=1e-10)

    def test_lucas_lower_bound_small_n(self):
        cert = certify(P30)
        for n in range(1, 7):
            sols = periodic_points(ConjugateMap(P30), n, domain=[cert.J1, cert.J2])
            assert len(sols) >= lucas(n)
        assert len(periodic_points(ConjugateMap(P30), 3, domain=[cert.J1, cert.J2])) >= 4

    def test_least_period_split(self):
        res = periodic_search(ConjugateMap(P30), 4)
        # solutions include the fixed point and the 2-cycle
        assert np.any(np.abs(res.solutions - math.log(2)) < 1e-12)
        assert all(o.least_period == 4 for o in res.orbits)
        assert len(res.solutions) >= sum(len(o.points) for o in res.orbits) + 3

    @pytest.mark.parametrize("params", [P30, MapParams(30, 0.75), MapParams(30, 0.25)])
    def test_orbit_quality(self, params):
        for n in range(1, 7):
            for o in find_periodic(params, n):
                assert o.residual <= 1e-12
                nxt = np.roll(o.points, -1)
                assert np.max(np.abs(eval_f(params, o.points) - nxt)) <= 1e-10

    def test_composed_residual_in_y(self):
        eps = np.finfo(float).eps
        for n in range(1, 11):
            for o in find_periodic(ConjugateMap(P30), n):
                if n <= 5:
                    assert o.composed_residual <= 1e-12
                # straight composition is limited by the conditioning |multiplier|
                scale = max(1.0, abs(o.multiplier)) * (1.0 + np.max(np.abs(o.points)))
                assert o.composed_residual <= 4 * eps * scale

    def test_generic_map(self):
        res = periodic_search(Logistic(), 3)
        # the logistic map at r=4 has two 3-cycles
        assert len(res.orbits) == 2
        assert len(res.solutions) == 8
        for o in res.orbits:
            assert o.kind == "generic"
            assert abs(abs(o.multiplier) - 8.0) <= 1e-8

    def test_tangency_is_reported_not_solved(self):
        res = periodic_search(Parabola(), 1)
        assert res.orbits == []
        assert len(res.tangencies) >= 1
        assert res.tangencies[0].point == pytest.approx(0.5, abs=1e-6)

    def test_grid_size(self):
        assert grid_size(1) == 10_000
        assert grid_size(10) == 512_000
        assert grid_size(30) == 2_000_000

    def test_refine_cycle(self):
        g = ConjugateMap(P30)
        pts, defect, ok = refine_cycle(g, g.deriv, np.array([0.69]))
        assert ok and defect <= 1e-14
        assert pts[0] == pytest.approx(math.log(2), abs=1e-14)

    def test_bad_period(self):
        with pytest.raises(ValueError):
            periodic_search(P8, 0)


class TestSymmetryTransport:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_reflection(self, n):
        a = find_periodic(MapParams(30, 1 / 3), n)
        b = find_periodic(MapParams(30, 2 / 3), n)
        assert len(a) == len(b)
        for o in a:
            img = 1.0 - o.points
            k = int(np.argmin(img))
            img = np.roll(img, -k)
            assert any(np.allclose(img, q.points, atol=1e-9) for q in b)


class TestMeanLaw:
    def test_fixed_point_b(self):
        rep = verify_mean_law(find_periodic(P8, 1), 1 / 3)
        assert rep.checked == 1 and rep.excluded == 2
        assert rep.worst_deviation <= 1e-15
        assert rep.passed

    def test_up_to_period_8(self):
        orbs = [o for n in range(1, 9) for o in find_periodic(P30, n)]
        rep = verify_mean_law(orbs, 1 / 3)
        assert rep.checked == 18
        assert rep.checked >= sum(least_period_orbit_counts(n) for n in range(1, 9))
        assert rep.worst_deviation <= 1e-8

    def test_violation_recorded(self):
        fake = PeriodicOrbit(1, np.array([0.5]), 0.0, 0.5, 0.0)
        rep = verify_mean_law([fake], 1 / 3)
        assert not rep.passed
        assert rep.violations[0]["deviation"] == pytest.approx(1 / 6)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(5.0, 60.0), st.floats(0.1, 0.9), st.integers(1, 5))
    def test_law_holds_generally(self, a, b, n):
        rep = verify_mean_law(find_periodic(MapParams(a, b), n), b)
        assert rep.passed


class TestClassify:
    def test_examples(self):
        o8 = find_periodic(P8, 1)
        assert classify(o8[1]) == "stable"
        assert o8[1].multiplier == pytest.approx(-7 / 9, abs=1e-14)
        assert classify(o8[0]) == "unstable"
        assert o8[0].multiplier == pytest.approx(math.exp(8 / 3), rel=1e-13)
        o9 = find_periodic(MapParams(9, 1 / 3), 1)
        assert classify(o9[1]) == "neutral"
        assert classify(0.0) == "superstable"

    def test_as_dict(self):
        d = find_periodic(P30, 2)[0].as_dict()
        assert d["period"] == 2 and d["stability"] == "unstable"


class TestCensus:
    def test_stable_fixed_point(self):
        c = attractor_census(P8)
        assert c.count == 1
        assert c.attractors[0].period == 1
        assert c.attractors[0].points[0] == pytest.approx(1 / 3, abs=1e-9)
        assert sorted(c.attractors[0].seeds) == ["x_max", "x_min"]

    def test_two_cycle(self):
        c = attractor_census(P12)
        assert c.count == 1
        assert c.attractors[0].period == 2
        assert np.mean(c.attractors[0].points) == pytest.approx(1 / 3, abs=1e-8)

    def test_three_cycle(self):
        c = attractor_census(P30)
        assert c.count == 1 and c.attractors[0].period == 3

    def test_aperiodic(self):
        c = attractor_census(MapParams(20, 0.2))
        assert c.attractors[0].period is None

    def test_needs_two_critical_points(self):
        with pytest.raises(ValueError):
            attractor_census(MapParams(3, 0.3))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(4.2, 80.0), st.floats(0.05, 0.95))
    def test_at_most_two(self, a, b):
        assert attractor_census(MapParams(a, b), transient=3000, window=256).count <= 2


class TestBifurcation:
    def test_period_doubling_at_nine(self):
        tab = bifurcation_scan(1 / 3, (8.5, 9.5), 101)
        a = tab.first_change(1, 2)
        assert a is not None and abs(a - 9.0) <= 0.1
        # 64 samples from each critical seed
        assert tab.samples.shape == (101, 128)
        assert len(list(tab.rows())) == 101 * 128

    def test_mirror_symmetry(self):
        t1 = bifurcation_scan(0.3, (5, 15), 41)
        t2 = bifurcation_scan(0.7, (5, 15), 41)
        assert t1.periods == t2.periods

    def test_parallel_matches_serial(self):
        t1 = bifurcation_scan(1 / 3, (8, 12), 16)
        t2 = bifurcation_scan(1 / 3, (8, 12), 16, jobs=2)
        assert t1.periods == t2.periods
        assert np.array_equal(t1.samples, t2.samples)

    def test_rejects_monotone_range(self):
        with pytest.raises(ValueError):
            bifurcation_scan(1 / 3, (3.0, 5.0))
