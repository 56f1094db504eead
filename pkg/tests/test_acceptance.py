"""Acceptance gate: one test per criterion, summarised at the end of the run."""

import math
import time
from collections import Counter

import numpy as np
import pytest

from replicator_lab.certify import certify, check_A2, default_a_grid
from replicator_lab.maps import (
    ConjugateMap,
    MapParams,
    ReplicatorMap,
    conjugacy_residual,
    critical_points,
    inv_logit,
    schwarzian,
    symmetry_residual,
)
from replicator_lab.periodic import attractor_census, bifurcation_scan, find_periodic, periodic_points, verify_mean_law
from replicator_lab.shiftlab import FunctionBasis, coboundary_lsq
from replicator_lab.symbolic import (
    _bitmask_words,
    brute_force_cyclic,
    counts,
    enumerate_linear,
    enumerate_periodic,
    fibonacci,
    lucas,
)

FOUR = [(12, 1 / 3), (30, 1 / 3), (30, 0.25), (30, 0.75)]


def note(request, text):
    request.node.criterion_detail = text


@pytest.mark.criterion(1, "mean-value law on all interior orbits up to period 8")
def test_mean_law(request):
    t0 = time.perf_counter()
    worst, worst_res, total = 0.0, 0.0, 0
    for a, b in FOUR:
        orbits = [o for n in range(1, 9) for o in find_periodic(MapParams(a, b), n)]
        rep = verify_mean_law(orbits, b, tol=1e-8)
        assert rep.passed, rep.violations[:3]
        interior = [o for o in orbits if o.interior]
        worst_res = max([worst_res] + [o.residual for o in interior])
        worst = max(worst, rep.worst_deviation)
        total += rep.checked
    dt = time.perf_counter() - t0
    note(request, f"{total} orbits, worst |mean-b|={worst:.2e}, worst defect={worst_res:.1e}, {dt:.1f}s")
    assert worst_res <= 1e-12
    assert dt <= 120


@pytest.mark.criterion(2, "conjugacy residual <= 1e-10 on a 10^4 grid")
def test_conjugacy(request):
    grid = np.linspace(0.01, 0.99, 10_000)
    res = [conjugacy_residual(MapParams(a, b), grid) for a, b in FOUR]
    note(request, f"max {max(res):.2e}")
    assert max(res) <= 1e-10


@pytest.mark.criterion(3, "symmetry f_{a,1-b}(x) = 1 - f_{a,b}(1-x) to 1e-12")
def test_symmetry(request):
    grid = np.linspace(0.0, 1.0, 10_001)
    params = FOUR + [(4.5, 0.2), (8, 1 / 3), (100, 0.1), (1000, 0.4)]
    res = [symmetry_residual(MapParams(a, b), grid) for a, b in params]
    note(request, f"max {max(res):.2e}")
    assert max(res) <= 1e-12


@pytest.mark.criterion(4, "full certificate at (30, 1/3)")
def test_certificate(request):
    t0 = time.perf_counter()
    c = certify(MapParams(30, 1 / 3), depth=10)
    dt = time.perf_counter() - t0
    note(request, f"A2 margins {tuple(round(m, 3) for m in c.a2_margins)}, A6 product {c.a6_product:.3f}, "
                  f"expansion margin {c.expansion_margin:.3f}, {dt:.2f}s")
    assert all(m > 0 for m in c.a2_margins)
    assert c.a6_product > 1
    assert abs(c.a6_product - 3.1) <= 0.2
    assert c.covering["all"]
    assert c.expansion_margin > 0
    assert c.passed
    assert dt <= 10


@pytest.mark.criterion(5, "symbolic counts B_n = L_n and A_n = F_{n+2} for n <= 20")
def test_symbolic_counts(request):
    t0 = time.perf_counter()
    assert counts(1).B_n == 1 and counts(2).B_n == 3
    for n in range(1, 21):
        assert len(enumerate_periodic(n)[0]) == lucas(n)
        assert len(_bitmask_words(n, True)) == lucas(n)
        assert len(enumerate_linear(n)) == fibonacci(n + 2)
        t = counts(n)
        assert t.verified and t.B_n == t.L_n and t.A_n == fibonacci(n + 2)
    for n in range(1, 13):
        assert len(brute_force_cyclic(n)) == lucas(n)
    dt = time.perf_counter() - t0
    note(request, f"{dt:.2f}s")
    assert dt <= 5


@pytest.mark.criterion(6, "at least L_n solutions of g^n(y)=y in J1 u J2 for n <= 10")
def test_periodic_lower_bound(request):
    t0 = time.perf_counter()
    P = MapParams(30, 1 / 3)
    c = certify(P)
    found = []
    for n in range(1, 11):
        sols = periodic_points(ConjugateMap(P), n, domain=[c.J1, c.J2])
        found.append(len(sols))
        assert len(sols) >= lucas(n), (n, len(sols))
    dt = time.perf_counter() - t0
    note(request, f"counts {found}, {dt:.1f}s")
    assert found[2] >= 4 and found[9] >= 123
    assert dt <= 300


@pytest.mark.criterion(7, "period 1 -> 2 change at b=1/3 within a in [8.9, 9.1]")
def test_stability_threshold(request):
    tab = bifurcation_scan(1 / 3, (8.0, 10.0), 401)
    a = tab.first_change(1, 2)
    note(request, f"change at a={a}")
    assert a is not None and 8.9 <= a <= 9.1


@pytest.mark.criterion(8, "Schwarzian derivative never positive on interior grids")
def test_schwarzian(request):
    worst = -math.inf
    for a in (4.5, 8, 30):
        for b in (0.2, 1 / 3, 0.5):
            P = MapParams(a, b)
            x_max, x_min = critical_points(P)
            x = np.linspace(0.0, 1.0, 10_002)[1:-1]
            x = x[(np.abs(x - x_max) > 1e-4) & (np.abs(x - x_min) > 1e-4)]
            S = schwarzian(P, x)
            assert not np.any(np.isnan(S))
            worst = max(worst, float(np.max(S)))
    note(request, f"largest value {worst:.3g}")
    assert worst <= 0


@pytest.mark.criterion(9, "coboundary fit of x-b with the logit at (30, 1/3)")
def test_coboundary(request):
    P = MapParams(30, 1 / 3)
    g = ConjugateMap(P)
    y_max, y_min = g.critical_points()
    lo, hi = float(inv_logit(g(y_max))), float(inv_logit(g(y_min)))
    d = 1e-3 * (hi - lo)
    cycles = [o.points for n in range(1, 7) for o in find_periodic(P, n) if o.interior]
    samples = np.concatenate([np.linspace(lo + d, hi - d, 2000)] + cycles)
    basis = FunctionBasis.chebyshev(16, (lo, hi), include_logit=True)
    fit = coboundary_lsq(ReplicatorMap(P), lambda x: x - P.b, basis, samples)
    rel = abs(fit.coefficient("logit") * P.a + 1)
    note(request, f"residual {fit.residual:.2e}, logit coefficient relative error {rel:.2e}")
    assert fit.residual <= 1e-9
    assert rel <= 1e-6


@pytest.mark.criterion(10, "b=1/2: no attractor of period > 2 and no certificate")
def test_half(request):
    tab = bifurcation_scan(0.5, (4.05, 100.0), 1000)
    seen = Counter(tab.periods)
    assert None not in seen
    assert max(seen) <= 2
    census = [attractor_census(MapParams(a, 0.5)) for a in np.linspace(4.1, 100, 60)]
    cperiods = {r.period for c in census for r in c.attractors}
    assert None not in cperiods and max(cperiods) <= 2
    grid = default_a_grid(4.1, 200.0)
    m3 = [check_A2(MapParams(a, 0.5))[0][2] for a in grid]
    passed = [certify(MapParams(a, 0.5)).passed for a in grid]
    note(request, f"scan periods {dict(sorted(seen.items()))}, census periods {sorted(cperiods)}, "
                  f"max margin (iii) {max(m3):.3f}")
    assert max(m3) <= 0
    assert not any(passed)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
