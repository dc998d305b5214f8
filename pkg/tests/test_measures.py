import math
from fractions import Fraction

import numpy as np
import pytest

from cubiperc import (
    CellGrid,
    TailCurve,
    WindowSpec,
    empirical_measure,
    fit_tail_decay,
    lipschitz_check,
    sandwich_check,
    tail_mass,
    total_variation,
)
from cubiperc.errors import DomainError, FitError, GeometryError, UndefinedMeasureError
from cubiperc.clusters import summarize_components
from cubiperc.lattice import CouplingField, sample_coupling_field, sample_window
from cubiperc.measures import measure_from_counts, tail_curve


def window_grid(L, occ):
    w = WindowSpec.centered(2, L)
    return w, CellGrid.for_window(w, occ)


def test_single_interior_cell_measure():
    occ = np.zeros((5, 5), bool)
    occ[2, 2] = True
    w, g = window_grid(5, occ)
    m = empirical_measure(summarize_components(g, w), w)
    assert m.a(0) == 1.0 and m.a_exact(0) == Fraction(1)
    assert m.c(0) == 1 / 25 and m.c_L == 1 / 25


def test_full_window_is_undefined_under_N():
    w, g = window_grid(6, np.ones((6, 6), bool))
    s = summarize_components(g, w)
    with pytest.raises(UndefinedMeasureError):
        empirical_measure(s, w, p=1.0)
    assert not empirical_measure(s, w, allow_undefined=True).defined
    star = empirical_measure(s, w, counting="Nstar")
    assert star.counts == {0: 1}


def test_a_sums_to_one_exactly():
    w = WindowSpec.centered(2, 60)
    for seed in range(5):
        g = sample_window(w, 0.5, seed)
        for counting in ("N", "Nstar"):
            m = empirical_measure(summarize_components(g, w, "closed"), w, counting=counting)
            assert sum(m.a_exact(k) for k in m.support()) == 1


def test_total_variation_examples():
    m = measure_from_counts({0: 3, 1: 1}, 4, 2, 10)
    assert total_variation(m, m) == 0
    d0 = measure_from_counts({0: 2}, 2, 2, 10)
    d1 = measure_from_counts({1: 5}, 5, 2, 10)
    assert total_variation(d0, d1) == 1
    half = measure_from_counts({0: 1, 1: 1}, 2, 2, 10)
    assert total_variation(m, half) == 0.25


def test_measure_from_counts_validates():
    with pytest.raises(DomainError):
        measure_from_counts({0: 2}, 3, 2, 10)
    with pytest.raises(DomainError):
        measure_from_counts({0: 2}, 2, 2, 10, counting="all")


def test_tail_mass():
    delta0 = measure_from_counts({0: 4}, 4, 2, 10)
    assert tail_mass(delta0, 1, 0) == 1.0
    assert tail_mass(delta0, 1, 1) == 0.0
    m = measure_from_counts({0: 6, 1: 2, 3: 2}, 10, 2, 10)
    assert [tail_mass(m, 1, n) for n in (1, 2, 3, 4)] == [0.4, 0.2, 0.2, 0.0]
    with pytest.raises(DomainError):
        tail_mass(m, 2, 1)
    m3 = measure_from_counts({(0, 0): 3, (2, 1): 1}, 4, 3, 10)
    assert tail_mass(m3, 1, 2) == 0.25 and tail_mass(m3, 2, 1) == 0.25
    curve = tail_curve(m, 1, 4)
    assert curve.masses().tolist() == [0.4, 0.2, 0.2, 0.0]


def synthetic(fn, d=2, n=12):
    return TailCurve(1, d, tuple((k, fn(k)) for k in range(1, n + 1)))


def test_fit_exact_exponential():
    fit = fit_tail_decay(synthetic(lambda n: math.exp(-0.5 * n)))
    assert abs(fit.rate - 0.5) < 1e-9 and abs(fit.r2 - 1) < 1e-12


def test_fit_exact_stretched():
    fit = fit_tail_decay(synthetic(lambda n: math.exp(-2 * math.sqrt(n))), "stretched")
    assert abs(fit.rate - 2) < 1e-9
    exp_fit = fit_tail_decay(synthetic(lambda n: math.exp(-2 * math.sqrt(n))), "exponential")
    assert exp_fit.r2 < fit.r2


def test_fit_errors():
    with pytest.raises(FitError):
        fit_tail_decay(synthetic(lambda n: 0.5 if n <= 2 else 0.0))
    with pytest.raises(FitError):
        fit_tail_decay(synthetic(lambda n: 0.1 * n))
    with pytest.raises(DomainError):
        fit_tail_decay(synthetic(lambda n: 1.0), "power")
    fit = fit_tail_decay(synthetic(lambda n: math.exp(-n) if n < 6 else 0.0))
    assert fit.truncated == tuple(range(6, 13)) and fit.n_points == 5
    ranged = fit_tail_decay(synthetic(lambda n: math.exp(-n)), fit_range=(2, 5))
    assert ranged.n_points == 4 and ranged.fit_range == (2, 5)


def test_sandwich_white_grid():
    w, g = window_grid(20, np.zeros((20, 20), bool))
    r = sandwich_check(g, w, 5)
    assert (r.lower_count, r.count, r.upper_count) == (0, 0, 0) and r.holds


def test_sandwich_lower_bound_positive_on_annulus():
    occ = np.zeros((20, 20), bool)
    occ[2:5, 2:5] = True
    occ[3, 3] = False
    w, g = window_grid(20, occ)
    r = sandwich_check(g, w, 10, key=1)
    assert r.lower_count == 1 and r.count == 1 and r.upper_count >= 1 and r.holds
    assert r.lower <= r.value <= r.upper


@pytest.mark.parametrize("mode", ["open", "closed"])
def test_sandwich_random(mode):
    w = WindowSpec.centered(2, 60)
    for p in (0.3, 0.6):
        for seed in range(10):
            g = sample_window(w, p, seed)
            for key in (0, 1, 2, None):
                assert sandwich_check(g, w, 10, key, mode).holds
    with pytest.raises(GeometryError):
        sandwich_check(g, w, 60)


def test_lipschitz_trivial_cases():
    w = WindowSpec.centered(2, 30)
    f = sample_coupling_field((30, 30), w.corner, 4)
    r = lipschitz_check(f, w, 0.4, 0.4)
    assert r.flipped == 0 and r.count1 == r.count2 and r.holds
    vals = np.full((30, 30), 0.9)
    vals[:15] = 0.2
    f2 = CouplingField(vals, w.corner)
    r = lipschitz_check(f2, w, 0.3, 0.35)
    assert r.flipped == 0 and r.count1 == r.count2
    with pytest.raises(DomainError):
        lipschitz_check(f, w, 0.5, 0.4)
    with pytest.raises(GeometryError):
        lipschitz_check(f, WindowSpec.centered(2, 31), 0.1, 0.2)


def test_lipschitz_random():
    w = WindowSpec.centered(2, 100)
    rng = np.random.default_rng(1)
    for i in range(15):
        f = sample_coupling_field((100, 100), w.corner, i)
        p1, p2 = np.sort(rng.random(2))
        r = lipschitz_check(f, w, p1, p2, key=int(i % 3), mode="closed")
        assert r.holds and r.monotone


def test_weighted_fit():
    pts = tuple((n, math.exp(-0.7 * n)) for n in range(1, 9))
    counts = tuple(int(1e6 * m) for _, m in pts)
    curve = TailCurve(1, 2, pts, {}, counts)
    fit = fit_tail_decay(curve, weighted=True)
    assert fit.weighted and abs(fit.rate - 0.7) < 1e-9 and abs(fit.r2 - 1) < 1e-12
    # A plateau of single-cluster points barely moves the weighted slope.
    noisy = TailCurve(1, 2, pts[:5] + tuple((n, 1e-6) for n in range(6, 12)), {}, counts[:5] + (1,) * 6)
    assert fit_tail_decay(noisy, weighted=True).r2 > fit_tail_decay(noisy).r2
    with pytest.raises(DomainError):
        fit_tail_decay(TailCurve(1, 2, pts), weighted=True)


def test_tail_curve_carries_counts():
    m = measure_from_counts({0: 6, 1: 2, 3: 2}, 10, 2, 10)
    assert tail_curve(m, 1, 4).counts == (4, 2, 2, 0)
