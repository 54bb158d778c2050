"""Travel-time function algebra: examples and randomized properties."""

from __future__ import annotations

import random

import numpy as np
import pytest

import tdsweep.ttf as ttf_mod
from tdsweep.ttf import (
    DEFAULT_PERIOD,
    PeriodMismatchError,
    TTF,
    approximate,
    dominates,
    evaluate,
    extrema,
    link,
    merge_min,
    validate_fifo,
)

from conftest import random_fifo_ttf, sample_times


@pytest.fixture(autouse=True)
def _debug_validate():
    ttf_mod.DEBUG_VALIDATE = True
    yield
    ttf_mod.DEBUG_VALIDATE = False


# -- construction ---------------------------------------------------------


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        TTF([])
    with pytest.raises(ValueError):
        TTF([(0.0, -5.0)])
    with pytest.raises(ValueError):
        TTF([(0.0, 10.0), (0.0, 20.0)])  # not strictly increasing
    with pytest.raises(ValueError):
        TTF([(0.0, 10.0), (90000.0, 20.0)])  # time beyond period
    with pytest.raises(ValueError):
        TTF([(0.0, 1000.0), (100.0, 500.0)])  # slope -5 breaks FIFO


def test_constant_is_single_point():
    f = TTF([(0.0, 7.0), (100.0, 7.0), (200.0, 7.0)])
    assert len(f) == 1
    assert f.points == [(0.0, 7.0)]


def test_collinear_points_are_dropped():
    f = TTF([(0.0, 100.0), (100.0, 200.0), (200.0, 300.0), (300.0, 250.0)])
    assert len(f) == 3
    assert f.evaluate(100.0) == pytest.approx(200.0, abs=1e-9)


# -- evaluate ---------------------------------------------------------------


def test_evaluate_constant():
    f = TTF([(0.0, 100.0)])
    assert evaluate(f, 5000.0) == 100.0


def test_evaluate_midpoint_interpolation():
    f = TTF([(0.0, 100.0), (43200.0, 200.0)])
    assert evaluate(f, 21600.0) == pytest.approx(150.0, abs=1e-9)


def test_evaluate_periodicity():
    f = TTF([(0.0, 100.0), (43200.0, 200.0)])
    assert evaluate(f, 86400.0 + 21600.0) == pytest.approx(150.0, abs=1e-9)
    assert evaluate(f, -86400.0 + 21600.0) == pytest.approx(150.0, abs=1e-9)


def test_evaluate_matches_vectorized(rng):
    for _ in range(50):
        f = random_fifo_ttf(rng)
        taus = sample_times(rng, 100)
        many = f.evaluate_many(taus)
        for tau, expect in zip(taus, many):
            assert f.evaluate(tau) == pytest.approx(expect, abs=1e-9)


def test_evaluate_exact_periodicity(rng):
    # departure times on a dyadic grid so that tau + period is itself exact
    for _ in range(20):
        f = random_fifo_ttf(rng)
        for tau in sample_times(rng, 20):
            tau = round(float(tau) * 1024.0) / 1024.0
            assert f.evaluate(tau) == f.evaluate(tau + f.period)
            assert f.evaluate(tau) == f.evaluate(tau - f.period)


# -- link -------------------------------------------------------------------


def test_link_constants_add():
    r = link(TTF.constant(600.0), TTF.constant(300.0))
    assert r.points == [(0.0, 900.0)]


def test_link_constant_after_arbitrary_keeps_breakpoints(rng):
    for _ in range(20):
        f = random_fifo_ttf(rng)
        r = link(f, TTF.constant(300.0))
        assert np.array_equal(r.times, f.times)
        assert np.allclose(r.values, f.values + 300.0)


def test_link_spot_check_example():
    f = TTF([(0.0, 100.0), (43200.0, 200.0)])
    r = link(f, f)
    # traversing f then f, departing at 0: f(0)=100, then f(100)+100
    expect = 100.0 + (100.0 + 100.0 * (100.0 / 43200.0))
    assert r.evaluate(0.0) == pytest.approx(expect, abs=1e-6)
    assert r.evaluate(0.0) == pytest.approx(200.2314814814, abs=1e-6)


def test_link_pointwise_definition(rng):
    for _ in range(60):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        r = link(f, g)
        taus = sample_times(rng, 1000)
        fv = f.evaluate_many(taus)
        expect = g.evaluate_many(taus + fv) + fv
        got = r.evaluate_many(taus)
        assert np.max(np.abs(got - expect)) <= 1e-6 * (1.0 + np.max(np.abs(expect)))


def test_link_associativity(rng):
    for _ in range(40):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        h = random_fifo_ttf(rng)
        left = link(link(f, g), h)
        right = link(f, link(g, h))
        taus = sample_times(rng, 1000)
        lv = left.evaluate_many(taus)
        rv = right.evaluate_many(taus)
        assert np.max(np.abs(lv - rv)) <= 1e-6 * (1.0 + np.max(np.abs(lv)))


def test_link_size_bound(rng):
    for _ in range(200):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        assert len(link(f, g)) <= 2 * (len(f) + len(g)) + 2


def test_link_fifo_closure(rng):
    for _ in range(200):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        assert link(f, g).validate_fifo()


def test_link_period_mismatch():
    with pytest.raises(PeriodMismatchError):
        link(TTF.constant(1.0, period=100.0), TTF.constant(1.0, period=200.0))


# -- merge_min ----------------------------------------------------------------


def test_merge_constant_dominance():
    r = merge_min(TTF.constant(100.0), TTF.constant(90.0))
    assert r.points == [(0.0, 90.0)]


def test_merge_idempotent(rng):
    for _ in range(20):
        f = random_fifo_ttf(rng)
        assert merge_min(f, f) is f


def test_merge_identity_when_other_never_wins(rng):
    for _ in range(20):
        f = random_fifo_ttf(rng)
        worse = TTF._raw(f.times, f.values + 5.0, f.period)
        assert merge_min(f, worse) is f
        assert merge_min(worse, f) is f  # f wins everywhere: return the winner


def test_merge_crossing_example():
    f = TTF([(0.0, 100.0), (43200.0, 200.0)])
    g = TTF([(0.0, 150.0)])
    r = merge_min(f, g)
    assert r.points == [(0.0, 100.0), (21600.0, 150.0), (64800.0, 150.0)]


def test_merge_pointwise_definition(rng):
    for _ in range(60):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        r = merge_min(f, g)
        taus = sample_times(rng, 1000)
        expect = np.minimum(f.evaluate_many(taus), g.evaluate_many(taus))
        got = r.evaluate_many(taus)
        assert np.max(np.abs(got - expect)) <= 1e-6 * (1.0 + np.max(np.abs(expect)))


def test_merge_size_bound_and_fifo(rng):
    for _ in range(200):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        r = merge_min(f, g)
        assert len(r) <= 2 * (len(f) + len(g)) + 2
        assert r.validate_fifo()


def test_merge_period_mismatch():
    with pytest.raises(PeriodMismatchError):
        merge_min(TTF.constant(1.0, period=100.0), TTF.constant(1.0, period=200.0))


# -- extrema -------------------------------------------------------------------


def test_extrema_examples():
    assert extrema(TTF([(0.0, 100.0), (43200.0, 200.0)])) == (100.0, 200.0)
    assert extrema(TTF([(0.0, 7.0)])) == (7.0, 7.0)
    # interior breakpoint minimum (times spaced so slopes respect FIFO)
    assert extrema(TTF([(0.0, 100.0), (100.0, 50.0), (200.0, 100.0)])) == (50.0, 100.0)


# -- dominates -------------------------------------------------------------------


def test_dominates_examples():
    assert dominates(TTF.constant(300.0), TTF.constant(200.0), strict=True)
    f = TTF([(0.0, 100.0), (43200.0, 200.0)])
    assert not dominates(f, f, strict=True)
    assert dominates(f, f, strict=False)
    assert not dominates(f, TTF.constant(150.0), strict=True)  # they cross


def test_dominates_consistency(rng):
    strict_seen = nonstrict_fail_seen = 0
    for _ in range(300):
        f = random_fifo_ttf(rng)
        g = random_fifo_ttf(rng)
        taus = sample_times(rng, 1000)
        fv = f.evaluate_many(taus)
        gv = g.evaluate_many(taus)
        if dominates(f, g, strict=True):
            strict_seen += 1
            assert np.all(fv > gv)
        if not dominates(f, g, strict=False):
            nonstrict_fail_seen += 1
            # the merged-breakpoint grid must expose a witness departure
            grid = np.union1d(f.times, g.times)
            assert np.any(f.evaluate_many(grid) < g.evaluate_many(grid))
    assert strict_seen > 0 and nonstrict_fail_seen > 0


# -- validate_fifo ----------------------------------------------------------------


def test_validate_fifo_examples():
    assert validate_fifo([(0.0, 100.0)])
    assert not validate_fifo([(0.0, 1000.0), (100.0, 500.0)])
    assert validate_fifo([(0.0, 100.0), (43200.0, 200.0)])
    assert validate_fifo(TTF([(0.0, 100.0), (43200.0, 200.0)]))


def test_validate_fifo_wraparound():
    # interior fine, but the wrap from (86000, 900) back to (0, 100) drops
    # 800 seconds of travel time over 400 seconds of departure: slope -2
    assert not validate_fifo([(0.0, 100.0), (86000.0, 900.0)])


# -- approximate -------------------------------------------------------------------


def test_approximate_constant_stays_within_band():
    f = TTF([(0.0, 100.0)])
    for mode in ("two_sided", "lower", "upper"):
        r = approximate(f, 0.1, mode)
        assert len(r) == 1
        v = r.values[0]
        assert 90.0 <= v <= 110.0
        if mode == "lower":
            assert v <= 100.0
        if mode == "upper":
            assert v >= 100.0


def test_approximate_epsilon_zero_is_exact(rng):
    for _ in range(20):
        f = random_fifo_ttf(rng)
        r = approximate(f, 0.0)
        taus = sample_times(rng, 1000)
        assert np.array_equal(r.evaluate_many(taus), f.evaluate_many(taus))


def test_approximate_sawtooth_collapses():
    # 20-point sawtooth with amplitude 1% of the mean: at eps=0.1 the whole
    # corridor admits an almost flat line, so nearly all points go away
    period = DEFAULT_PERIOD
    times = np.linspace(0.0, period * 19.0 / 20.0, 20)
    mean = 1000.0
    values = mean + 10.0 * np.where(np.arange(20) % 2 == 0, 1.0, -1.0)
    f = TTF(zip(times, values), period)
    r = approximate(f, 0.1, "two_sided")
    assert len(r) < len(f)
    assert len(r) <= 2
    taus = np.linspace(0.0, period, 500)
    fv = f.evaluate_many(taus)
    rv = r.evaluate_many(taus)
    assert np.all(rv >= 0.9 * fv - 1e-9)
    assert np.all(rv <= 1.1 * fv + 1e-9)


@pytest.mark.parametrize("eps", [0.1, 0.01, 0.001])
def test_approximate_band_property(rng, eps):
    for _ in range(80):
        f = random_fifo_ttf(rng)
        taus = sample_times(rng, 1000)
        fv = f.evaluate_many(taus)
        lo = approximate(f, eps, "lower")
        up = approximate(f, eps, "upper")
        two = approximate(f, eps, "two_sided")
        assert len(lo) <= len(f) and len(up) <= len(f) and len(two) <= len(f)
        lv = lo.evaluate_many(taus)
        uv = up.evaluate_many(taus)
        tv = two.evaluate_many(taus)
        slack = 1e-9 * (1.0 + np.abs(fv))
        assert np.all(lv <= fv + slack)
        assert np.all(lv >= (1.0 - eps) * fv - slack)
        assert np.all(uv >= fv - slack)
        assert np.all(uv <= (1.0 + eps) * fv + slack)
        assert np.all(tv >= (1.0 - eps) * fv - slack)
        assert np.all(tv <= (1.0 + eps) * fv + slack)
        assert lo.validate_fifo() and up.validate_fifo() and two.validate_fifo()


def test_approximate_bounds_strictly_bracket_for_pruning(rng):
    # lower bounds must never exceed the exact function and upper bounds
    # never undershoot it, in floating point, at arbitrary departures --
    # pruning soundness in the sweep depends on exactly this
    for _ in range(100):
        f = random_fifo_ttf(rng)
        lo = approximate(f, 0.01, "lower")
        up = approximate(f, 0.01, "upper")
        taus = np.concatenate([f.times, lo.times, up.times, sample_times(rng, 500)])
        fv = f.evaluate_many(taus)
        assert np.all(lo.evaluate_many(taus) <= fv)
        assert np.all(up.evaluate_many(taus) >= fv)


def test_approximate_rejects_bad_epsilon():
    f = TTF.constant(10.0)
    with pytest.raises(ValueError):
        approximate(f, -0.1)
    with pytest.raises(ValueError):
        approximate(f, 1.0)
    with pytest.raises(ValueError):
        approximate(f, 0.1, "sideways")
