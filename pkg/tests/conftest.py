"""Shared helpers: seeded random TTFs and profile comparison utilities."""

from __future__ import annotations

import random

import numpy as np
import pytest

from tdsweep.ttf import DEFAULT_PERIOD, TTF


def random_fifo_ttf(rng: random.Random, period: float = DEFAULT_PERIOD,
                    max_points: int = 18) -> TTF:
    """A random FIFO travel-time function with 1..max_points breakpoints."""
    k = rng.randint(1, max_points)
    if k == 1:
        return TTF.constant(rng.uniform(10.0, 5000.0), period)
    raw = sorted(rng.uniform(0.0, period - 1.0) for _ in range(k))
    times = [raw[0]]
    for t in raw[1:]:
        if t - times[-1] > 2.0:
            times.append(t)
    if len(times) == 1:
        return TTF.constant(rng.uniform(10.0, 5000.0), period)
    base = rng.uniform(100.0, 3000.0)
    values = [base * rng.uniform(0.8, 1.6) for _ in times]
    # lift values until every slope (wraparound included) clears -0.95
    for _ in range(8):
        changed = False
        for i in range(1, len(times)):
            floor = values[i - 1] - 0.95 * (times[i] - times[i - 1])
            if values[i] < floor:
                values[i] = floor
                changed = True
        wrap_floor = values[-1] - 0.95 * (period - times[-1] + times[0])
        if values[0] < wrap_floor:
            values[0] = wrap_floor
            changed = True
        if not changed:
            break
    else:
        return TTF.constant(base, period)
    return TTF(zip(times, values), period)


def sample_times(rng: random.Random, n: int, period: float = DEFAULT_PERIOD) -> np.ndarray:
    return np.array([rng.uniform(0.0, period) for _ in range(n)])


def profiles_close(a: TTF | None, b: TTF | None, rng: random.Random,
                   n_samples: int = 200, tol: float = 1e-6) -> bool:
    """Pointwise agreement at both breakpoint sets plus random departures."""
    if a is None or b is None:
        return a is None and b is None
    taus = np.concatenate([a.times, b.times, sample_times(rng, n_samples, a.period)])
    return bool(np.max(np.abs(a.evaluate_many(taus) - b.evaluate_many(taus))) <= tol)


def max_profile_gap(a: TTF, b: TTF, rng: random.Random, n_samples: int = 200) -> float:
    taus = np.concatenate([a.times, b.times, sample_times(rng, n_samples, a.period)])
    return float(np.max(np.abs(a.evaluate_many(taus) - b.evaluate_many(taus))))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
