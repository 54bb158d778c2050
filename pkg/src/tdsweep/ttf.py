"""Algebra of periodic piecewise-linear travel-time functions.

A travel-time function (TTF) maps a departure time within one period
(24 hours by default) to a travel time in seconds.  Functions are piecewise
linear between breakpoints and wrap around periodically: the segment from the
last breakpoint back to the first one (shifted by one period) is part of the
function.  Every TTF must satisfy the FIFO condition -- no segment, including
the wraparound one, has slope below -1 -- so departing later never lets you
arrive earlier.

This module is the value layer everything else is built on: evaluation,
linking (concatenating two legs of a journey), pointwise minimum, extrema,
dominance tests, and corridor-based simplification that yields guaranteed
lower/upper bounds with fewer breakpoints.

All TTFs are immutable; every operation returns a new object (or one of its
operands when the result is structurally identical to it), so values can be
shared freely across threads.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_PERIOD = 86400.0

# Numeric model: double-precision seconds.  Breakpoint times closer than
# _TIME_MERGE_EPS collapse into one; intersections and collinearity are
# classified with a 1e-9 relative tolerance; FIFO accepts slopes down to
# -1 - 1e-9.  Pointwise equality in tests uses 1e-6 absolute, far above all
# of these, so internal rounding never leaks out.
_TIME_MERGE_EPS = 1e-9
_REL_CLASSIFY_EPS = 1e-9
_COLLINEAR_EPS = 1e-9
_FIFO_SLOPE_TOL = 1e-9
_BAND_MARGIN = 1e-11

# Flipped on by tests to run full invariant checks on every internally
# constructed TTF.  Keep off in production paths; it is O(n) per construction.
DEBUG_VALIDATE = False


class TTFPoint(NamedTuple):
    """One (departure time, travel time) breakpoint."""

    time: float
    value: float


class PeriodMismatchError(ValueError):
    """Raised when two TTFs with different periods meet in one operation."""


def _fifo_ok(times: np.ndarray, values: np.ndarray, period: float) -> bool:
    n = times.size
    if n == 1:
        return True
    dt = np.diff(times)
    if np.any((values[1:] - values[:-1]) / dt < -1.0 - _FIFO_SLOPE_TOL):
        return False
    wrap_dt = period - times[-1] + times[0]
    return (values[0] - values[-1]) / wrap_dt >= -1.0 - _FIFO_SLOPE_TOL


def _collinear(t0, v0, t1, v1, t2, v2) -> bool:
    """Does (t1, v1) lie on the segment (t0, v0)-(t2, v2)?"""
    predicted = v0 + (v2 - v0) * (t1 - t0) / (t2 - t0)
    scale = max(1.0, abs(v0), abs(v1), abs(v2))
    return abs(predicted - v1) <= _COLLINEAR_EPS * scale


def _simplify(times: np.ndarray, values: np.ndarray, period: float):
    """Drop breakpoints that carry no geometry.

    Removes interior points collinear with their neighbours, then trims
    points that are collinear across the periodic wraparound, and collapses
    an all-equal sequence to the single-point constant representation.
    """
    n = times.size
    if n <= 1:
        return times, values
    tl = times.tolist()
    vl = values.tolist()
    keep = [0]
    for i in range(1, n):
        if i == n - 1:
            nt, nv = tl[0] + period, vl[0]
        else:
            nt, nv = tl[i + 1], vl[i + 1]
        a = keep[-1]
        if _collinear(tl[a], vl[a], tl[i], vl[i], nt, nv):
            continue
        keep.append(i)
    # wraparound trims: the last point against (previous, first + period),
    # then the first point against (last - period, second).
    while len(keep) >= 2:
        a, b, c = keep[-2], keep[-1], keep[0]
        if _collinear(tl[a], vl[a], tl[b], vl[b], tl[c] + period, vl[c]):
            keep.pop()
        else:
            break
    while len(keep) >= 2:
        a, b, c = keep[-1], keep[0], keep[1]
        if _collinear(tl[a] - period, vl[a], tl[b], vl[b], tl[c], vl[c]):
            keep.pop(0)
        else:
            break
    if len(keep) == n:
        return times, values
    idx = np.array(keep, dtype=np.intp)
    return times[idx], values[idx]


class TTF:
    """A periodic piecewise-linear travel-time function.

    ``points`` is an ordered sequence of breakpoints with strictly increasing
    times inside ``[0, period)``; a constant function is stored as exactly one
    point.  Construction validates structure and the FIFO slope bound and
    canonicalizes the sequence (collinear breakpoints are dropped).
    """

    __slots__ = ("times", "values", "period", "_minmax", "_buckets")

    times: np.ndarray
    values: np.ndarray
    period: float

    def __init__(self, points: Iterable[Sequence[float]], period: float = DEFAULT_PERIOD):
        pts = [(float(t), float(v)) for t, v in points]
        if not pts:
            raise ValueError("a TTF needs at least one breakpoint")
        if not period > 0:
            raise ValueError("period must be positive")
        times = np.array([p[0] for p in pts], dtype=float)
        values = np.array([p[1] for p in pts], dtype=float)
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise ValueError("breakpoints must be finite")
        if np.any(values < 0.0):
            raise ValueError("travel times must be non-negative")
        if np.any(times < 0.0) or np.any(times >= period):
            raise ValueError("breakpoint times must lie in [0, period)")
        if times.size > 1 and np.any(np.diff(times) <= 0.0):
            raise ValueError("breakpoint times must be strictly increasing")
        if not _fifo_ok(times, values, float(period)):
            raise ValueError("function breaks the FIFO slope bound (slope < -1)")
        times, values = _simplify(times, values, float(period))
        self._init_arrays(times, values, float(period))

    def _init_arrays(self, times: np.ndarray, values: np.ndarray, period: float) -> None:
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "_minmax", None)
        object.__setattr__(self, "_buckets", None)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("TTF objects are immutable")

    @classmethod
    def _raw(cls, times: np.ndarray, values: np.ndarray, period: float) -> "TTF":
        """Wrap trusted, already-canonical arrays without re-validating."""
        self = object.__new__(cls)
        t = np.ascontiguousarray(times, dtype=float)
        v = np.ascontiguousarray(values, dtype=float)
        if DEBUG_VALIDATE:
            assert t.size >= 1 and t.size == v.size
            assert np.all(np.isfinite(t)) and np.all(np.isfinite(v))
            assert np.all(v >= 0.0), "negative travel time"
            assert np.all(t >= 0.0) and np.all(t < period)
            assert t.size == 1 or np.all(np.diff(t) > 0.0)
            assert _fifo_ok(t, v, period), "internal op produced a non-FIFO TTF"
        self._init_arrays(t, v, period)
        return self

    @classmethod
    def constant(cls, value: float, period: float = DEFAULT_PERIOD) -> "TTF":
        if not value >= 0.0:
            raise ValueError("travel times must be non-negative")
        return cls._raw(np.array([0.0]), np.array([float(value)]), float(period))

    # -- basic protocol ----------------------------------------------------

    def __len__(self) -> int:
        return self.times.size

    @property
    def points(self) -> list[TTFPoint]:
        return [TTFPoint(t, v) for t, v in zip(self.times.tolist(), self.values.tolist())]

    def __repr__(self) -> str:
        if len(self) == 1:
            return f"TTF(constant {self.values[0]:.6g}, period={self.period:g})"
        return (
            f"TTF({len(self)} points, range [{self.min_value:.6g}, "
            f"{self.max_value:.6g}], period={self.period:g})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TTF):
            return NotImplemented
        return (
            self.period == other.period
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def _ensure_minmax(self):
        mm = self._minmax
        if mm is None:
            mm = (float(self.values.min()), float(self.values.max()))
            object.__setattr__(self, "_minmax", mm)
        return mm

    @property
    def min_value(self) -> float:
        return self._ensure_minmax()[0]

    @property
    def max_value(self) -> float:
        return self._ensure_minmax()[1]

    def extrema(self) -> tuple[float, float]:
        """Exact global (minimum, maximum) over one period."""
        return self._ensure_minmax()

    # -- evaluation --------------------------------------------------------

    def evaluate(self, tau: float) -> float:
        """Travel time when departing at ``tau`` (any real; reduced mod period)."""
        period = self.period
        tau = float(tau) % period
        t = self.times
        v = self.values
        n = t.size
        if n == 1:
            return float(v[0])
        buckets = self._buckets
        if buckets is None:
            # One bucket per breakpoint; each stores the index of the last
            # breakpoint at or before the bucket start (-1 for "wraparound").
            starts = np.arange(n) * (period / n)
            buckets = (np.searchsorted(t, starts, side="right") - 1).tolist()
            object.__setattr__(self, "_buckets", buckets)
        k = int(tau * n / period)
        if k >= n:
            k = n - 1
        i = buckets[k]
        while i + 1 < n and t[i + 1] <= tau:
            i += 1
        if i < 0:
            lo_t, lo_v = t[n - 1] - period, v[n - 1]
            hi_t, hi_v = t[0], v[0]
        elif i == n - 1:
            lo_t, lo_v = t[i], v[i]
            hi_t, hi_v = t[0] + period, v[0]
        else:
            lo_t, lo_v = t[i], v[i]
            hi_t, hi_v = t[i + 1], v[i + 1]
        return float(lo_v + (tau - lo_t) * (hi_v - lo_v) / (hi_t - lo_t))

    def evaluate_many(self, taus) -> np.ndarray:
        """Vectorized :meth:`evaluate` over an array of departure times."""
        period = self.period
        tau = np.mod(np.asarray(taus, dtype=float), period)
        t = self.times
        v = self.values
        n = t.size
        if n == 1:
            return np.full(tau.shape, v[0])
        idx = np.searchsorted(t, tau, side="right") - 1
        below = idx < 0
        safe = np.where(below, 0, idx)
        lo_t = np.where(below, t[-1] - period, t[safe])
        lo_v = np.where(below, v[-1], v[safe])
        nxt = idx + 1
        last = nxt >= n
        nxt_safe = np.where(last | below, 0, nxt)
        hi_t = np.where(last, t[0] + period, t[nxt_safe])
        hi_v = np.where(last, v[0], v[nxt_safe])
        hi_t = np.where(below, t[0], hi_t)
        hi_v = np.where(below, v[0], hi_v)
        return lo_v + (tau - lo_t) * (hi_v - lo_v) / (hi_t - lo_t)

    # -- linking -----------------------------------------------------------

    def link(self, second: "TTF") -> "TTF":
        """TTF of traversing ``self`` first, then ``second``.

        The result r satisfies r(tau) = second(tau + self(tau)) + self(tau).
        Breakpoints are those of ``self`` plus the preimages of ``second``'s
        breakpoints under the arrival function tau + self(tau), so the size
        stays linear in the operand sizes.
        """
        if self.period != second.period:
            raise PeriodMismatchError(
                f"cannot link TTFs with periods {self.period} and {second.period}"
            )
        period = self.period
        f, g = self, second
        if len(g) == 1:
            return TTF._raw(f.times, f.values + g.values[0], period)
        if len(f) == 1:
            c = float(f.values[0])
            shifted = np.mod(g.times - c, period)
            order = np.argsort(shifted, kind="stable")
            return TTF._raw(shifted[order], g.values[order] + c, period)
        n = len(f)
        t_ext = np.append(f.times, f.times[0] + period)
        v_ext = np.append(f.values, f.values[0])
        arrival = t_ext + v_ext
        np.maximum.accumulate(arrival, out=arrival)  # guard fp dips; FIFO says nondecreasing
        a0 = arrival[0]
        k = np.ceil((a0 - g.times) / period)
        y = g.times + k * period
        y = np.clip(y, a0, np.nextafter(arrival[-1], -math.inf))
        seg = np.clip(np.searchsorted(arrival, y, side="right") - 1, 0, n - 1)
        denom = arrival[seg + 1] - arrival[seg]
        frac = np.where(denom > 0.0, (y - arrival[seg]) / np.where(denom > 0.0, denom, 1.0), 0.0)
        pre = t_ext[seg] + frac * (t_ext[seg + 1] - t_ext[seg])
        pre = np.mod(pre, period)
        cand = np.concatenate([f.times, pre])
        cand.sort(kind="stable")
        mask = np.empty(cand.size, dtype=bool)
        mask[0] = True
        np.greater(np.diff(cand), _TIME_MERGE_EPS, out=mask[1:])
        cand = cand[mask]
        fv = f.evaluate_many(cand)
        rv = g.evaluate_many(cand + fv) + fv
        np.clip(rv, 0.0, None, out=rv)
        cand2, rv2 = _simplify(cand, rv, period)
        return TTF._raw(cand2, rv2, period)

    # -- pointwise minimum ---------------------------------------------------

    def merge_min(self, other: "TTF") -> "TTF":
        """Pointwise minimum of two TTFs.

        The output contains the breakpoints of whichever operand is minimal
        on each stretch plus the genuine intersection points, so merging a
        function that never wins returns ``self`` itself (object identity),
        which callers use as a cheap "label did not improve" signal.  Exact
        ties prefer ``self``.
        """
        if self.period != other.period:
            raise PeriodMismatchError(
                f"cannot merge TTFs with periods {self.period} and {other.period}"
            )
        if other is self:
            return self
        if self.max_value <= other.min_value:
            return self
        if other.max_value < self.min_value:
            return other
        period = self.period
        tfl = self.times.tolist()
        vfl = self.values.tolist()
        tgl = other.times.tolist()
        vgl = other.values.tolist()
        nf = len(tfl)
        ng = len(tgl)

        def segment_crossing(tk: float, tk1: float):
            """Intersection of the two true segments spanning (tk, tk1).

            Computed from the operands' stored breakpoints, never from grid
            interpolations, so the same two local segments always yield the
            same crossing bit for bit, no matter how the surrounding merge
            was subdivided.
            """
            probe = 0.5 * (tk + tk1)
            pm = probe % period
            shift = probe - pm

            def seg(tl, vl):
                i = bisect_right(tl, pm) - 1
                last = len(tl) - 1
                if i < 0:
                    a, va, b, vb = tl[last] - period, vl[last], tl[0], vl[0]
                elif i == last:
                    a, va, b, vb = tl[i], vl[i], tl[0] + period, vl[0]
                else:
                    a, va, b, vb = tl[i], vl[i], tl[i + 1], vl[i + 1]
                return a + shift, va, b + shift, vb

            t1a, v1a, t1b, v1b = seg(tfl, vfl)
            t2a, v2a, t2b, v2b = seg(tgl, vgl)
            s1 = (v1b - v1a) / (t1b - t1a)
            s2 = (v2b - v2a) / (t2b - t2a)
            if s1 == s2:
                return None
            tx = (v2a - v1a + s1 * t1a - s2 * t2a) / (s1 - s2)
            if not (tk + _TIME_MERGE_EPS < tx < tk1 - _TIME_MERGE_EPS):
                return None
            vx = min(v1a + s1 * (tx - t1a), v2a + s2 * (tx - t2a))
            return tx, vx
        ts: list[float] = []
        owner: list[int] = []  # bit 1: breakpoint of self, bit 2: of other
        i = j = 0
        while i < nf or j < ng:
            if j >= ng:
                ts.append(tfl[i]); owner.append(1); i += 1
            elif i >= nf:
                ts.append(tgl[j]); owner.append(2); j += 1
            else:
                a, b = tfl[i], tgl[j]
                if abs(a - b) <= _TIME_MERGE_EPS:
                    ts.append(a); owner.append(3); i += 1; j += 1
                elif a < b:
                    ts.append(a); owner.append(1); i += 1
                else:
                    ts.append(b); owner.append(2); j += 1
        grid = np.array(ts)
        fv = self.evaluate_many(grid).tolist()
        gv = other.evaluate_many(grid).tolist()
        m = len(ts)
        sgn = []
        for k in range(m):
            d = fv[k] - gv[k]
            scale = max(1.0, abs(fv[k]), abs(gv[k]))
            sgn.append(0 if abs(d) <= _REL_CLASSIFY_EPS * scale else (1 if d > 0.0 else -1))
        j0 = -1
        for k in range(m):
            if sgn[k] != 0 or sgn[(k + 1) % m] != 0:
                j0 = k
                break
        if j0 < 0:
            return self  # equal within classification tolerance
        s0 = sgn[j0]
        s1 = sgn[(j0 + 1) % m]
        w_start = 1 if (s0 if s0 != 0 else s1) < 0 else 2
        w = w_start
        out_t: list[float] = []
        out_v: list[float] = []
        used_self = used_other = False
        for c in range(m):
            k = (j0 + c) % m
            k1 = (k + 1) % m
            s0 = sgn[k]
            s1 = sgn[k1]
            if s0 != 0:
                w_here = 1 if s0 < 0 else 2
            elif s1 != 0:
                w_here = 1 if s1 < 0 else 2
            else:
                w_here = w
            own = owner[k]
            if w_here != w:
                w = w_here
                out_t.append(ts[k])
                # a switch exactly at a grid point: both functions agree here
                # within tolerance; emit the stored value of an owner so the
                # output never depends on interpolation arithmetic
                out_v.append(fv[k] if own & 1 else gv[k])
                used_self = used_other = True
            elif w == 1 and own & 1:
                out_t.append(ts[k]); out_v.append(fv[k]); used_self = True
            elif w == 2 and own & 2:
                out_t.append(ts[k]); out_v.append(gv[k]); used_other = True
            if s0 != 0 and s1 != 0 and s0 != s1:
                tk = ts[k]
                tk1 = ts[k1] + period if k1 <= k else ts[k1]
                hit = segment_crossing(tk, tk1)
                if hit is not None:
                    tx, vx = hit
                    out_t.append(tx - period if tx >= period else tx)
                    out_v.append(vx)
                    used_self = used_other = True
                w = 1 if s1 < 0 else 2
        if w != w_start:
            # winner flips exactly at the seam where the cyclic walk started
            out_t.append(ts[j0])
            out_v.append(fv[j0] if owner[j0] & 1 else gv[j0])
            used_self = used_other = True
        if not used_other:
            return self
        if not used_self:
            return other
        t_arr = np.array(out_t)
        v_arr = np.array(out_v)
        order = np.argsort(t_arr, kind="stable")
        t_arr = t_arr[order]
        v_arr = v_arr[order]
        if t_arr.size > 1:
            mask = np.empty(t_arr.size, dtype=bool)
            mask[0] = True
            np.greater(np.diff(t_arr), _TIME_MERGE_EPS, out=mask[1:])
            t_arr = t_arr[mask]
            v_arr = v_arr[mask]
        return TTF._raw(t_arr, v_arr, period)

    # -- comparison ----------------------------------------------------------

    def dominates(self, other: "TTF", strict: bool = False) -> bool:
        """Is self(tau) > other(tau) everywhere (strict) / >= everywhere?

        Decided exactly: both functions are linear between merged breakpoints,
        so scanning the merged grid decides the pointwise comparison.
        """
        if self.period != other.period:
            raise PeriodMismatchError(
                f"cannot compare TTFs with periods {self.period} and {other.period}"
            )
        if self.min_value > other.max_value:
            return True
        if strict and self.min_value <= other.min_value:
            # self touches or goes below other's minimum level somewhere only
            # if the grid scan says so; this screen is not decisive.
            pass
        grid = np.union1d(self.times, other.times)
        fv = self.evaluate_many(grid)
        gv = other.evaluate_many(grid)
        if strict:
            return bool(np.all(fv > gv))
        return bool(np.all(fv >= gv))

    # -- approximation ---------------------------------------------------------

    def approximate(self, epsilon: float, mode: str = "two_sided") -> "TTF":
        """Simplify within a relative corridor around the function.

        mode "two_sided" keeps the result within [(1-eps)f, (1+eps)f],
        "lower" within [(1-eps)f, f], "upper" within [f, (1+eps)f].  The
        result never has more breakpoints than the input and is always FIFO;
        when the corridor is too tight to be useful the exact function is
        returned unchanged.
        """
        if not 0.0 <= epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if mode not in ("two_sided", "lower", "upper"):
            raise ValueError(f"unknown approximation mode {mode!r}")
        if epsilon == 0.0 or len(self) == 1:
            return self
        v = self.values
        if mode == "lower":
            lo, hi = (1.0 - epsilon) * v, v.copy()
        elif mode == "upper":
            lo, hi = v.copy(), (1.0 + epsilon) * v
        else:
            lo, hi = (1.0 - epsilon) * v, (1.0 + epsilon) * v
        margin = _BAND_MARGIN * np.maximum(1.0, v)
        lo = lo + margin
        hi = hi - margin
        if np.any(hi - lo <= margin):
            return self
        out = _corridor_polyline(self.times, lo, hi)
        if out is None:
            return self
        out_idx, out_v = out
        out_v = _fifo_repair(self.times, out_idx, out_v, hi, self.period)
        if out_v is None:
            return self
        out_t = self.times[out_idx]
        if np.all(out_v == out_v[0]):
            return TTF._raw(out_t[:1].copy(), out_v[:1].copy(), self.period)
        candidate = TTF._raw(out_t.copy(), out_v, self.period)
        # final audit: the polyline must stay inside the corridor at every
        # original breakpoint (linearity makes that sufficient everywhere)
        check = candidate.evaluate_many(self.times)
        if np.any(check < lo - margin) or np.any(check > hi + margin):
            return self
        return candidate

    def validate_fifo(self) -> bool:
        return _fifo_ok(self.times, self.values, self.period)


def _corridor_polyline(times: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Greedy minimal-ish polyline through vertical corridor segments.

    Maintains the wedge of feasible slopes from the current anchor; when the
    next corridor cannot be reached, a vertex is emitted at the previous
    breakpoint and the wedge restarts.  Output vertices sit at input
    breakpoint times, so the result never grows beyond the input.
    """
    t = times.tolist()
    lo_l = lo.tolist()
    hi_l = hi.tolist()
    n = len(t)
    at = t[0]
    av = 0.5 * (lo_l[0] + hi_l[0])
    out_idx = [0]
    out_val = [av]
    s_lo = -math.inf
    s_hi = math.inf
    i = 1
    while i < n:
        dt = t[i] - at
        cand_lo = (lo_l[i] - av) / dt
        cand_hi = (hi_l[i] - av) / dt
        new_lo = cand_lo if cand_lo > s_lo else s_lo
        new_hi = cand_hi if cand_hi < s_hi else s_hi
        if new_lo <= new_hi:
            s_lo, s_hi = new_lo, new_hi
            i += 1
            continue
        slope = s_hi if cand_lo > s_hi else s_lo
        pt = t[i - 1]
        pv = av + slope * (pt - at)
        if pv < lo_l[i - 1]:
            pv = lo_l[i - 1]
        elif pv > hi_l[i - 1]:
            pv = hi_l[i - 1]
        out_idx.append(i - 1)
        out_val.append(pv)
        at, av = pt, pv
        s_lo = -math.inf
        s_hi = math.inf
    if out_idx[-1] != n - 1:
        dt = t[n - 1] - at
        target = (0.5 * (lo_l[n - 1] + hi_l[n - 1]) - av) / dt
        slope = min(max(target, s_lo), s_hi)
        pv = av + slope * dt
        if pv < lo_l[n - 1]:
            pv = lo_l[n - 1]
        elif pv > hi_l[n - 1]:
            pv = hi_l[n - 1]
        out_idx.append(n - 1)
        out_val.append(pv)
    return np.array(out_idx, dtype=np.intp), np.array(out_val)


def _fifo_repair(times: np.ndarray, out_idx: np.ndarray, out_v: np.ndarray,
                 hi: np.ndarray, period: float):
    """Lift vertices so no output slope drops below -1.

    Lifting must stay under the corridor ceiling; if that is impossible, or
    the wraparound segment still violates the bound, give up (caller falls
    back to the exact function).
    """
    t = times[out_idx]
    v = out_v.copy()
    k = v.size
    changed = False
    for j in range(1, k):
        floor = v[j - 1] - (t[j] - t[j - 1])
        if v[j] < floor:
            if floor > hi[out_idx[j]]:
                return None
            v[j] = floor
            changed = True
    wrap_dt = period - t[-1] + t[0]
    if (v[0] - v[-1]) / wrap_dt < -1.0:
        return None
    if changed:
        # lifted segments may poke above interior corridor ceilings; audit
        idx = out_idx.tolist()
        for j in range(1, k):
            a, b = idx[j - 1], idx[j]
            if b - a > 1:
                span = times[a + 1:b]
                seg = v[j - 1] + (span - t[j - 1]) * (v[j] - v[j - 1]) / (t[j] - t[j - 1])
                if np.any(seg > hi[a + 1:b]):
                    return None
    return v


def _true_segment_crossing(tfl, vfl, tgl, vgl, tk, tk1, period):
    """Intersection of the true segments of two PL functions over (tk, tk1).

    The open interval must contain no breakpoint of either function.  Both
    lines are taken from stored breakpoints, never from interpolated grid
    values, so the same two local segments always produce the same crossing
    bit for bit regardless of how a surrounding computation subdivided time.
    """
    probe = 0.5 * (tk + tk1)
    pm = probe % period
    shift = probe - pm

    def seg(tl, vl):
        i = bisect_right(tl, pm) - 1
        last = len(tl) - 1
        if i < 0:
            a, va, b, vb = tl[last] - period, vl[last], tl[0], vl[0]
        elif i == last:
            a, va, b, vb = tl[i], vl[i], tl[0] + period, vl[0]
        else:
            a, va, b, vb = tl[i], vl[i], tl[i + 1], vl[i + 1]
        return a + shift, va, b + shift, vb

    t1a, v1a, t1b, v1b = seg(tfl, vfl)
    t2a, v2a, t2b, v2b = seg(tgl, vgl)
    s1 = (v1b - v1a) / (t1b - t1a)
    s2 = (v2b - v2a) / (t2b - t2a)
    if s1 == s2:
        return None
    tx = (v2a - v1a + s1 * t1a - s2 * t2a) / (s1 - s2)
    if not (tk + _TIME_MERGE_EPS < tx < tk1 - _TIME_MERGE_EPS):
        return None
    vx = min(v1a + s1 * (tx - t1a), v2a + s2 * (tx - t2a))
    return tx, vx


def lower_envelope(funcs: Sequence[TTF]) -> TTF:
    """Pointwise minimum of several TTFs in one pass.

    Between two consecutive grid times (the union of all breakpoints) every
    input is linear, so the minimum changes hands at most once per interval;
    each handover is computed with :func:`_true_segment_crossing` from the
    two winners' stored segments.  Inputs that never reach the minimum
    therefore leave no trace at all: dropping them reproduces the result
    bit for bit.  Ties prefer the earliest input.
    """
    if not funcs:
        raise ValueError("need at least one function")
    k = len(funcs)
    if k == 1:
        return funcs[0]
    period = funcs[0].period
    for f in funcs[1:]:
        if f.period != period:
            raise PeriodMismatchError("envelope inputs must share one period")
    grid = np.concatenate([f.times for f in funcs])
    grid.sort(kind="stable")
    mask = np.empty(grid.size, dtype=bool)
    mask[0] = True
    np.greater(np.diff(grid), _TIME_MERGE_EPS, out=mask[1:])
    grid = grid[mask]
    n = grid.size
    vals = np.empty((k, n))
    owned = np.zeros((k, n), dtype=bool)
    for i, f in enumerate(funcs):
        vals[i] = f.evaluate_many(grid)
        pos = np.searchsorted(grid, f.times)
        pos = np.clip(pos, 0, n - 1)
        near = np.abs(grid[pos] - f.times) <= _TIME_MERGE_EPS
        prev_ok = (pos > 0) & ~near
        pos = np.where(prev_ok, pos - 1, pos)
        near |= np.abs(grid[pos] - f.times) <= _TIME_MERGE_EPS
        owned[i, pos[near]] = True
    scale = np.maximum(1.0, np.abs(vals).max(axis=0))
    col_min = vals.min(axis=0)
    winner = np.asarray(vals <= col_min + _REL_CLASSIFY_EPS * scale).argmax(axis=0)
    win_l = winner.tolist()
    grid_l = grid.tolist()
    vals_l = vals.tolist()
    tv_cache = [None] * k
    out_t: list[float] = []
    out_v: list[float] = []
    for j in range(n):
        w = win_l[j]
        if owned[w, j]:
            out_t.append(grid_l[j])
            out_v.append(vals_l[w][j])
        j1 = j + 1
        if j1 == n:
            j1 = 0
            tk1 = grid_l[0] + period
        else:
            tk1 = grid_l[j1]
        wn = win_l[j1]
        if wn != w:
            if tv_cache[w] is None:
                tv_cache[w] = (funcs[w].times.tolist(), funcs[w].values.tolist())
            if tv_cache[wn] is None:
                tv_cache[wn] = (funcs[wn].times.tolist(), funcs[wn].values.tolist())
            ta, va = tv_cache[w]
            tb, vb = tv_cache[wn]
            hit = _true_segment_crossing(ta, va, tb, vb, grid_l[j], tk1, period)
            if hit is not None:
                tx, vx = hit
                out_t.append(tx - period if tx >= period else tx)
                out_v.append(vx)
    if not out_t:
        # every grid point is owned by a losing input (possible only through
        # tolerance ties); fall back to the first function, which then ties
        # the minimum everywhere
        return funcs[0]
    t_arr = np.array(out_t)
    v_arr = np.array(out_v)
    order = np.argsort(t_arr, kind="stable")
    t_arr = t_arr[order]
    v_arr = v_arr[order]
    if t_arr.size > 1:
        mask = np.empty(t_arr.size, dtype=bool)
        mask[0] = True
        np.greater(np.diff(t_arr), _TIME_MERGE_EPS, out=mask[1:])
        t_arr = t_arr[mask]
        v_arr = v_arr[mask]
    t_arr, v_arr = _drop_fifo_breakers(t_arr, v_arr, period)
    return TTF._raw(t_arr, v_arr, period)


def _drop_fifo_breakers(times: np.ndarray, values: np.ndarray, period: float):
    """Remove tolerance-tie artifacts that would violate the slope bound.

    Envelope ties may put two emitted points a few nanoseconds apart with
    values differing at the tie tolerance, producing an absurd slope.  Such
    points deviate from the true minimum by at most the tie tolerance, so
    dropping the later one is safe.  Almost never triggers.
    """
    while times.size > 1:
        dt = np.diff(times)
        bad = np.nonzero((values[1:] - values[:-1]) / dt < -1.0 - _FIFO_SLOPE_TOL)[0]
        if bad.size == 0:
            break
        keep = np.ones(times.size, dtype=bool)
        keep[bad + 1] = False
        times = times[keep]
        values = values[keep]
    if times.size > 1:
        wrap_dt = period - times[-1] + times[0]
        if (values[0] - values[-1]) / wrap_dt < -1.0 - _FIFO_SLOPE_TOL:
            times = times[:-1]
            values = values[:-1]
    return times, values


# -- module-level functional surface ------------------------------------------


def evaluate(f: TTF, tau: float) -> float:
    """Travel time of ``f`` when departing at ``tau``."""
    return f.evaluate(tau)


def link(first: TTF, second: TTF) -> TTF:
    """Concatenate two legs: traverse ``first``, then ``second``."""
    return first.link(second)


def merge_min(f: TTF, g: TTF) -> TTF:
    """Pointwise minimum of ``f`` and ``g``."""
    return f.merge_min(g)


def approximate(f: TTF, epsilon: float, mode: str = "two_sided") -> TTF:
    """Corridor simplification of ``f``; see :meth:`TTF.approximate`."""
    return f.approximate(epsilon, mode)


def extrema(f: TTF) -> tuple[float, float]:
    """Exact global (minimum, maximum) of ``f`` over one period."""
    return f.extrema()


def dominates(f: TTF, g: TTF, strict: bool = False) -> bool:
    """Whether ``f`` lies above ``g`` everywhere (strictly if requested)."""
    return f.dominates(g, strict)


def validate_fifo(points, period: float = DEFAULT_PERIOD) -> bool:
    """Check the FIFO slope bound on a TTF or a raw breakpoint sequence.

    Accepts a :class:`TTF` or any iterable of (time, value) pairs; the raw
    form exists so ill-formed candidate functions can be classified before
    one tries to construct a TTF from them.
    """
    if isinstance(points, TTF):
        return points.validate_fifo()
    pts = [(float(t), float(v)) for t, v in points]
    if not pts:
        return False
    times = np.array([p[0] for p in pts])
    values = np.array([p[1] for p in pts])
    return _fifo_ok(times, values, float(period))
