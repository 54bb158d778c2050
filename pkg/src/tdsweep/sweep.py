"""One-to-all profile computation by sweeping a contraction hierarchy.

After an upward profile search from the source, nodes are processed in
descending importance.  Each node takes the minimum of its tentative profile
and, for every incoming downward edge, the tail's final profile linked with
the edge function.  Since all candidates are on the table at once (unlike in
a label-correcting search), cheap scalar and approximate bounds can rule most
of them out before any exact linking happens:

  pass 1  scalar upper bound from extrema, and the candidate edge whose
          minima sum lowest;
  pass 2  an upper-bound function built from the candidate's approximations,
          refined with every edge that survives a scalar test;
  pass 3  the exact minimum, where an edge is skipped whenever its
          lower-bound path function strictly clears the upper bound.

Pruning never changes the result: a skipped edge is proven to lie strictly
above a valid upper bound of the final profile everywhere.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .hierarchy import ContractionHierarchy
from .profile_search import SearchStats, profile_search_core
from .ttf import TTF

# Pruning must only ever drop an edge whose path function lies strictly above
# a valid upper bound of the final profile.  Bounds of constant functions
# coincide with the exact ones, so comparisons can be razor ties; requiring a
# relative clearance keeps one-ulp wobbles from flipping a decision.
_PRUNE_SLACK = 1e-9


def _strictly_clears(low: TTF, bound: TTF) -> bool:
    """Does ``low`` exceed ``bound`` everywhere with relative clearance?"""
    grid = np.union1d(low.times, bound.times)
    lv = low.evaluate_many(grid)
    bv = bound.evaluate_many(grid)
    return bool(np.all(lv > bv + _PRUNE_SLACK * np.maximum(1.0, np.abs(bv))))


@dataclass
class SweepOptions:
    """Sweep knobs: bound tightness, pruning toggle, core size, parallelism."""

    prune_epsilon: float = 0.001
    pruning: bool = True
    core_k: int | None = None
    workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.prune_epsilon < 1.0:
            raise ValueError("prune_epsilon must lie in [0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.core_k is not None and self.core_k < 1:
            raise ValueError("core_k must be positive when given")


@dataclass
class ApproxBundle:
    """A finalized label: exact profile, its bounds, and scalar extrema."""

    exact: TTF
    lower: TTF
    upper: TTF
    min: float
    max: float


class SweepResult:
    """Profiles keyed by original node id, plus operation statistics."""

    def __init__(self, n: int, source: int, options: SweepOptions,
                 profiles: list[TTF | None], computed: list[bool],
                 stats: SearchStats, wall_time_ms: float):
        self.n = n
        self.source = source
        self.options = options
        self._profiles = profiles
        self._computed = computed
        self.stats = stats
        self.wall_time_ms = wall_time_ms

    def is_computed(self, node: int) -> bool:
        return self._computed[node]

    def profile(self, node: int) -> TTF | None:
        """Exact travel-time profile to ``node``; None if unreachable."""
        if not self._computed[node]:
            raise ValueError(f"node {node} is outside the swept core")
        return self._profiles[node]

    def dump_text(self) -> str:
        """One line per node: ``<node> inf``, ``<node> nc`` (not computed),
        or ``<node> <k> <t1> <w1> ...``."""
        from .graph import format_number

        out = []
        for node in range(1, self.n + 1):
            if not self._computed[node]:
                out.append(f"{node} nc")
                continue
            prof = self._profiles[node]
            if prof is None:
                out.append(f"{node} inf")
                continue
            nums = " ".join(
                f"{format_number(t)} {format_number(w)}"
                for t, w in zip(prof.times.tolist(), prof.values.tolist())
            )
            out.append(f"{node} {len(prof)} {nums}")
        return "\n".join(out) + "\n"

    def stats_block(self) -> str:
        s = self.stats
        return (
            f"links_exact={s.links_exact}\n"
            f"links_bound={s.links_bound}\n"
            f"merges={s.merges}\n"
            f"pruned_p2={s.pruned_p2}\n"
            f"pruned_p3={s.pruned_p3}\n"
            f"breakpoints_processed={s.breakpoints}\n"
            f"wall_time_ms={self.wall_time_ms:.3f}\n"
        )


def _merge_exact(delta: TTF | None, linked: TTF, stats: SearchStats) -> TTF:
    if delta is None:
        return linked
    stats.merges += 1
    stats.breakpoints += len(delta) + len(linked)
    return delta.merge_min(linked)


def _build_minimum(u: int, tentative: TTF | None, tch: ContractionHierarchy,
                   bundles: list[ApproxBundle | None], opt: SweepOptions,
                   stats: SearchStats, debug: dict | None = None) -> TTF | None:
    """Update one node's profile from its incoming downward edges.

    All tails are finalized (they live on strictly smaller sweep levels), so
    the exact result is min(tentative, min over edges of link(tail profile,
    edge)).  With pruning enabled the three-pass bound machinery skips edges
    that provably cannot touch that minimum; the outcome is identical.
    """
    parts = [
        (bundles[tail], f)
        for tail, f, _ in tch.down_in[u]
        if bundles[tail] is not None
    ]
    if not parts:
        return tentative
    eps = opt.prune_epsilon
    # pass 1: scalar bounds from extrema; candidate edge with the lowest minima sum
    upper_scalar = float("inf")
    best_sum = float("inf")
    cand = 0
    for i, (b, f) in enumerate(parts):
        s_min = f.min_value + b.min
        if s_min < best_sum:
            best_sum = s_min
            cand = i
        s_max = f.max_value + b.max
        if s_max < upper_scalar:
            upper_scalar = s_max
    if tentative is not None and tentative.max_value < upper_scalar:
        upper_scalar = tentative.max_value
    cb, cf = parts[cand]

    if not opt.pruning:
        linked = cb.exact.link(cf)
        stats.links_exact += 1
        stats.breakpoints += len(cb.exact) + len(cf)
        delta = _merge_exact(tentative, linked, stats)
        for i, (b, f) in enumerate(parts):
            if i == cand:
                continue
            linked = b.exact.link(f)
            stats.links_exact += 1
            stats.breakpoints += len(b.exact) + len(f)
            delta = _merge_exact(delta, linked, stats)
        return delta

    # pass 2: an upper-bound function; start from the candidate edge and
    # refine with every edge whose minima clear the scalar bound
    bound = cb.upper.link(cf.approximate(eps, "upper"))
    stats.links_bound += 1
    if bound.max_value < upper_scalar:
        upper_scalar = bound.max_value
    for i, (b, f) in enumerate(parts):
        if i == cand:
            continue
        if f.min_value + b.lower.min_value <= upper_scalar:
            refined = b.upper.link(f.approximate(eps, "upper"))
            stats.links_bound += 1
            bound = bound.merge_min(refined)
            stats.merges += 1
        else:
            stats.pruned_p2 += 1

    # pass 3: the exact profile, pruning with the bound function
    linked = cb.exact.link(cf)
    stats.links_exact += 1
    stats.breakpoints += len(cb.exact) + len(cf)
    delta = _merge_exact(tentative, linked, stats)
    bound_max = bound.max_value
    clearance = _PRUNE_SLACK * max(1.0, abs(bound_max))
    for i, (b, f) in enumerate(parts):
        if i == cand:
            continue
        # scalar fast path: even the loosest reading of the lower bounds
        # already clears the upper bound everywhere
        if b.lower.min_value + (1.0 - eps) * f.min_value > bound_max + clearance:
            stats.pruned_p3 += 1
            continue
        low_link = b.lower.link(f.approximate(eps, "lower"))
        stats.links_bound += 1
        if _strictly_clears(low_link, bound):
            stats.pruned_p3 += 1
            continue
        linked = b.exact.link(f)
        stats.links_exact += 1
        stats.breakpoints += len(b.exact) + len(f)
        delta = _merge_exact(delta, linked, stats)
    if debug is not None:
        debug[u] = (bound, upper_scalar, cb.exact.link(cf))
    return delta


def _finalize(delta: TTF | None, eps: float) -> ApproxBundle | None:
    if delta is None:
        return None
    return ApproxBundle(
        exact=delta,
        lower=delta.approximate(eps, "lower"),
        upper=delta.approximate(eps, "upper"),
        min=delta.min_value,
        max=delta.max_value,
    )


def run(tch: ContractionHierarchy, source: int, options: SweepOptions | None = None,
        debug: dict | None = None) -> SweepResult:
    """One-to-all profiles from ``source`` over a finished hierarchy.

    Phase 1 is an upward profile search seeding tentative labels; phase 2
    sweeps nodes by descending importance (optionally restricted to the
    ``core_k`` most important ones, and optionally level-parallel); phase 3
    wraps each finalized profile in the bound bundle the next levels prune
    with.  Unreachable nodes stay unreached; outside a requested core nothing
    is computed at all.
    """
    opt = options or SweepOptions()
    n = tch.n
    if not 1 <= source <= n:
        raise ValueError(f"source {source} outside 1..{n}")
    if opt.core_k is not None and opt.core_k > n:
        raise ValueError(f"core_k {opt.core_k} exceeds node count {n}")
    started = time.perf_counter()
    stats = SearchStats()
    s_new = tch.new_of[source]
    up_adj: list[list[tuple[int, TTF]]] = [
        [(head, f) for head, f, _ in tch.up_edges[u]] for u in range(n + 1)
    ]
    max_pts = 1
    for lst in up_adj:
        for _, f in lst:
            if len(f) > max_pts:
                max_pts = len(f)
    labels = profile_search_core(n, up_adj, s_new, tch.period, stats,
                                 pop_cap=50 * max(1, n) * max_pts)
    limit = opt.core_k if opt.core_k is not None else n
    bundles: list[ApproxBundle | None] = [None] * (n + 1)
    eps = opt.prune_epsilon
    if opt.workers == 1:
        for u in range(1, limit + 1):
            delta = _build_minimum(u, labels[u], tch, bundles, opt, stats, debug)
            bundles[u] = _finalize(delta, eps)
    else:
        by_level: dict[int, list[int]] = {}
        for u in range(1, limit + 1):
            by_level.setdefault(tch.level[u], []).append(u)

        def work(chunk: list[int]) -> SearchStats:
            local = SearchStats()
            for u in chunk:
                delta = _build_minimum(u, labels[u], tch, bundles, opt, local, debug)
                bundles[u] = _finalize(delta, eps)
            return local

        with ThreadPoolExecutor(max_workers=opt.workers) as pool:
            for lvl in sorted(by_level):
                nodes = by_level[lvl]
                size = (len(nodes) + opt.workers - 1) // opt.workers
                chunks = [nodes[i:i + size] for i in range(0, len(nodes), size)]
                for local in pool.map(work, chunks):
                    stats.merge_from(local)  # integer sums: order-independent
    wall_ms = (time.perf_counter() - started) * 1000.0
    profiles: list[TTF | None] = [None] * (n + 1)
    computed = [False] * (n + 1)
    for u_new in range(1, limit + 1):
        orig = tch.orig_of[u_new]
        computed[orig] = True
        b = bundles[u_new]
        profiles[orig] = b.exact if b is not None else None
    return SweepResult(n, source, opt, profiles, computed, stats, wall_ms)
