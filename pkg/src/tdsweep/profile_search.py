"""Label-correcting one-to-all profile search and scalar Dijkstra variants.

The profile search keeps one tentative travel-time function per node and a
priority queue keyed by the function's global minimum.  Relaxing an edge
links the tail's profile with the edge function and merges the result into
the head's profile; whenever the merge improves the label anywhere the head
is (re)inserted, so labels may be corrected after they were first settled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

from .graph import TDGraph
from .ttf import TTF


@dataclass
class LabelState:
    """Per-node travel-time profiles from one source; None means unreached."""

    labels: list[TTF | None]
    source: int

    def profile(self, node: int) -> TTF | None:
        return self.labels[node]


class SearchStats:
    """Operation counters shared by searches and sweeps.

    ``breakpoints`` sums |first| + |second| over exact link and merge calls
    only, so runs that prune more exact work report strictly smaller numbers.
    """

    __slots__ = ("links_exact", "links_bound", "merges", "pruned_p2", "pruned_p3",
                 "breakpoints", "pops")

    def __init__(self):
        self.links_exact = 0
        self.links_bound = 0
        self.merges = 0
        self.pruned_p2 = 0
        self.pruned_p3 = 0
        self.breakpoints = 0
        self.pops = 0

    def merge_from(self, other: "SearchStats") -> None:
        for name in self.__slots__:
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in self.__slots__}


def profile_search_core(n: int, adjacency: list[list[tuple[int, TTF]]], source: int,
                        period: float, stats: SearchStats | None = None,
                        pop_cap: int | None = None) -> list[TTF | None]:
    """Run the label-correcting search over an explicit adjacency structure.

    ``adjacency[u]`` lists ``(head, ttf)`` pairs.  Returns a 1-based label
    list; entry 0 is unused.  ``pop_cap`` guards against runaway correction
    loops (they cannot happen on FIFO inputs, but a corrupted graph should
    fail loudly instead of spinning).
    """
    labels: list[TTF | None] = [None] * (n + 1)
    labels[source] = TTF.constant(0.0, period)
    best_key = [math.inf] * (n + 1)
    best_key[source] = 0.0
    heap: list[tuple[float, int]] = [(0.0, source)]
    pops = 0
    while heap:
        key, u = heappop(heap)
        if key > best_key[u]:
            continue  # superseded by a later improvement
        pops += 1
        if pop_cap is not None and pops > pop_cap:
            raise RuntimeError(
                f"profile search exceeded {pop_cap} queue pops; input is likely corrupt"
            )
        label_u = labels[u]
        for v, f in adjacency[u]:
            linked = label_u.link(f)
            old = labels[v]
            if stats is not None:
                stats.links_exact += 1
                stats.breakpoints += len(label_u) + len(f)
            if old is None:
                new = linked
            else:
                new = old.merge_min(linked)
                if stats is not None:
                    stats.merges += 1
                    stats.breakpoints += len(old) + len(linked)
            if new is not old:
                labels[v] = new
                nk = new.min_value
                best_key[v] = nk
                heappush(heap, (nk, v))
    if stats is not None:
        stats.pops += pops
    return labels


def one_to_all_profile(g: TDGraph, source: int, restriction: str = "all_edges",
                       ranks: list[int] | None = None,
                       stats: SearchStats | None = None) -> LabelState:
    """Exact travel-time profiles from ``source`` to every node.

    ``restriction`` is ``"all_edges"`` for the true profiles or
    ``"upward_only"`` to only follow edges whose head outranks the tail
    (``ranks`` must then hold an importance permutation).
    """
    if not 1 <= source <= g.n:
        raise ValueError(f"source {source} outside 1..{g.n}")
    if restriction not in ("all_edges", "upward_only"):
        raise ValueError(f"unknown restriction {restriction!r}")
    if restriction == "upward_only" and ranks is None:
        raise ValueError("upward_only needs an importance permutation")
    adjacency: list[list[tuple[int, TTF]]] = [[] for _ in range(g.n + 1)]
    max_len = 1
    for e in g.edges:
        if restriction == "upward_only" and ranks[e.tail] >= ranks[e.head]:
            continue
        adjacency[e.tail].append((e.head, e.ttf))
        if len(e.ttf) > max_len:
            max_len = len(e.ttf)
    cap = 50 * max(1, g.n) * max_len
    labels = profile_search_core(g.n, adjacency, source, g.period, stats, pop_cap=cap)
    return LabelState(labels, source)


def scalar_dijkstra(g: TDGraph, source: int, weight: str = "ttf_min",
                    budget: int | None = None,
                    targets: set[int] | None = None) -> list[float]:
    """Plain Dijkstra over scalarized edge weights.

    ``weight`` picks the global minimum or maximum of each edge function.
    Stops after settling ``budget`` nodes or once every target is settled;
    unsettled nodes report infinity.
    """
    if not 1 <= source <= g.n:
        raise ValueError(f"source {source} outside 1..{g.n}")
    if weight == "ttf_min":
        w = [e.ttf.min_value for e in g.edges]
    elif weight == "ttf_max":
        w = [e.ttf.max_value for e in g.edges]
    else:
        raise ValueError(f"unknown weight {weight!r}")
    dist = [math.inf] * (g.n + 1)
    done = [False] * (g.n + 1)
    dist[source] = 0.0
    heap = [(0.0, source)]
    remaining = set(targets) if targets is not None else None
    settled = 0
    while heap:
        d, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        settled += 1
        if remaining is not None:
            remaining.discard(u)
            if not remaining:
                break
        if budget is not None and settled >= budget:
            break
        for i in g.out_adj[u]:
            e = g.edges[i]
            nd = d + w[i]
            if nd < dist[e.head]:
                dist[e.head] = nd
                heappush(heap, (nd, e.head))
    if remaining is not None or budget is not None:
        # only settled nodes carry trustworthy distances under early exit
        for v in range(1, g.n + 1):
            if not done[v]:
                dist[v] = math.inf
    return dist
