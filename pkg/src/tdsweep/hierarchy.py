"""Contraction hierarchies over time-dependent graphs.

Nodes are contracted in ascending importance: removing a node must not change
travel-time profiles among the remaining nodes, so for every in/out edge pair
through the contracted node either a witness (an alternative route that is
never slower) is found or a shortcut carrying the linked function is added.

The finished hierarchy renumbers nodes so id 1 is the most important node and
ids grow with falling rank; a downward sweep is then a forward scan over
contiguous storage.  Every edge is stored once: on the upward side of its
less important endpoint (``up_edges``) or grouped by head among the incoming
downward edges (``down_in``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heapify, heappop, heappush
from typing import IO

from .graph import TDGraph, format_number
from .ttf import DEFAULT_PERIOD, TTF


class TchError(ValueError):
    """Malformed ``tch`` input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class OrderParams:
    """Contraction-order knobs.

    ``witness_budget`` caps settled nodes per witness search.  The weights
    combine edge difference, contracted-neighbour count and the breakpoint
    ratio of would-be shortcuts versus removed edges into a node's priority.
    ``exact_witness`` additionally tries a (bounded) profile search before
    accepting a shortcut; the scalar test alone is already sound, just more
    conservative.
    """

    witness_budget: int = 64
    edge_diff_weight: float = 2.0
    deleted_neighbor_weight: float = 1.0
    complexity_weight: float = 1.0
    exact_witness: bool = False

    def __post_init__(self):
        if self.witness_budget < 1:
            raise ValueError("witness budget must be at least 1")


class ContractionHierarchy:
    """Renumbered hierarchy: ranks, edge partition, sweep levels.

    ``up_edges[u]`` lists ``(head, ttf, middle)`` with head more important
    than u; ``down_in[u]`` lists ``(tail, ttf, middle)`` with tail more
    important.  ``middle`` is the last node a shortcut was contracted over,
    or -1 for original edges (provenance only).  ``level[u]`` is 0 for nodes
    without incoming downward edges, else one more than the maximum level of
    their downward-edge tails, so equal-level nodes never depend on each
    other.
    """

    def __init__(self, n: int, period: float, rank: list[int],
                 up_edges: list[list[tuple[int, TTF, int]]],
                 down_in: list[list[tuple[int, TTF, int]]],
                 level: list[int], orig_of: list[int], new_of: list[int]):
        self.n = n
        self.period = period
        self.rank = rank            # original id -> importance (1..n, higher = later)
        self.up_edges = up_edges    # new id -> outgoing upward edges
        self.down_in = down_in      # new id -> incoming downward edges
        self.level = level          # new id -> sweep level
        self.orig_of = orig_of      # new id -> original id
        self.new_of = new_of        # original id -> new id

    @property
    def m(self) -> int:
        return sum(len(x) for x in self.up_edges) + sum(len(x) for x in self.down_in)

    def shortcut_count(self) -> int:
        return sum(
            1 for lst in (*self.up_edges, *self.down_in) for (_, _, mid) in lst if mid != -1
        )

    def total_breakpoints(self) -> int:
        return sum(
            len(f) for lst in (*self.up_edges, *self.down_in) for (_, f, _) in lst
        )

    def max_level(self) -> int:
        return max(self.level[1:], default=0)


# -- construction ---------------------------------------------------------------


class _Working:
    """Mutable residual graph during contraction."""

    def __init__(self, g: TDGraph, params: OrderParams):
        self.params = params
        n = g.n
        self.out: list[dict[int, tuple[TTF, int]]] = [dict() for _ in range(n + 1)]
        self.in_: list[dict[int, None]] = [dict() for _ in range(n + 1)]
        self.deleted_nb = [0] * (n + 1)
        for e in g.edges:
            self.add_edge(e.tail, e.head, e.ttf, -1)

    def add_edge(self, u: int, w: int, ttf: TTF, middle: int) -> None:
        cur = self.out[u].get(w)
        if cur is None:
            self.out[u][w] = (ttf, middle)
            self.in_[w][u] = None
            return
        old_ttf, old_mid = cur
        merged = old_ttf.merge_min(ttf)
        if merged is not old_ttf:
            # record the last middle node that actually contributed
            self.out[u][w] = (merged, middle)

    def witness_distances(self, source: int, skip: int, targets: list[int]) -> dict[int, float]:
        """Budgeted Dijkstra under worst-case weights, avoiding ``skip``.

        Tentative distances are path maxima, hence upper bounds on the path
        profile everywhere; even unsettled entries certify witnesses.
        """
        budget = self.params.witness_budget
        dist = {source: 0.0}
        done: set[int] = set()
        heap = [(0.0, source)]
        remaining = set(targets)
        remaining.discard(source)
        while heap and remaining and len(done) < budget:
            d, x = heappop(heap)
            if x in done:
                continue
            done.add(x)
            remaining.discard(x)
            if not remaining:
                break
            for y, (f, _) in self.out[x].items():
                if y == skip or y in done:
                    continue
                nd = d + f.max_value
                if nd < dist.get(y, math.inf):
                    dist[y] = nd
                    heappush(heap, (nd, y))
        return dist

    def exact_witness(self, source: int, target: int, skip: int, shortcut: TTF,
                      period: float) -> bool:
        """Bounded label-correcting search; tentative labels are still sound."""
        budget = 16 * self.params.witness_budget
        labels: dict[int, TTF] = {source: TTF.constant(0.0, period)}
        best = {source: 0.0}
        heap = [(0.0, source)]
        pops = 0
        smax = shortcut.max_value
        while heap and pops < budget:
            key, x = heappop(heap)
            if key > best.get(x, math.inf):
                continue
            pops += 1
            lx = labels[x]
            for y, (f, _) in self.out[x].items():
                if y == skip:
                    continue
                if key + f.min_value > smax:
                    continue  # cannot possibly help the witness
                linked = lx.link(f)
                old = labels.get(y)
                new = linked if old is None else old.merge_min(linked)
                if new is not old:
                    labels[y] = new
                    nk = new.min_value
                    best[y] = nk
                    heappush(heap, (nk, y))
        w = labels.get(target)
        return w is not None and shortcut.dominates(w, strict=False)

    def simulate(self, v: int, period: float) -> tuple[float, list[tuple[int, int, TTF]]]:
        """Work out the shortcuts contracting ``v`` would need, and its priority."""
        p = self.params
        ins = [(u, self.out[u][v][0]) for u in self.in_[v]]
        outs = [(w, f) for w, (f, _) in self.out[v].items()]
        shortcuts: list[tuple[int, int, TTF]] = []
        sc_points = 0
        for u, f_in in ins:
            targets = [w for w, _ in outs if w != u]
            if not targets:
                continue
            dist = self.witness_distances(u, v, targets)
            for w, f_out in outs:
                if w == u:
                    continue
                bound = dist.get(w, math.inf)
                if bound <= f_in.min_value + f_out.min_value:
                    continue  # alternative beats even the sum of minima
                shortcut = f_in.link(f_out)
                if bound <= shortcut.min_value:
                    continue
                if p.exact_witness and self.exact_witness(u, w, v, shortcut, period):
                    continue
                shortcuts.append((u, w, shortcut))
                sc_points += len(shortcut)
        removed_edges = len(ins) + len(outs)
        removed_points = sum(len(f) for _, f in ins) + sum(len(f) for _, f in outs)
        ratio = sc_points / removed_points if removed_points else 0.0
        priority = (p.edge_diff_weight * (len(shortcuts) - removed_edges)
                    + p.deleted_neighbor_weight * self.deleted_nb[v]
                    + p.complexity_weight * ratio)
        return priority, shortcuts

    def initial_priority(self, v: int) -> float:
        """Witness-free overestimate; the lazy queue corrects it on pop."""
        p = self.params
        ins = [(u, self.out[u][v][0]) for u in self.in_[v]]
        outs = [(w, f) for w, (f, _) in self.out[v].items()]
        pairs = 0
        pts = 0
        for u, f_in in ins:
            for w, f_out in outs:
                if w == u:
                    continue
                pairs += 1
                pts += len(f_in) + len(f_out)
        removed_edges = len(ins) + len(outs)
        removed_points = sum(len(f) for _, f in ins) + sum(len(f) for _, f in outs)
        ratio = pts / removed_points if removed_points else 0.0
        return (p.edge_diff_weight * (pairs - removed_edges)
                + p.deleted_neighbor_weight * self.deleted_nb[v]
                + p.complexity_weight * ratio)

    def contract(self, v: int, shortcuts: list[tuple[int, int, TTF]],
                 events: list[tuple[int, int, TTF, int]]) -> None:
        for u in self.in_[v]:
            f, mid = self.out[u][v]
            events.append((u, v, f, mid))
        for w, (f, mid) in self.out[v].items():
            events.append((v, w, f, mid))
        neighbors = set(self.in_[v]) | set(self.out[v].keys())
        for u in self.in_[v]:
            del self.out[u][v]
        for w in self.out[v]:
            del self.in_[w][v]
        self.out[v] = {}
        self.in_[v] = {}
        for nb in neighbors:
            self.deleted_nb[nb] += 1
        for u, w, shortcut in shortcuts:
            self.add_edge(u, w, shortcut, v)


def _contract_all(g: TDGraph, params: OrderParams):
    work = _Working(g, params)
    n = g.n
    heap = [(work.initial_priority(v), v) for v in range(1, n + 1)]
    heapify(heap)
    rank = [0] * (n + 1)
    events: list[tuple[int, int, TTF, int]] = []
    next_rank = 1
    version = 0
    cache: dict[int, tuple[int, float, list]] = {}
    while heap:
        _, v = heappop(heap)
        if rank[v]:
            continue
        hit = cache.get(v)
        if hit is not None and hit[0] == version:
            priority, shortcuts = hit[1], hit[2]
        else:
            priority, shortcuts = work.simulate(v, g.period)
            cache[v] = (version, priority, shortcuts)
        while heap and rank[heap[0][1]]:
            heappop(heap)
        if heap and (priority, v) > heap[0]:
            heappush(heap, (priority, v))
            continue
        rank[v] = next_rank
        next_rank += 1
        work.contract(v, shortcuts, events)
        version += 1
    return rank, events


def _assemble(n: int, period: float, rank: list[int],
              events: list[tuple[int, int, TTF, int]]) -> ContractionHierarchy:
    new_of = [0] * (n + 1)
    orig_of = [0] * (n + 1)
    for old in range(1, n + 1):
        new = n - rank[old] + 1
        new_of[old] = new
        orig_of[new] = old
    up_edges: list[list[tuple[int, TTF, int]]] = [[] for _ in range(n + 1)]
    down_in: list[list[tuple[int, TTF, int]]] = [[] for _ in range(n + 1)]
    for tail, head, ttf, mid in events:
        nt, nh = new_of[tail], new_of[head]
        nmid = new_of[mid] if mid != -1 else -1
        if rank[tail] < rank[head]:
            up_edges[nt].append((nh, ttf, nmid))
        else:
            down_in[nh].append((nt, ttf, nmid))
    for u in range(1, n + 1):
        up_edges[u].sort(key=lambda e: e[0])
        down_in[u].sort(key=lambda e: e[0])
    level = _levels_from_down_edges(n, down_in)
    return ContractionHierarchy(n, period, rank, up_edges, down_in, level, orig_of, new_of)


def _levels_from_down_edges(n: int, down_in) -> list[int]:
    level = [0] * (n + 1)
    for u in range(1, n + 1):
        best = -1
        for tail, _, _ in down_in[u]:
            if level[tail] > best:
                best = level[tail]
        level[u] = best + 1
    return level


def build_tch(g: TDGraph, params: OrderParams | None = None) -> ContractionHierarchy:
    """Order and contract all nodes of ``g`` into a hierarchy.

    The result supports exact one-to-all sweeps: for any source, sweeping the
    hierarchy reproduces the travel-time profiles of a full profile search on
    the input graph.
    """
    params = params or OrderParams()
    rank, events = _contract_all(g, params)
    return _assemble(g.n, g.period, rank, events)


def compute_order(g: TDGraph, params: OrderParams | None = None) -> list[int]:
    """Importance permutation only (1 = contracted first); deterministic."""
    params = params or OrderParams()
    rank, _ = _contract_all(g, params)
    return rank


def compute_levels(tch: ContractionHierarchy) -> list[int]:
    """Recompute sweep levels from the downward edge partition."""
    return _levels_from_down_edges(tch.n, tch.down_in)


# -- serialization -----------------------------------------------------------


def serialize_tch(tch: ContractionHierarchy) -> str:
    """Text form: problem line, id mapping, levels, then edges.

    Edge lines use renumbered ids; the direction falls out of the id
    comparison (smaller id = more important).
    """
    out = [f"p tch {tch.n} {tch.m} {format_number(tch.period)}"]
    for new in range(1, tch.n + 1):
        out.append(f"o {new} {tch.orig_of[new]}")
    for new in range(1, tch.n + 1):
        out.append(f"l {new} {tch.level[new]}")
    edges: list[tuple[int, int, TTF, int]] = []
    for u in range(1, tch.n + 1):
        for head, f, mid in tch.up_edges[u]:
            edges.append((u, head, f, mid))
        for tail, f, mid in tch.down_in[u]:
            edges.append((tail, u, f, mid))
    edges.sort(key=lambda e: (e[0], e[1]))
    for tail, head, f, mid in edges:
        nums = " ".join(
            f"{format_number(t)} {format_number(w)}"
            for t, w in zip(f.times.tolist(), f.values.tolist())
        )
        out.append(f"a {tail} {head} {mid} {len(f)} {nums}")
    return "\n".join(out) + "\n"


def parse_tch(source: str | IO[str]) -> ContractionHierarchy:
    """Parse and fully validate a ``tch`` stream or string."""
    text = source if isinstance(source, str) else source.read()
    n = m = None
    period = DEFAULT_PERIOD
    orig_of: list[int] = []
    level: list[int] = []
    seen_orig: set[int] = set()
    up_edges: list[list[tuple[int, TTF, int]]] = []
    down_in: list[list[tuple[int, TTF, int]]] = []
    edge_lines = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "p":
            if n is not None:
                raise TchError("duplicate problem line", lineno)
            if len(fields) != 5 or fields[1] != "tch":
                raise TchError("problem line must read 'p tch <n> <m> <period>'", lineno)
            try:
                n, m = int(fields[2]), int(fields[3])
                period = float(fields[4])
            except ValueError:
                raise TchError("problem line carries non-numeric fields", lineno) from None
            if n < 0 or m < 0 or not period > 0:
                raise TchError("problem line values out of range", lineno)
            orig_of = [0] * (n + 1)
            level = [-1] * (n + 1)
            up_edges = [[] for _ in range(n + 1)]
            down_in = [[] for _ in range(n + 1)]
        elif n is None:
            raise TchError("record before the problem line", lineno)
        elif kind == "o":
            if len(fields) != 3:
                raise TchError("mapping line must read 'o <new> <orig>'", lineno)
            try:
                new, orig = int(fields[1]), int(fields[2])
            except ValueError:
                raise TchError("mapping ids must be integers", lineno) from None
            if not (1 <= new <= n) or not (1 <= orig <= n):
                raise TchError(f"mapping ids outside 1..{n}", lineno)
            if orig_of[new] != 0 or orig in seen_orig:
                raise TchError("id mapping is not a bijection", lineno)
            orig_of[new] = orig
            seen_orig.add(orig)
        elif kind == "l":
            if len(fields) != 3:
                raise TchError("level line must read 'l <node> <level>'", lineno)
            try:
                node, lvl = int(fields[1]), int(fields[2])
            except ValueError:
                raise TchError("level fields must be integers", lineno) from None
            if not (1 <= node <= n) or lvl < 0:
                raise TchError("level line out of range", lineno)
            level[node] = lvl
        elif kind == "a":
            if len(fields) < 5:
                raise TchError("edge line too short", lineno)
            try:
                tail, head, mid, k = (int(fields[i]) for i in range(1, 5))
            except ValueError:
                raise TchError("edge header fields must be integers", lineno) from None
            if not (1 <= tail <= n) or not (1 <= head <= n):
                raise TchError(f"edge ({tail}, {head}) references a node outside 1..{n}", lineno)
            if tail == head:
                raise TchError("edge endpoints share one importance rank", lineno)
            if mid != -1 and not (1 <= mid <= n):
                raise TchError(f"middle node {mid} outside 1..{n}", lineno)
            if k < 1 or len(fields) != 5 + 2 * k:
                raise TchError(f"expected {2 * k} breakpoint numbers", lineno)
            try:
                nums = [float(x) for x in fields[5:]]
            except ValueError:
                raise TchError("breakpoints must be numbers", lineno) from None
            try:
                ttf = TTF(zip(nums[0::2], nums[1::2]), period)
            except ValueError as e:
                raise TchError(str(e), lineno) from None
            if tail > head:
                up_edges[tail].append((head, ttf, mid))
            else:
                down_in[head].append((tail, ttf, mid))
            edge_lines += 1
        else:
            raise TchError(f"unknown record type {kind!r}", lineno)
    if n is None:
        raise TchError("missing problem line")
    if len(seen_orig) != n:
        raise TchError(f"id mapping covers {len(seen_orig)} of {n} nodes")
    if any(l < 0 for l in level[1:]):
        raise TchError("levels missing for some nodes")
    if m is not None and edge_lines != m:
        raise TchError(f"problem line announces {m} edges, file contains {edge_lines}")
    expected = _levels_from_down_edges(n, down_in)
    for u in range(1, n + 1):
        if level[u] != expected[u]:
            raise TchError(f"stored level of node {u} is {level[u]}, structure implies {expected[u]}")
    new_of = [0] * (n + 1)
    for new in range(1, n + 1):
        new_of[orig_of[new]] = new
    rank = [0] * (n + 1)
    for new in range(1, n + 1):
        rank[orig_of[new]] = n - new + 1
    return ContractionHierarchy(n, period, rank, up_edges, down_in, level, orig_of, new_of)
