"""Time-dependent graphs: the ``tdgr`` text format and synthetic networks.

A ``tdgr`` file is a DIMACS-style line format:

    c <comment>                            ignored
    p tdgr <n> <m> <period>                exactly once, before any edge
    a <u> <v> <k> <t1> <w1> ... <tk> <wk>  edge u->v with k breakpoints

Node ids are 1-based.  Breakpoint times must be strictly increasing within
``[0, period)`` and every edge function has to satisfy the FIFO bound.
Parallel edges are legal in the file and are merged into one edge holding the
pointwise minimum, which preserves all shortest paths.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import IO, Iterable

from .ttf import DEFAULT_PERIOD, TTF, validate_fifo


class TdgrError(ValueError):
    """Malformed ``tdgr`` input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class TDEdge:
    tail: int
    head: int
    ttf: TTF


class TDGraph:
    """Directed graph whose edges carry travel-time functions.

    Parallel edges are merged on construction (first occurrence wins ties);
    adjacency lists hold edge indices and follow insertion order, so a graph
    built twice from the same input is structurally identical.
    """

    def __init__(self, n: int, edges: Iterable[TDEdge], period: float = DEFAULT_PERIOD):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = n
        self.period = float(period)
        merged: dict[tuple[int, int], TTF] = {}
        for e in edges:
            if not (1 <= e.tail <= n) or not (1 <= e.head <= n):
                raise ValueError(f"edge ({e.tail}, {e.head}) references a node outside 1..{n}")
            if e.tail == e.head:
                raise ValueError(f"self-loop at node {e.tail}")
            if e.ttf.period != self.period:
                raise ValueError("edge period differs from graph period")
            key = (e.tail, e.head)
            old = merged.get(key)
            merged[key] = e.ttf if old is None else old.merge_min(e.ttf)
        self.edges: list[TDEdge] = [TDEdge(t, h, f) for (t, h), f in merged.items()]
        self.out_adj: list[list[int]] = [[] for _ in range(n + 1)]
        self.in_adj: list[list[int]] = [[] for _ in range(n + 1)]
        for i, e in enumerate(self.edges):
            self.out_adj[e.tail].append(i)
            self.in_adj[e.head].append(i)

    @property
    def m(self) -> int:
        return len(self.edges)

    def out_edges(self, u: int) -> list[TDEdge]:
        return [self.edges[i] for i in self.out_adj[u]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TDGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.period == other.period
            and len(self.edges) == len(other.edges)
            and all(
                a.tail == b.tail and a.head == b.head and a.ttf == b.ttf
                for a, b in zip(self.edges, other.edges)
            )
        )

    __hash__ = None  # type: ignore[assignment]


def format_number(x: float) -> str:
    """Render a float compactly; integral values print without a decimal point."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def parse_tdgr(source: str | IO[str]) -> TDGraph:
    """Parse a ``tdgr`` stream or string into a :class:`TDGraph`."""
    text = source if isinstance(source, str) else source.read()
    n = m = None
    period = DEFAULT_PERIOD
    edges: list[TDEdge] = []
    edge_lines = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "p":
            if n is not None:
                raise TdgrError("duplicate problem line", lineno)
            if len(fields) != 5 or fields[1] != "tdgr":
                raise TdgrError("problem line must read 'p tdgr <n> <m> <period>'", lineno)
            try:
                n, m = int(fields[2]), int(fields[3])
                period = float(fields[4])
            except ValueError:
                raise TdgrError("problem line carries non-numeric fields", lineno) from None
            if n < 0 or m < 0 or not period > 0:
                raise TdgrError("problem line values out of range", lineno)
        elif kind == "a":
            if n is None:
                raise TdgrError("edge line before the problem line", lineno)
            if len(fields) < 4:
                raise TdgrError("edge line too short", lineno)
            try:
                u, v, k = int(fields[1]), int(fields[2]), int(fields[3])
            except ValueError:
                raise TdgrError("edge endpoints must be integers", lineno) from None
            if not (1 <= u <= n) or not (1 <= v <= n):
                raise TdgrError(f"edge ({u}, {v}) references a node outside 1..{n}", lineno)
            if u == v:
                raise TdgrError(f"self-loop at node {u}", lineno)
            if k < 1:
                raise TdgrError("an edge needs at least one breakpoint", lineno)
            if len(fields) != 4 + 2 * k:
                raise TdgrError(
                    f"expected {2 * k} breakpoint numbers, found {len(fields) - 4}", lineno
                )
            try:
                nums = [float(x) for x in fields[4:]]
            except ValueError:
                raise TdgrError("breakpoints must be numbers", lineno) from None
            pts = list(zip(nums[0::2], nums[1::2]))
            for t, w in pts:
                if not math.isfinite(t) or not math.isfinite(w):
                    raise TdgrError("breakpoints must be finite", lineno)
                if w < 0:
                    raise TdgrError(f"negative travel time {w}", lineno)
                if t < 0 or t >= period:
                    raise TdgrError(f"breakpoint time {t} outside [0, {period})", lineno)
            times = [p[0] for p in pts]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise TdgrError("breakpoint times must be strictly increasing", lineno)
            if not validate_fifo(pts, period):
                raise TdgrError("edge breaks the FIFO slope bound (slope < -1)", lineno)
            edges.append(TDEdge(u, v, TTF(pts, period)))
            edge_lines += 1
        else:
            raise TdgrError(f"unknown record type {kind!r}", lineno)
    if n is None:
        raise TdgrError("missing problem line")
    if m is not None and edge_lines != m:
        raise TdgrError(f"problem line announces {m} edges, file contains {edge_lines}")
    return TDGraph(n, edges, period)


def write_tdgr(g: TDGraph) -> str:
    """Serialize a graph; ``parse_tdgr(write_tdgr(g))`` reproduces ``g``."""
    out = [f"p tdgr {g.n} {g.m} {format_number(g.period)}"]
    for e in g.edges:
        nums = " ".join(
            f"{format_number(t)} {format_number(w)}"
            for t, w in zip(e.ttf.times.tolist(), e.ttf.values.tolist())
        )
        out.append(f"a {e.tail} {e.head} {len(e.ttf)} {nums}")
    return "\n".join(out) + "\n"


@dataclass
class SynthParams:
    """Knobs for synthetic network generation.

    ``topology`` is "grid" (bidirected 4-neighbour lattice, strongly
    connected) or "random_geometric" (the m/2 closest point pairs in the unit
    square, both directions).  ``td_share`` is the fraction of edges that get
    a time-dependent rush-hour function instead of a constant.
    """

    topology: str = "grid"
    n: int = 100
    m: int | None = None
    td_share: float = 0.08
    breakpoints: tuple[int, int] = (4, 12)
    peak_factor: tuple[float, float] = (1.5, 2.0)
    seed: int = 0
    period: float = DEFAULT_PERIOD
    grid_shape: tuple[int, int] | None = None

    def __post_init__(self):
        if not 0.0 <= self.td_share <= 1.0:
            raise ValueError("td_share must lie in [0, 1]")
        if self.breakpoints[0] < 3 or self.breakpoints[1] < self.breakpoints[0]:
            raise ValueError("breakpoints range must be sane and at least 3")
        if self.topology not in ("grid", "random_geometric"):
            raise ValueError(f"unknown topology {self.topology!r}")


def _rush_hour_ttf(rng: random.Random, base: float, n_points: int,
                   peak_range: tuple[float, float], period: float) -> TTF:
    """Free-flow constant plus one or two rush-hour humps.

    Hump descents are sine-eased and their width is chosen from the height so
    every slope stays above -0.9, keeping the function FIFO by construction.
    """
    n_bumps = 1 if n_points < 7 else rng.choice([1, 2])
    interior_total = n_points - 1 - 2 * n_bumps  # minus the t=0 point and per-bump feet
    if n_bumps == 2:
        p1 = rng.randint(1, interior_total - 1)
        interiors = [p1, interior_total - p1]
        centers = [rng.uniform(6.5, 9.5) * 3600.0, rng.uniform(15.5, 19.5) * 3600.0]
    else:
        interiors = [interior_total]
        centers = [rng.uniform(7.0, 18.0) * 3600.0]
    pts: list[tuple[float, float]] = [(0.0, base)]
    for center, n_int in zip(centers, interiors):
        height = base * (rng.uniform(*peak_range) - 1.0)
        fall_w = max(2.0 * height, 60.0) * rng.uniform(1.0, 1.5)
        rise_w = fall_w * rng.uniform(0.4, 1.0)
        start = center - rise_w
        end = center + fall_w
        pts.append((start, base))
        # interior points ride a sine arc (rise then fall), strictly curved
        offsets = sorted(rng.uniform(0.02, 0.98) for _ in range(n_int))
        for q in offsets:
            t = start + q * (rise_w + fall_w)
            phase = (t - start) / rise_w * 0.5 if t <= center else \
                0.5 + (t - center) / fall_w * 0.5
            pts.append((t, base + height * math.sin(math.pi * phase)))
        pts.append((end, base))
    return TTF(pts, period)


def _grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    pairs = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c + 1
            if c + 1 < cols:
                pairs.append((u, u + 1))
                pairs.append((u + 1, u))
            if r + 1 < rows:
                pairs.append((u, u + cols))
                pairs.append((u + cols, u))
    return pairs


def generate_synthetic(p: SynthParams) -> TDGraph:
    """Deterministically generate a FIFO time-dependent network."""
    rng = random.Random(p.seed)
    if p.topology == "grid":
        if p.grid_shape is not None:
            rows, cols = p.grid_shape
        else:
            rows = int(round(math.sqrt(p.n)))
            cols = rows
            if rows * cols != p.n:
                raise ValueError(f"n={p.n} is not a square; pass grid_shape explicitly")
        if rows < 1 or cols < 1:
            raise ValueError("grid must have positive dimensions")
        n = rows * cols
        arcs = _grid_edges(rows, cols)
        if p.m is not None and p.m != len(arcs):
            raise ValueError(
                f"a {rows}x{cols} grid has exactly {len(arcs)} edges, requested {p.m}"
            )
        base_weights = [rng.uniform(60.0, 300.0) for _ in arcs]
    else:
        n = p.n
        if n < 2:
            raise ValueError("random_geometric needs at least 2 nodes")
        m = p.m if p.m is not None else 3 * n
        n_pairs = max(1, m // 2)
        if n_pairs > n * (n - 1) // 2:
            raise ValueError(f"cannot place {m} edges on {n} nodes")
        xs = [rng.uniform(0.0, 1.0) for _ in range(n)]
        ys = [rng.uniform(0.0, 1.0) for _ in range(n)]
        dists = []
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                d = math.hypot(xs[i - 1] - xs[j - 1], ys[i - 1] - ys[j - 1])
                dists.append((d, i, j))
        dists.sort()
        arcs = []
        base_weights = []
        for d, i, j in dists[:n_pairs]:
            w = (40.0 + 900.0 * d) * rng.uniform(0.9, 1.1)
            arcs.append((i, j))
            base_weights.append(w)
            arcs.append((j, i))
            base_weights.append(w * rng.uniform(0.95, 1.05))
    m_total = len(arcs)
    n_td = int(round(p.td_share * m_total))
    td_set = set(rng.sample(range(m_total), n_td)) if n_td else set()
    edges = []
    for idx, ((u, v), base) in enumerate(zip(arcs, base_weights)):
        if idx in td_set:
            k = rng.randint(*p.breakpoints)
            ttf = _rush_hour_ttf(rng, base, k, p.peak_factor, p.period)
        else:
            ttf = TTF.constant(base, p.period)
        edges.append(TDEdge(u, v, ttf))
    return TDGraph(n, edges, p.period)
