"""Per-debate s-t graphs and exact minimum-cut labelling.

SOURCE is the yea side and SINK the nay side. The arc SOURCE->s carries
ind(s, Y) and s->SINK carries ind(s, N), so a segment that ends up on the
nay side pays ind(s, Y) and vice versa. Pair links are undirected.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .corpus import Vote
from .errors import IntegrityError

log = logging.getLogger(__name__)


class _Hard:
    """Marker for an effectively infinite link."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "HARD"

    def __reduce__(self):
        return (_Hard, ())


HARD = _Hard()


def ind_yea(d: float, sigma: float) -> float:
    """Piecewise map of one decision value onto [0, 1] with a 2-sigma clip."""
    if sigma <= 0:
        return 1.0 if d > 0 else (0.0 if d < 0 else 0.5)
    two_sigma = 2.0 * sigma
    if d > two_sigma:
        return 1.0
    if d < -two_sigma:
        return 0.0
    return (1.0 + d / two_sigma) / 2.0


@dataclass(frozen=True)
class IndScores:
    yea: np.ndarray
    sigma: float

    @property
    def nay(self) -> np.ndarray:
        return 1.0 - self.yea

    def __len__(self) -> int:
        return self.yea.shape[0]


def normalize_ind(decision_values: Sequence[float]) -> IndScores:
    d = np.asarray(decision_values, dtype=np.float64)
    if d.size == 0:
        raise IntegrityError("cannot normalise an empty debate")
    sigma = float(np.std(d))
    return IndScores(np.array([ind_yea(float(x), sigma) for x in d]), sigma)


@dataclass
class DebateGraph:
    source_cap: np.ndarray
    sink_cap: np.ndarray
    pair_links: dict[tuple[int, int], object] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.source_cap = np.asarray(self.source_cap, dtype=np.float64)
        self.sink_cap = np.asarray(self.sink_cap, dtype=np.float64)
        if self.source_cap.shape != self.sink_cap.shape:
            raise IntegrityError("source and sink capacity arrays differ in length")
        if (self.source_cap < 0).any() or (self.sink_cap < 0).any():
            raise IntegrityError("negative unary capacity")
        n = self.n
        for (u, v), w in self.pair_links.items():
            if not (0 <= u < v < n):
                raise IntegrityError(f"link ({u}, {v}) is not an ordered pair of segments in [0, {n})")
            if w is not HARD and not w >= 0:
                raise IntegrityError(f"link ({u}, {v}) has negative strength {w}")

    @property
    def n(self) -> int:
        return self.source_cap.shape[0]

    def add_link(self, u: int, v: int, strength) -> None:
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        if not (0 <= key[0] and key[1] < self.n):
            raise IntegrityError(f"link ({u}, {v}) outside [0, {self.n})")
        prev = self.pair_links.get(key, 0.0)
        if strength is HARD or prev is HARD:
            self.pair_links[key] = HARD
        elif strength > 0:
            self.pair_links[key] = prev + float(strength)
        elif strength < 0:
            raise IntegrityError(f"negative link strength {strength}")

    def hard_value(self) -> float:
        """Capacity that stands in for HARD: exceeds every finite cut."""
        finite = sum(float(w) for w in self.pair_links.values() if w is not HARD)
        return 1.0 + float(self.source_cap.sum()) + float(self.sink_cap.sum()) + finite

    def realized_links(self) -> list[tuple[int, int, float]]:
        hard = self.hard_value()
        return [(u, v, hard if w is HARD else float(w))
                for (u, v), w in sorted(self.pair_links.items())]

    def dump(self, path) -> None:
        lines = [f"{self.n}\n"]
        lines += [f"{s}\t{float(self.source_cap[s])!r}\t{float(self.sink_cap[s])!r}\n" for s in range(self.n)]
        lines += [f"{u}\t{v}\t{'HARD' if w is HARD else repr(float(w))}\n"
                  for (u, v), w in sorted(self.pair_links.items())]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DebateGraph":
        lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
        n = int(lines[0])
        src = np.zeros(n)
        snk = np.zeros(n)
        for line in lines[1:n + 1]:
            s, a, b = line.split("\t")
            src[int(s)] = float(a)
            snk[int(s)] = float(b)
        links = {}
        for line in lines[n + 1:]:
            u, v, w = line.split("\t")
            links[(int(u), int(v))] = HARD if w == "HARD" else float(w)
        return cls(src, snk, links)


@dataclass(frozen=True)
class Assignment:
    yea: np.ndarray
    achieved_cost: float
    flow_value: float = float("nan")

    @property
    def classes(self) -> list[Vote]:
        return [Vote.YEA if y else Vote.NAY for y in self.yea]


def build_debate_graph(ind: IndScores, speakers: Sequence[str],
                       agreement_weights: Iterable[tuple[str, str, float]] = (),
                       hard_agreement: bool = False,
                       same_speaker: bool = True) -> DebateGraph:
    """Unary capacities from ``ind`` plus same-speaker and agreement links.

    Same-speaker segments are chained with HARD links on consecutive
    occurrences. Agreement weights are summed per unordered speaker pair and
    placed between the two speakers' earliest segments.
    """
    if len(speakers) != len(ind):
        raise IntegrityError(f"{len(speakers)} speaker ids for {len(ind)} segments")
    graph = DebateGraph(ind.yea.copy(), ind.nay)
    first: dict[str, int] = {}
    last: dict[str, int] = {}
    for s, spk in enumerate(speakers):
        if spk in last and same_speaker:
            graph.add_link(last[spk], s, HARD)
        first.setdefault(spk, s)
        last[spk] = s

    totals: dict[tuple[str, str], float] = {}
    for a, b, w in agreement_weights:
        if w < 0:
            raise IntegrityError(f"negative agreement weight {w} for ({a}, {b})")
        if a == b:
            continue
        missing = [x for x in (a, b) if x not in first]
        if missing:
            msg = f"agreement link ({a}, {b}) dropped: no segments for {', '.join(missing)}"
            graph.warnings.append(msg)
            log.debug(msg)
            continue
        key = (a, b) if a < b else (b, a)
        totals[key] = totals.get(key, 0.0) + float(w)
    for (a, b), w in sorted(totals.items()):
        if w > 0:
            graph.add_link(first[a], first[b], HARD if hard_agreement else w)
    return graph


def assignment_cost(yea: Sequence[bool], graph: DebateGraph) -> float:
    """Cost of a labelling: the dispreferred-class unary terms plus cut links."""
    yea = np.asarray(yea, dtype=bool)
    cost = float(np.where(yea, graph.sink_cap, graph.source_cap).sum())
    for u, v, w in graph.realized_links():
        if yea[u] != yea[v]:
            cost += w
    return cost


def max_flow_min_cut(graph: DebateGraph) -> Assignment:
    """Exact minimum-cost labelling via Dinic's max-flow.

    Segments that can still reach SINK in the final residual graph are nay;
    all others are yea, so exact unary ties resolve to yea.
    """
    n = graph.n
    source, sink = n, n + 1
    links = graph.realized_links()
    m = 2 * n + len(links)
    tails = np.empty(m, dtype=np.int64)
    heads = np.empty(m, dtype=np.int64)
    fwd = np.empty(m)
    bwd = np.zeros(m)
    idx = np.arange(n)
    tails[:n], heads[:n], fwd[:n] = source, idx, graph.source_cap
    tails[n:2 * n], heads[n:2 * n], fwd[n:2 * n] = idx, sink, graph.sink_cap
    for k, (u, v, w) in enumerate(links, start=2 * n):
        tails[k], heads[k], fwd[k], bwd[k] = u, v, w, w
    scale = max(1.0, float(fwd.max()) if m else 1.0)
    flow, reaches_sink = _kernels.max_flow(n + 2, source, sink, tails, heads, fwd, bwd, 1e-13 * scale)
    yea = ~np.asarray(reaches_sink[:n], dtype=bool)
    return Assignment(yea, assignment_cost(yea, graph), float(flow))


def argmax_ind(ind: IndScores) -> np.ndarray:
    """Per-segment decision without links; 0.5 goes to yea."""
    return ind.yea >= 0.5
