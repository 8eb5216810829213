"""Network construction for the experiment protocol: exact symmetric
two-block graphs, stochastic two-block / random / ring-with-weak-ties /
hyperbolic generators, Kernighan-Lin bipartitioning, weight assignment,
homophily accounting, and edge-list ingestion."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Union

import numpy as np

from .model import Number, SocialGraph, as_fraction

LEFT = "L"
RIGHT = "R"


@dataclass(frozen=True)
class Partition:
    """Two-sided agent labelling; both sides are non-empty for n >= 2."""

    side: tuple[str, ...]

    def __post_init__(self):
        if any(s not in (LEFT, RIGHT) for s in self.side):
            raise ValueError("sides must be 'L' or 'R'")
        if len(self.side) >= 2 and (LEFT not in self.side or RIGHT not in self.side):
            raise ValueError("both sides must be non-empty")

    @property
    def n(self) -> int:
        return len(self.side)

    def left(self) -> list[int]:
        return [i for i, s in enumerate(self.side) if s == LEFT]

    def right(self) -> list[int]:
        return [i for i, s in enumerate(self.side) if s == RIGHT]


@dataclass(frozen=True)
class HomophilyReport:
    """Mean within/cross influence per agent and their ratio h. h is None
    when there is no cross influence at all (the ratio is undefined)."""

    a_in_star: Fraction
    a_out_star: Fraction
    h: Fraction | None
    per_agent: tuple[tuple[Fraction, Fraction], ...]


def homophily(graph: SocialGraph, partition: Partition) -> HomophilyReport:
    """Exact per-agent within/cross influence sums and the network-wide
    homophily ratio h = a_in*/a_out*."""
    if partition.n != graph.n:
        raise ValueError("partition size does not match graph")
    per = []
    for i in range(graph.n):
        ain = Fraction(0)
        aout = Fraction(0)
        for j, w in graph.adjacency[i]:
            if partition.side[i] == partition.side[j]:
                ain += w
            else:
                aout += w
        per.append((ain, aout))
    n = graph.n
    a_in_star = sum((a for a, _ in per), Fraction(0)) / n
    a_out_star = sum((a for _, a in per), Fraction(0)) / n
    h = a_in_star / a_out_star if a_out_star > 0 else None
    return HomophilyReport(a_in_star, a_out_star, h, tuple(per))


def symmetric_two_block(
    n_per_block: int, a_in: Number, a_out: Number
) -> tuple[SocialGraph, Partition]:
    """Complete blocks of n_per_block agents each, weighted so every agent
    receives exactly a_in within its block and a_out across."""
    if n_per_block < 2:
        raise ValueError("need at least 2 agents per block")
    ain, aout = as_fraction(a_in), as_fraction(a_out)
    if ain <= 0 or aout <= 0:
        raise ValueError("a_in and a_out must be positive")
    n = n_per_block
    w_in = ain / (n - 1)
    w_out = aout / n
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            edges.append((i, j, w_in))
            edges.append((n + i, n + j, w_in))
    for i in range(n):
        for j in range(n):
            edges.append((i, n + j, w_out))
    graph = SocialGraph(2 * n, edges)
    part = Partition(tuple([LEFT] * n + [RIGHT] * n))
    return graph, part


def stochastic_two_block(
    n_per_block: int, p_in: float, p_out: float, rng: random.Random
) -> tuple[SocialGraph, Partition]:
    """Two blocks of n_per_block agents; each within-block pair is linked
    with probability p_in and each cross pair with p_out, unit weights."""
    if n_per_block < 1:
        raise ValueError("need at least 1 agent per block")
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise ValueError("probabilities must lie in [0, 1]")
    n = 2 * n_per_block
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            same = (i < n_per_block) == (j < n_per_block)
            if rng.random() < (p_in if same else p_out):
                edges.append((i, j, 1))
    graph = SocialGraph(n, edges)
    part = Partition(tuple([LEFT] * n_per_block + [RIGHT] * n_per_block))
    return graph, part


def erdos_renyi(n: int, p: float, rng: random.Random) -> SocialGraph:
    """Unit-weight random graph: every pair linked independently with
    probability p."""
    if n < 1:
        raise ValueError("need at least 1 agent")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    edges = [
        (i, j, 1) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    return SocialGraph(n, edges)


def watts_strogatz_like(n: int, r: int, k: int, rng: random.Random) -> SocialGraph:
    """Ring of n agents with unit-weight strong ties between all pairs at
    ring distance <= r, plus k weak ties per agent to uniformly drawn,
    deduplicated non-neighbors."""
    if not 1 <= r < n / 2:
        raise ValueError("need 1 <= r < n/2")
    if k < 0:
        raise ValueError("k must be >= 0")
    neighbors: list[set[int]] = [set() for _ in range(n)]
    edges = []

    def link(a: int, b: int) -> None:
        edges.append((min(a, b), max(a, b), 1))
        neighbors[a].add(b)
        neighbors[b].add(a)

    for i in range(n):
        for d in range(1, r + 1):
            j = (i + d) % n
            link(i, j)
    for i in range(n):
        for _ in range(k):
            candidates = [j for j in range(n) if j != i and j not in neighbors[i]]
            if not candidates:
                break
            link(i, rng.choice(candidates))
    return SocialGraph(n, edges)


def hyperbolic_rgg(
    n: int, gamma: float, temperature: float, mean_degree: float, rng: random.Random
) -> SocialGraph:
    """Hyperbolic random graph with power-law exponent gamma and the given
    temperature: radial coordinates with density ~ sinh(alpha r), uniform
    angles, and pairwise connection probability 1/(1 + exp((d - R)/(2T))).

    The disk radius R is calibrated by bisection so the expected degree of
    the sampled coordinates matches mean_degree. Very dense targets saturate
    (the sigmoid caps the all-pairs expectation near (n-1)/2 as R -> 0).
    """
    probs, _ = _hyperbolic_calibration(n, gamma, temperature, mean_degree, rng)
    edges = [
        (i, j, 1)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < probs[i, j]
    ]
    return SocialGraph(n, edges)


def _hyperbolic_calibration(
    n: int, gamma: float, temperature: float, mean_degree: float, rng: random.Random
) -> tuple[np.ndarray, float]:
    """Sample coordinates and bisect the disk radius so the sum of pairwise
    connection probabilities matches the target degree; returns the pairwise
    probability matrix and the calibrated radius."""
    if gamma <= 2:
        raise ValueError("gamma must exceed 2")
    if not 0 < temperature < 1:
        raise ValueError("temperature must lie in (0, 1)")
    if mean_degree <= 0:
        raise ValueError("mean degree must be positive")
    if n < 2:
        raise ValueError("need at least 2 agents")
    alpha = (gamma - 1) / 2
    u = np.array([rng.random() for _ in range(n)])
    theta = np.array([rng.uniform(0.0, 2.0 * math.pi) for _ in range(n)])
    cos_dtheta = np.cos(theta[:, None] - theta[None, :])

    def pair_probs(radius: float) -> np.ndarray:
        radii = np.arccosh(1.0 + u * (math.cosh(alpha * radius) - 1.0)) / alpha
        ch, sh = np.cosh(radii), np.sinh(radii)
        cosh_d = ch[:, None] * ch[None, :] - sh[:, None] * sh[None, :] * cos_dtheta
        dist = np.arccosh(np.maximum(cosh_d, 1.0))
        return 1.0 / (1.0 + np.exp((dist - radius) / (2.0 * temperature)))

    def expected_degree(radius: float) -> float:
        p = pair_probs(radius)
        return float((p.sum() - np.trace(p)) / n)

    lo, hi = 1e-6, 1.0
    while expected_degree(hi) > mean_degree and hi < 256:
        hi *= 2
    for _ in range(20):
        mid = (lo + hi) / 2
        if expected_degree(mid) > mean_degree:
            lo = mid
        else:
            hi = mid
    radius = (lo + hi) / 2
    return pair_probs(radius), radius


def assign_weights(
    graph: SocialGraph, partition: Partition, w_in: Number, w_out: Number
) -> SocialGraph:
    """Same topology with every within-side edge reweighted to w_in and
    every cross edge to w_out."""
    win, wout = as_fraction(w_in), as_fraction(w_out)
    if win <= 0 or wout <= 0:
        raise ValueError("weights must be positive")
    if partition.n != graph.n:
        raise ValueError("partition size does not match graph")
    side = partition.side
    return graph.reweighted(lambda i, j, w: win if side[i] == side[j] else wout)


def kernighan_lin(graph: SocialGraph) -> Partition:
    """Balanced bipartition by classic pass-based swap search on cut weight,
    starting from the first-half / second-half split. Deterministic: ties in
    gain resolve to the lexicographically smallest pair."""
    n = graph.n
    if n < 2:
        raise ValueError("need at least 2 agents")
    half = (n + 1) // 2
    side = [0 if i < half else 1 for i in range(n)]
    adj = [
        [(j, float(w)) for j, w in row] for row in graph.adjacency
    ]
    wlook: dict[tuple[int, int], float] = {}
    for i, j, w in graph.edges:
        wlook[(i, j)] = float(w)

    def w_of(a: int, b: int) -> float:
        return wlook.get((min(a, b), max(a, b)), 0.0)

    while True:
        D = [0.0] * n
        for i in range(n):
            for j, w in adj[i]:
                D[i] += w if side[j] != side[i] else -w
        locked = [False] * n
        left = [i for i in range(n) if side[i] == 0]
        right = [i for i in range(n) if side[i] == 1]
        gains: list[float] = []
        swaps: list[tuple[int, int]] = []
        for _ in range(min(len(left), len(right))):
            ua = sorted((i for i in left if not locked[i]), key=lambda i: -D[i])
            ub = sorted((i for i in right if not locked[i]), key=lambda i: -D[i])
            best = -math.inf
            pair: tuple[int, int] | None = None
            for a in ua:
                if D[a] + D[ub[0]] <= best:
                    break
                for b in ub:
                    bound = D[a] + D[b]
                    if bound <= best:
                        break
                    g = bound - 2.0 * w_of(a, b)
                    if g > best or (g == best and pair is not None and (a, b) < pair):
                        best, pair = g, (a, b)
            a, b = pair
            gains.append(best)
            swaps.append(pair)
            locked[a] = locked[b] = True
            for x, w in adj[a]:
                if not locked[x]:
                    D[x] += 2.0 * w if side[x] == side[a] else -2.0 * w
            for y, w in adj[b]:
                if not locked[y]:
                    D[y] += 2.0 * w if side[y] == side[b] else -2.0 * w
        best_total, best_k = 0.0, 0
        running = 0.0
        for idx, g in enumerate(gains):
            running += g
            if running > best_total + 1e-12:
                best_total, best_k = running, idx + 1
        if best_k == 0:
            break
        for a, b in swaps[:best_k]:
            side[a], side[b] = 1, 0
    return Partition(tuple(LEFT if s == 0 else RIGHT for s in side))


def random_partition(n: int, rng: random.Random) -> Partition:
    """Assign each agent to the left side with one shared probability drawn
    uniformly from [0.4, 0.6]; degenerate draws (an empty side) are redrawn."""
    if n < 2:
        raise ValueError("need at least 2 agents")
    while True:
        p_left = rng.uniform(0.4, 0.6)
        side = tuple(LEFT if rng.random() < p_left else RIGHT for _ in range(n))
        if LEFT in side and RIGHT in side:
            return Partition(side)


@dataclass(frozen=True)
class LoadedEdgeList:
    """Ingested unit-weight graph plus the mapping between the file's node
    ids and the contiguous internal ids."""

    graph: SocialGraph
    original_ids: tuple[int, ...]
    index_of: dict[int, int]


def load_edge_list(source: Union[str, IO[str]]) -> LoadedEdgeList:
    """Read a whitespace-separated integer pair per line ('#' lines are
    comments). Duplicate pairs collapse to one undirected unit edge and
    self-loops are dropped; node ids are reindexed contiguously."""
    close = False
    if isinstance(source, str):
        stream = open(source, "r", encoding="utf-8")
        close = True
    else:
        stream = source
    pairs: set[tuple[int, int]] = set()
    ids: set[int] = set()
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected two node ids, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer node id in {line!r}") from None
            ids.add(a)
            ids.add(b)
            if a == b:
                continue
            pairs.add((min(a, b), max(a, b)))
    finally:
        if close:
            stream.close()
    ordered = tuple(sorted(ids))
    index_of = {orig: idx for idx, orig in enumerate(ordered)}
    graph = SocialGraph(
        len(ordered), ((index_of[a], index_of[b], 1) for a, b in sorted(pairs))
    )
    return LoadedEdgeList(graph, ordered, index_of)


def write_edge_list(graph: SocialGraph, stream: IO[str], weighted: bool = False) -> None:
    """Emit one edge per line as 'i j' or, in the weighted variant, 'i j w'."""
    for i, j, w in graph.edges:
        if weighted:
            stream.write(f"{i} {j} {float(w)!r}\n")
        else:
            stream.write(f"{i} {j}\n")


def write_partition(partition: Partition, stream: IO[str]) -> None:
    """Emit one 'agent side' line per agent."""
    for i, s in enumerate(partition.side):
        stream.write(f"{i} {s}\n")
