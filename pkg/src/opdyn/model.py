"""Core vocabulary: the discrete opinion grid, the weighted influence graph,
media recommendations, per-agent quadratic costs, and the global potential.

Opinions live on the grid {-1, -1+delta, ..., 1-delta, 1} and are represented
throughout as signed integer indices m with value m*delta, so that grid
arithmetic and tie detection are exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, float, str, Fraction]

#: An opinion profile is one grid index per agent. Tuples hash, which the
#: synchronous cycle detector relies on.
Profile = tuple[int, ...]


def as_fraction(x: Number) -> Fraction:
    """Convert a number to an exact rational.

    Floats are interpreted through their decimal representation (0.1 becomes
    1/10, not the binary float), matching what a human writing 0.1 means.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(Decimal(repr(x)))
    return Fraction(x)


def decimal_precision(values: Iterable[Fraction]) -> int | None:
    """Smallest k such that every value times 10**k is an integer, or None
    if some value has no finite decimal expansion."""
    k = 0
    for v in values:
        den = v.denominator
        twos = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        fives = 0
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den != 1:
            return None
        k = max(k, twos, fives)
    return k


class OpinionGrid:
    """The opinion space with step delta and recommendation threshold lambda.

    delta must satisfy 0 < delta <= 1/2 with 1/delta an integer M, so the grid
    is exactly {-1, -1+delta, ..., 1} with 2M+1 values. lambda in (0, 1) is
    replaced internally by the largest grid value not exceeding it
    (effective_lambda); recommendations are computed against that value.
    """

    __slots__ = ("delta", "lam", "inv_delta", "lam_index")

    def __init__(self, delta: Number, lam: Number = Fraction(1, 2)):
        d = as_fraction(delta)
        if not (0 < d <= Fraction(1, 2)):
            raise ValueError(f"delta must be in (0, 1/2], got {d}")
        inv = 1 / d
        if inv.denominator != 1:
            raise ValueError(f"1/delta must be an integer, got delta={d}")
        lamf = as_fraction(lam)
        if not (0 < lamf < 1):
            raise ValueError(f"lambda must be in (0, 1), got {lamf}")
        self.delta = d
        self.lam = lamf
        self.inv_delta = int(inv)
        self.lam_index = math.floor(lamf * self.inv_delta)

    @property
    def size(self) -> int:
        return 2 * self.inv_delta + 1

    @property
    def effective_lambda(self) -> Fraction:
        """Largest grid value <= lambda; the recommendation tie sits here."""
        return Fraction(self.lam_index, self.inv_delta)

    def value_of(self, index: int) -> Fraction:
        if abs(index) > self.inv_delta:
            raise ValueError(f"index {index} outside [-{self.inv_delta}, {self.inv_delta}]")
        return Fraction(index, self.inv_delta)

    def float_of(self, index: int) -> float:
        return index / self.inv_delta

    def index_of(self, value: Number) -> int:
        """Exact index of a value that must lie on the grid."""
        v = as_fraction(value) * self.inv_delta
        if v.denominator != 1 or abs(v) > self.inv_delta:
            raise ValueError(f"{value} is not on the grid (delta={self.delta})")
        return int(v)

    def round_index(self, y: Union[float, Fraction]) -> int:
        """Nearest index to the real number y (in index units), breaking
        exact halfway ties toward the smaller absolute value, clamped."""
        lo = math.floor(y)
        hi = lo + 1
        below, above = y - lo, hi - y
        if below < above:
            idx = lo
        elif above < below:
            idx = hi
        else:
            idx = lo if abs(lo) < abs(hi) else hi
        return max(-self.inv_delta, min(self.inv_delta, idx))

    def round_value(self, value: Union[float, Fraction]) -> int:
        """Index of the grid value nearest to a real opinion in [-1, 1]."""
        if isinstance(value, Fraction):
            return self.round_index(value * self.inv_delta)
        return self.round_index(value * self.inv_delta)

    def indices(self) -> range:
        return range(-self.inv_delta, self.inv_delta + 1)

    def __repr__(self) -> str:
        return f"OpinionGrid(delta={self.delta}, lambda={self.lam})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OpinionGrid)
            and self.delta == other.delta
            and self.lam == other.lam
        )

    def __hash__(self) -> int:
        return hash((self.delta, self.lam))


def recommend(index: int, grid: OpinionGrid) -> int:
    """Media item in {-1, 0, +1} shown to an agent holding the given opinion.

    Returns -1 below -effective_lambda, +1 above it, and 0 otherwise, so the
    boundary opinions +-effective_lambda receive the moderate item.
    """
    if index > grid.lam_index:
        return 1
    if index < -grid.lam_index:
        return -1
    return 0


class SocialGraph:
    """Undirected weighted influence graph over n agents.

    Edges are stored once with i < j and strictly positive exact weights;
    adjacency holds, per agent, the (neighbor, weight) incidence list.
    """

    __slots__ = ("n", "edges", "adjacency")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, Number]]):
        if n < 1:
            raise ValueError("graph needs at least one agent")
        seen: dict[tuple[int, int], Fraction] = {}
        for i, j, w in edges:
            if i == j:
                raise ValueError(f"self-loop at agent {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) outside agent range 0..{n - 1}")
            wf = as_fraction(w)
            if wf <= 0:
                raise ValueError(f"edge ({i},{j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen[key] = wf
        self.n = n
        self.edges: tuple[tuple[int, int, Fraction], ...] = tuple(
            (i, j, w) for (i, j), w in sorted(seen.items())
        )
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        self.adjacency: tuple[tuple[tuple[int, Fraction], ...], ...] = tuple(
            tuple(row) for row in adj
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def strength(self, i: int) -> Fraction:
        """Total incident edge weight of agent i."""
        return sum((w for _, w in self.adjacency[i]), Fraction(0))

    def max_weight(self) -> Fraction:
        return max((w for _, _, w in self.edges), default=Fraction(0))

    def reweighted(self, weight_of) -> "SocialGraph":
        """Copy with each edge weight replaced by weight_of(i, j, w)."""
        return SocialGraph(self.n, ((i, j, weight_of(i, j, w)) for i, j, w in self.edges))

    def __repr__(self) -> str:
        return f"SocialGraph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class ModelParams:
    """Media influence weight and the optional decimal precision contract.

    When weight_precision_k is set, b and every edge weight must be integer
    multiples of 10**-k; the engine then runs in exact scaled-integer
    arithmetic. b = 0 is accepted (the two-block analysis admits it) but the
    base model assumes b > 0, so a warning is emitted.
    """

    b: Fraction
    weight_precision_k: int | None = None

    def __init__(self, b: Number, weight_precision_k: int | None = None):
        bf = as_fraction(b)
        if bf < 0:
            raise ValueError(f"media weight b must be >= 0, got {b}")
        if bf == 0:
            warnings.warn(
                "b = 0 disables media influence; the cost model normally assumes b > 0",
                stacklevel=2,
            )
        if weight_precision_k is not None:
            if weight_precision_k < 0:
                raise ValueError("weight_precision_k must be >= 0")
            if (bf * 10**weight_precision_k).denominator != 1:
                raise ValueError(
                    f"b={b} is not an integer multiple of 10^-{weight_precision_k}"
                )
        object.__setattr__(self, "b", bf)
        object.__setattr__(self, "weight_precision_k", weight_precision_k)


def check_precision(graph: SocialGraph, params: ModelParams) -> None:
    """Validate that every edge weight honors the declared precision."""
    k = params.weight_precision_k
    if k is None:
        return
    scale = 10**k
    for i, j, w in graph.edges:
        if (w * scale).denominator != 1:
            raise ValueError(
                f"edge ({i},{j}) weight {w} is not an integer multiple of 10^-{k}"
            )


def make_profile(values: Sequence[Number], grid: OpinionGrid) -> Profile:
    """Profile from on-grid opinion values (exact; off-grid values raise)."""
    return tuple(grid.index_of(v) for v in values)


def profile_values(profile: Profile, grid: OpinionGrid) -> list[float]:
    return [grid.float_of(m) for m in profile]


def agent_cost(
    i: int,
    y: int,
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> float:
    """Cost agent i pays for opinion y (a grid index) against the profile:
    b*(y - s(x_i))^2 plus the weighted squared distances to neighbors.

    The recommendation s is evaluated at agent i's current opinion in the
    profile, not at y.
    """
    if not (0 <= i < graph.n):
        raise IndexError(f"agent {i} out of range")
    if len(profile) != graph.n:
        raise ValueError("profile length does not match graph")
    yv = grid.float_of(y)
    s = recommend(profile[i], grid)
    total = float(params.b) * (yv - s) ** 2
    for j, w in graph.adjacency[i]:
        total += float(w) * (yv - grid.float_of(profile[j])) ** 2
    return total


def potential(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> float:
    """Global potential: media discomfort of every agent plus the weighted
    discord across every edge. Strictly decreases along every strictly
    improving unilateral move."""
    if len(profile) != graph.n:
        raise ValueError("profile length does not match graph")
    b = float(params.b)
    total = 0.0
    for m in profile:
        s = recommend(m, grid)
        total += b * (grid.float_of(m) - s) ** 2
    for i, j, w in graph.edges:
        total += float(w) * (grid.float_of(profile[i]) - grid.float_of(profile[j])) ** 2
    return total


def potential_scaled(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> int:
    """Exact potential in scaled integer units: the real value times
    10**k * M**2. Every single-agent improving move lowers this by >= 1.

    Requires weight_precision_k set on params.
    """
    k = params.weight_precision_k
    if k is None:
        raise ValueError("potential_scaled requires weight_precision_k")
    if len(profile) != graph.n:
        raise ValueError("profile length does not match graph")
    check_precision(graph, params)
    scale = 10**k
    M = grid.inv_delta
    b = int(params.b * scale)
    total = 0
    for m in profile:
        s = recommend(m, grid)
        total += b * (m - s * M) ** 2
    for i, j, w in graph.edges:
        total += int(w * scale) * (profile[i] - profile[j]) ** 2
    return total


def select_preferred(minimizers: Sequence[int], current: int) -> int:
    """Tie-break among exact cost minimizers: the current opinion when it is
    one of them, otherwise the smallest absolute value, then the smaller."""
    if current in minimizers:
        return current
    return min(minimizers, key=lambda m: (abs(m), m))
