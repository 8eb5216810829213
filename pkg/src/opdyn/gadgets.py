"""Switchable 7-player gadgets whose chained composition admits an
adversarial update schedule with exponentially many strictly improving moves.

The construction fixes delta = 1/2. Each gadget has players A..F wired with
weights (A,B)=e, (B,C)=2e, (C,D)=3e, (D,E)=(B,F)=(D,F)=4e for its own epsilon
e, plus a switch link of weight 4e from the previous gadget's A (or the
external switch player for the first gadget) to B and to D. Successive
epsilons shrink by more than 9x and the media weight stays below the smallest
epsilon, so every A follows its own B no matter what the gadget below does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import dynamics
from .model import (
    ModelParams,
    Number,
    OpinionGrid,
    Profile,
    SocialGraph,
    as_fraction,
    potential_scaled,
)

ROLES = ("A", "B", "C", "D", "E", "F")

#: Scripted switch-off cycle: (role, new index) with 1/2 stored as index 1.
_OFF_STEPS = (
    ("A", 1),
    ("B", 0),
    ("A", 0),
    ("C", 1),
    ("B", 1),
    ("A", 1),
    ("D", 0),
    ("C", 0),
    ("B", 0),
    ("A", 0),
)

_ON_STEPS = (("B", 1), ("D", 1))


@dataclass(frozen=True)
class GadgetChain:
    """A chain of switchable gadgets plus the external switch player (agent
    0). Weights in the graph are the nominal epsilon multiples rescaled by a
    common factor so that everything is integer and comparisons are exact."""

    n_gadgets: int
    graph: SocialGraph
    params: ModelParams
    grid: OpinionGrid
    labels: tuple[dict[str, int], ...]
    switch: int
    epsilons: tuple[Fraction, ...]
    eps_prime: Fraction
    scale: int

    def player(self, gadget: int, role: str) -> int:
        """Agent id of a role in a 1-based gadget index."""
        return self.labels[gadget - 1][role]


def _build_chain(epsilons: tuple[Fraction, ...], eps_prime: Fraction) -> GadgetChain:
    n = len(epsilons)
    for i in range(n - 1):
        if not epsilons[i] > 9 * epsilons[i + 1]:
            raise ValueError(
                f"epsilon {i + 1} must exceed 9x epsilon {i + 2}: "
                f"{epsilons[i]} vs {epsilons[i + 1]}"
            )
    if not 0 < eps_prime < epsilons[-1]:
        raise ValueError("media weight must satisfy 0 < eps_prime < min epsilon")
    # One common denominator makes all weights and b integers; scaling every
    # cost by the same factor leaves best responses untouched.
    scale = 1
    for v in (*epsilons, eps_prime):
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    labels = []
    edges = []
    prev_a = 0
    for g in range(n):
        base = 1 + 6 * g
        ids = {role: base + pos for pos, role in enumerate(ROLES)}
        labels.append(ids)
        e = int(epsilons[g] * scale)
        edges.append((ids["A"], ids["B"], e))
        edges.append((ids["B"], ids["C"], 2 * e))
        edges.append((ids["C"], ids["D"], 3 * e))
        edges.append((ids["D"], ids["E"], 4 * e))
        edges.append((ids["B"], ids["F"], 4 * e))
        edges.append((ids["D"], ids["F"], 4 * e))
        edges.append((prev_a, ids["B"], 4 * e))
        edges.append((prev_a, ids["D"], 4 * e))
        prev_a = ids["A"]
    graph = SocialGraph(6 * n + 1, edges)
    params = ModelParams(int(eps_prime * scale), weight_precision_k=0)
    grid = OpinionGrid(Fraction(1, 2), Fraction(1, 2))
    return GadgetChain(
        n, graph, params, grid, tuple(labels), 0, epsilons, eps_prime, scale
    )


def six_gadget(eps: Number, eps_prime: Number) -> GadgetChain:
    """A single gadget with its external switch: 7 players, 8 edges."""
    e, ep = as_fraction(eps), as_fraction(eps_prime)
    if e <= 0:
        raise ValueError("eps must be positive")
    return _build_chain((e,), ep)


def gadget_chain(
    n: int,
    eps_ratio: Number = 10,
    eps_prime_fraction: Number = Fraction(1, 2),
) -> GadgetChain:
    """Chain of n gadgets with epsilons eps_ratio**(n-i) (so the last gadget
    has epsilon 1) and media weight eps_prime_fraction times the smallest
    epsilon."""
    if n < 1:
        raise ValueError("need at least one gadget")
    ratio = as_fraction(eps_ratio)
    frac = as_fraction(eps_prime_fraction)
    if ratio <= 9:
        raise ValueError("eps_ratio must exceed 9")
    if not 0 < frac < 1:
        raise ValueError("eps_prime_fraction must lie in (0, 1)")
    epsilons = tuple(ratio ** (n - i) for i in range(1, n + 1))
    return _build_chain(epsilons, frac * epsilons[-1])


def initial_profile(chain: GadgetChain) -> Profile:
    """Canonical start: B and D of the first gadget at 1/2, every F at 1/2,
    everything else (including the external switch) at 0."""
    prof = [0] * chain.graph.n
    prof[chain.player(1, "B")] = 1
    prof[chain.player(1, "D")] = 1
    for g in range(1, chain.n_gadgets + 1):
        prof[chain.player(g, "F")] = 1
    return tuple(prof)


def _cycle_moves(chain: GadgetChain, gadget: int, on: bool):
    """Scripted (agent, expected new index) moves of one cycle, with the
    nested cycles of the gadget below spliced in right after each A flip: a
    flip to 1/2 raises the switch seen below (switch-on there), a flip back
    to 0 lowers it (switch-off)."""
    ids = chain.labels[gadget - 1]
    if on:
        for role, val in _ON_STEPS:
            yield ids[role], val
        return
    for role, val in _OFF_STEPS:
        yield ids[role], val
        if role == "A" and gadget < chain.n_gadgets:
            yield from _cycle_moves(chain, gadget + 1, on=(val == 1))


def scripted_moves(chain: GadgetChain) -> list[tuple[int, int]]:
    """The full cascade as (agent, expected opinion index) pairs, starting
    from the canonical initial profile: a switch-off of the first gadget."""
    return list(_cycle_moves(chain, 1, on=False))


def exponential_schedule(chain: GadgetChain) -> list[int]:
    """Adversarial agent order realizing 10 moves for one gadget and
    10 + 12(2^n - 2) moves for a chain of n gadgets."""
    return [agent for agent, _ in scripted_moves(chain)]


def expected_moves(n: int) -> int:
    return 10 + 12 * (2**n - 2)


@dataclass
class VerificationReport:
    """Replay audit of the scripted schedule: every move must be the strict
    best response it claims to be, and the exact potential must fall at each
    move."""

    ok: bool
    moves: int
    failures: list[str]
    phi_trace: list[int]
    final_profile: Profile
    states_checked: bool


def verify_schedule(
    chain: GadgetChain, schedule: list[int] | None = None
) -> VerificationReport:
    """Replay the schedule through the engine from the canonical initial
    profile. With the generated schedule (the default), also check each
    mover's realized opinion against the scripted value, which pins every
    intermediate state of every cycle."""
    moves = scripted_moves(chain)
    expected: list[int | None]
    if schedule is None or schedule == [a for a, _ in moves]:
        plan = [(a, v) for a, v in moves]
    else:
        plan = [(a, None) for a in schedule]
    ctx = dynamics._Ctx(chain.graph, chain.params, chain.grid)
    profile = list(initial_profile(chain))
    failures: list[str] = []
    phi = potential_scaled(tuple(profile), chain.graph, chain.params, chain.grid)
    trace = [phi]
    applied = 0
    for pos, (agent, want) in enumerate(plan):
        snapshot = tuple(profile)
        br = dynamics._best_response(ctx, agent, snapshot)
        if br == profile[agent]:
            failures.append(f"move {pos}: agent {agent} has no improving move")
            continue
        if want is not None and br != want:
            failures.append(
                f"move {pos}: agent {agent} plays {br}, script expects {want}"
            )
        profile[agent] = br
        applied += 1
        new_phi = potential_scaled(tuple(profile), chain.graph, chain.params, chain.grid)
        if not new_phi < phi:
            failures.append(f"move {pos}: potential did not fall ({phi} -> {new_phi})")
        phi = new_phi
        trace.append(phi)
    return VerificationReport(
        ok=not failures,
        moves=applied,
        failures=failures,
        phi_trace=trace,
        final_profile=tuple(profile),
        states_checked=schedule is None,
    )
