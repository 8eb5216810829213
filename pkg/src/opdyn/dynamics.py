"""Best-response dynamics: synchronous rounds, asynchronous single-agent
updates drawn uniformly from the improving set, and adversarial scheduled
replays, with stability, cycle, and potential-decrement accounting.

Cost comparisons run in exact scaled-integer arithmetic when the params carry
a weight precision, and in 64-bit floats with a 1e-12 tie tolerance otherwise.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import theory
from .model import (
    ModelParams,
    OpinionGrid,
    Profile,
    SocialGraph,
    check_precision,
    potential,
    select_preferred,
)

CONVERGED = "converged"
CYCLE = "cycle"
STEP_LIMIT = "step_limit"

#: Absolute tolerance for cost equality in float mode.
TIE_TOL = 1e-12

#: Safety cap on asynchronous moves when no precision bound is available.
DEFAULT_STEP_CAP = 10_000_000


@dataclass(frozen=True)
class UpdateOutcome:
    """Result of a dynamics run.

    kind is one of converged / cycle / step_limit; steps counts synchronous
    rounds or single-agent moves; cycle_period is set for cycles only.
    """

    kind: str
    final_profile: Profile
    steps: int
    cycle_period: int | None = None


@dataclass(frozen=True)
class TrajectoryStep:
    """One snapshot: the mover (None for the initial state and for whole
    synchronous rounds), the profile after the move, and the potential."""

    mover: int | None
    profile: Profile
    phi: float


@dataclass
class Trajectory:
    steps: list[TrajectoryStep] = field(default_factory=list)
    #: (schedule position, agent) entries whose scripted move was not improving.
    skipped: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)


class _Ctx:
    """Numeric view of (graph, params, grid) for the hot loops: integer
    weights scaled by 10**k in exact mode, plain floats otherwise."""

    __slots__ = ("n", "M", "lam_idx", "exact", "b", "nbrs", "wts", "wsum")

    def __init__(self, graph: SocialGraph, params: ModelParams, grid: OpinionGrid):
        self.n = graph.n
        self.M = grid.inv_delta
        self.lam_idx = grid.lam_index
        k = params.weight_precision_k
        self.exact = k is not None
        if self.exact:
            check_precision(graph, params)
            scale = 10**k
            self.b = int(params.b * scale)
            self.nbrs = [[j for j, _ in row] for row in graph.adjacency]
            self.wts = [[int(w * scale) for _, w in row] for row in graph.adjacency]
        else:
            self.b = float(params.b)
            self.nbrs = [[j for j, _ in row] for row in graph.adjacency]
            self.wts = [[float(w) for _, w in row] for row in graph.adjacency]
        self.wsum = [sum(row) for row in self.wts]


def _recommend_idx(m: int, lam_idx: int) -> int:
    if m > lam_idx:
        return 1
    if m < -lam_idx:
        return -1
    return 0


def _cost(ctx: _Ctx, i: int, m: int, s: int, profile: Profile):
    """Cost of opinion index m for agent i; scaled-integer in exact mode,
    real-unit float otherwise. Only differences matter to callers."""
    if ctx.exact:
        total = ctx.b * (m - s * ctx.M) ** 2
        wts = ctx.wts[i]
        for pos, j in enumerate(ctx.nbrs[i]):
            total += wts[pos] * (m - profile[j]) ** 2
        return total
    M = ctx.M
    y = m / M
    total = ctx.b * (y - s) ** 2
    wts = ctx.wts[i]
    for pos, j in enumerate(ctx.nbrs[i]):
        total += wts[pos] * (y - profile[j] / M) ** 2
    return total


def _best_response(ctx: _Ctx, i: int, profile: Profile) -> int:
    cur = profile[i]
    s = _recommend_idx(cur, ctx.lam_idx)
    num = ctx.b * s * ctx.M
    den = ctx.b
    wts = ctx.wts[i]
    for pos, j in enumerate(ctx.nbrs[i]):
        num += wts[pos] * profile[j]
    den = den + ctx.wsum[i]
    if den == 0:
        # b = 0 and no incident edges: every opinion costs nothing.
        return cur
    # The cost is a convex parabola in the index with vertex num/den, so the
    # grid minimizers lie among the two integers bracketing it.
    if ctx.exact:
        lo = num // den
    else:
        lo = math.floor(num / den)
    M = ctx.M
    lo = max(-M, min(M, lo))
    hi = min(M, lo + 1)
    if hi == lo:
        cands = [lo]
    else:
        cands = [lo, hi]
    costs = [(m, _cost(ctx, i, m, s, profile)) for m in cands]
    best = min(c for _, c in costs)
    if ctx.exact:
        minimizers = [m for m, c in costs if c == best]
    else:
        minimizers = [m for m, c in costs if c - best <= TIE_TOL]
    return select_preferred(minimizers, cur)


def best_response(
    i: int,
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> int:
    """Grid opinion minimizing agent i's cost, as an index. Ties resolve to
    the current opinion when it minimizes, then to smaller |value|, then to
    the smaller value."""
    if not (0 <= i < graph.n):
        raise IndexError(f"agent {i} out of range")
    return _best_response(_Ctx(graph, params, grid), i, profile)


def improving_set(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> set[int]:
    """Agents whose best response differs from (and strictly improves on)
    their current opinion. With the prefer-current tie-break the two
    conditions coincide."""
    ctx = _Ctx(graph, params, grid)
    return {i for i in range(ctx.n) if _best_response(ctx, i, profile) != profile[i]}


def is_stable(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> bool:
    """True iff the profile is a Nash equilibrium (empty improving set)."""
    ctx = _Ctx(graph, params, grid)
    return all(_best_response(ctx, i, profile) == profile[i] for i in range(ctx.n))


def sync_step(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
) -> Profile:
    """One synchronous round: every agent simultaneously adopts its best
    response against the old profile."""
    ctx = _Ctx(graph, params, grid)
    return tuple(_best_response(ctx, i, profile) for i in range(ctx.n))


def _snap(record, traj, mover, profile, graph, params, grid):
    if record:
        traj.steps.append(
            TrajectoryStep(mover, profile, potential(profile, graph, params, grid))
        )


def sync_run(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
    max_steps: int,
    record: bool = True,
) -> tuple[UpdateOutcome, Trajectory | None]:
    """Iterate synchronous rounds until a fixed point, a repeated profile
    (cycle), or the round limit. Cycle detection hashes complete profiles."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    ctx = _Ctx(graph, params, grid)
    traj = Trajectory() if record else None
    _snap(record, traj, None, profile, graph, params, grid)
    seen = {profile: 0}
    cur = profile
    t = 0
    while t < max_steps:
        nxt = tuple(_best_response(ctx, i, cur) for i in range(ctx.n))
        if nxt == cur:
            return UpdateOutcome(CONVERGED, cur, t), traj
        t += 1
        _snap(record, traj, None, nxt, graph, params, grid)
        if nxt in seen:
            return UpdateOutcome(CYCLE, nxt, t, cycle_period=t - seen[nxt]), traj
        seen[nxt] = t
        cur = nxt
    return UpdateOutcome(STEP_LIMIT, cur, max_steps), traj


def async_step(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
    rng: random.Random,
) -> tuple[int, Profile] | None:
    """Sample one agent uniformly from the improving set and apply its best
    response. Returns (mover, new profile), or None when the profile is
    already stable."""
    ctx = _Ctx(graph, params, grid)
    candidates = sorted(
        i for i in range(ctx.n) if _best_response(ctx, i, profile) != profile[i]
    )
    if not candidates:
        return None
    mover = rng.choice(candidates)
    new = list(profile)
    new[mover] = _best_response(ctx, mover, profile)
    return mover, tuple(new)


def async_run(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
    rng: random.Random,
    step_cap: int | None = None,
    record: bool = True,
) -> tuple[UpdateOutcome, Trajectory | None]:
    """Run single-agent improving moves, the mover drawn uniformly from the
    improving set, until stability.

    The potential argument guarantees termination; the step cap (the
    precision-based bound when available, a large constant otherwise) exists
    only to surface engine defects, and hitting it yields a step_limit
    outcome that callers should treat as a bug, not as a result.
    """
    ctx = _Ctx(graph, params, grid)
    if step_cap is None:
        k = params.weight_precision_k
        if k is not None:
            step_cap = theory.async_step_bound(
                graph.n, params.b, graph.max_weight(), grid, k
            )
        else:
            step_cap = DEFAULT_STEP_CAP
    traj = Trajectory() if record else None
    _snap(record, traj, None, profile, graph, params, grid)
    cur = list(profile)
    improving = {
        i for i in range(ctx.n) if _best_response(ctx, i, tuple(cur)) != cur[i]
    }
    moves = 0
    while improving:
        if moves >= step_cap:
            return UpdateOutcome(STEP_LIMIT, tuple(cur), moves), traj
        mover = rng.choice(sorted(improving))
        snapshot = tuple(cur)
        cur[mover] = _best_response(ctx, mover, snapshot)
        snapshot = tuple(cur)
        moves += 1
        _snap(record, traj, mover, snapshot, graph, params, grid)
        # Only the mover and its neighbors can change improving status: every
        # other agent sees an unchanged neighborhood and recommendation.
        for j in (mover, *ctx.nbrs[mover]):
            if _best_response(ctx, j, snapshot) != cur[j]:
                improving.add(j)
            else:
                improving.discard(j)
    return UpdateOutcome(CONVERGED, tuple(cur), moves), traj


def scheduled_run(
    profile: Profile,
    graph: SocialGraph,
    params: ModelParams,
    grid: OpinionGrid,
    schedule: list[int],
    record: bool = True,
) -> tuple[UpdateOutcome, Trajectory | None]:
    """Apply best-response moves in the given agent order, skipping entries
    whose move would not strictly improve; skips are recorded on the
    trajectory. The outcome is converged when the final profile is stable."""
    ctx = _Ctx(graph, params, grid)
    for agent in schedule:
        if not (0 <= agent < ctx.n):
            raise IndexError(f"schedule names agent {agent}, graph has {ctx.n}")
    traj = Trajectory() if record else None
    _snap(record, traj, None, profile, graph, params, grid)
    cur = list(profile)
    moves = 0
    for pos, agent in enumerate(schedule):
        br = _best_response(ctx, agent, tuple(cur))
        if br == cur[agent]:
            if record:
                traj.skipped.append((pos, agent))
            continue
        cur[agent] = br
        moves += 1
        _snap(record, traj, agent, tuple(cur), graph, params, grid)
    final = tuple(cur)
    stable = all(_best_response(ctx, i, final) == final[i] for i in range(ctx.n))
    kind = CONVERGED if stable else STEP_LIMIT
    return UpdateOutcome(kind, final, moves), traj


def write_trace(traj: Trajectory, stream, grid: OpinionGrid) -> None:
    """Line-oriented trajectory dump: step,mover,phi,opinion values."""
    for step, entry in enumerate(traj.steps):
        if step == 0:
            mover = "init"
        elif entry.mover is None:
            mover = "ALL"
        else:
            mover = str(entry.mover)
        values = ",".join(repr(grid.float_of(m)) for m in entry.profile)
        stream.write(f"{step},{mover},{entry.phi!r},{values}\n")
