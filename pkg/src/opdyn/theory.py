"""Closed-form analysis for the symmetric two-block model: the five media
thresholds and their relations, the exact two-scalar dynamics, the stability
system, consensus-regime classification, and convergence step bounds.

Everything here is exact rational arithmetic; inputs are converted with
decimal semantics (0.1 means 1/10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .model import Number, OpinionGrid, as_fraction, recommend, select_preferred

NO_CONSENSUS = "no_consensus_stable"
ONLY_ZERO = "only_zero_consensus_stable"
NON_EXTREME_OK = "non_extreme_consensus_possible"
ONLY_EXTREME = "only_extreme_consensus_possible"
UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class TwoBlockParams:
    """Cumulative within-block influence a_in, cross-block influence a_out,
    and media weight b, with the derived homophily ratio h = a_in/a_out and
    relative media influence b_tilde = b/a_out."""

    a_in: Fraction
    a_out: Fraction
    b: Fraction

    def __init__(self, a_in: Number, a_out: Number, b: Number):
        ain, aout, bf = as_fraction(a_in), as_fraction(a_out), as_fraction(b)
        if ain <= 0 or aout <= 0:
            raise ValueError("a_in and a_out must be positive")
        if bf < 0:
            raise ValueError("b must be >= 0")
        object.__setattr__(self, "a_in", ain)
        object.__setattr__(self, "a_out", aout)
        object.__setattr__(self, "b", bf)

    @property
    def h(self) -> Fraction:
        return self.a_in / self.a_out

    @property
    def b_tilde(self) -> Fraction:
        return self.b / self.a_out

    @classmethod
    def from_ratios(cls, h: Number, b_tilde: Number, a_out: Number = 1) -> "TwoBlockParams":
        """Build params realizing a homophily ratio and relative media weight."""
        aout = as_fraction(a_out)
        return cls(as_fraction(h) * aout, aout, as_fraction(b_tilde) * aout)


@dataclass(frozen=True)
class Thresholds:
    """The five media thresholds at a given homophily ratio, and their
    combination tau_star = max(tau1, tau2)."""

    tau1: Fraction
    tau2: Fraction
    tau3: Fraction
    tau4: Fraction
    tau5: Fraction

    @property
    def tau_star(self) -> Fraction:
        return max(self.tau1, self.tau2)


def thresholds(h: Number, grid: OpinionGrid) -> Thresholds:
    """Evaluate all five thresholds at homophily ratio h, using the grid's
    effective lambda. Raises when 2 - 2*lambda - delta <= 0, where the first
    threshold's denominator degenerates."""
    hf = as_fraction(h)
    if hf < 0:
        raise ValueError("h must be >= 0")
    d = grid.delta
    lam = grid.effective_lambda
    den1 = 2 - 2 * lam - d
    if den1 <= 0:
        raise ValueError(
            f"thresholds need 2 - 2*lambda - delta > 0 (lambda={lam}, delta={d})"
        )
    return Thresholds(
        tau1=(2 + 2 * lam + d - d * hf) / den1,
        tau2=(Fraction(2) / d - 1) - hf,
        tau3=(2 - d - (2 * lam + 3 * d) * hf) / (2 + d),
        tau4=hf - (Fraction(2) / d + 1),
        tau5=(2 + d - (2 * lam + d) * hf) / (2 - d),
    )


class Relations(NamedTuple):
    """Truth of the four threshold relationships at a concrete h; all four
    must hold wherever the thresholds are defined."""

    tau1_gt_tau4_only_below_bound: bool
    tau2_lt_tau4_when_h_large: bool
    tau3_lt_tau5: bool
    tau5_neg_when_tau4_pos: bool


def check_relations(h: Number, grid: OpinionGrid) -> Relations:
    hf = as_fraction(h)
    t = thresholds(hf, grid)
    d = grid.delta
    lam = grid.effective_lambda
    bound = Fraction(2) / d + 1 / (1 - lam)
    return Relations(
        tau1_gt_tau4_only_below_bound=(not t.tau1 > t.tau4) or hf < bound,
        tau2_lt_tau4_when_h_large=(not hf > Fraction(2) / d) or t.tau2 < t.tau4,
        tau3_lt_tau5=t.tau3 < t.tau5,
        tau5_neg_when_tau4_pos=(not t.tau4 > 0) or t.tau5 < 0,
    )


def interval_emptiness(h: Number, grid: OpinionGrid) -> bool:
    """True when the non-extreme-consensus band and the low-media
    no-consensus band cannot both be non-empty at this h. Always holds."""
    t = thresholds(h, grid)
    both = t.tau4 > 0 and max(t.tau2, t.tau3) > max(Fraction(0), t.tau4)
    return not both


def best_response_target(
    s_val: int,
    x_self: Number,
    x_other: Number,
    p: TwoBlockParams,
) -> Fraction:
    """Continuous cost minimizer for an agent in a two-block profile:
    (b*s + a_out*x_other + a_in*x_self) / (b + a_out + a_in). The grid best
    response lies within delta/2 of this value."""
    if s_val not in (-1, 0, 1):
        raise ValueError("s_val must be -1, 0, or 1")
    xs, xo = as_fraction(x_self), as_fraction(x_other)
    return (p.b * s_val + p.a_out * xo + p.a_in * xs) / (p.b + p.a_out + p.a_in)


def _block_best_response(m_self: int, m_other: int, p: TwoBlockParams, grid: OpinionGrid) -> int:
    """Exact grid best response of one block against the other, with the
    engine's tie-break (current, then smaller |value|, then smaller value)."""
    M = grid.inv_delta
    s = recommend(m_self, grid)
    num = p.b * s * M + p.a_in * m_self + p.a_out * m_other
    den = p.b + p.a_in + p.a_out
    lo = math.floor(num / den)
    lo = max(-M, min(M, lo))
    hi = min(M, lo + 1)
    cands = [lo] if hi == lo else [lo, hi]

    def cost(m: int) -> Fraction:
        return (
            p.b * (m - s * M) ** 2
            + p.a_in * (m - m_self) ** 2
            + p.a_out * (m - m_other) ** 2
        )

    costs = [(m, cost(m)) for m in cands]
    best = min(c for _, c in costs)
    return select_preferred([m for m, c in costs if c == best], m_self)


@dataclass(frozen=True)
class TwoBlockRun:
    """Synchronous two-scalar trajectory: block opinion index pairs from the
    initial state onward, with the same outcome semantics as the engine."""

    states: tuple[tuple[int, int], ...]
    kind: str
    steps: int
    cycle_period: int | None = None

    @property
    def final(self) -> tuple[int, int]:
        return self.states[-1]


def twoblock_sync_run(
    m_left: int,
    m_right: int,
    p: TwoBlockParams,
    grid: OpinionGrid,
    max_steps: int,
) -> TwoBlockRun:
    """Iterate the exact blockwise best responses simultaneously. Blockwise
    constant profiles stay blockwise constant, so this is the whole
    synchronous dynamics of the symmetric two-block model."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    state = (m_left, m_right)
    states = [state]
    seen = {state: 0}
    t = 0
    while t < max_steps:
        nxt = (
            _block_best_response(state[0], state[1], p, grid),
            _block_best_response(state[1], state[0], p, grid),
        )
        if nxt == state:
            return TwoBlockRun(tuple(states), "converged", t)
        t += 1
        states.append(nxt)
        if nxt in seen:
            return TwoBlockRun(tuple(states), "cycle", t, cycle_period=t - seen[nxt])
        seen[nxt] = t
        state = nxt
    return TwoBlockRun(tuple(states), "step_limit", max_steps)


@dataclass(frozen=True)
class TwoBlockStability:
    """Exact stability verdict for a blockwise profile, alongside the four
    necessary-condition slacks (each >= 0 iff its inequality holds)."""

    stable: bool
    conditions_hold: bool
    slacks: tuple[Fraction, Fraction, Fraction, Fraction]

    def __bool__(self) -> bool:
        return self.stable


def twoblock_stable(
    m_left: int,
    m_right: int,
    p: TwoBlockParams,
    grid: OpinionGrid,
) -> TwoBlockStability:
    """Exact Nash test for the blockwise profile (both blocks' best responses
    stay put), with the four necessary inequalities exposed for inspection.
    The inequalities are necessary but not sufficient; the exact test is the
    verdict."""
    xl, xr = grid.value_of(m_left), grid.value_of(m_right)
    sl, sr = recommend(m_left, grid), recommend(m_right, grid)
    bt = p.b_tilde
    h = p.h
    d2 = grid.delta / 2
    gap = d2 * (h + 1)
    slacks = (
        (xl - xr) + gap - bt * (sl - xl - d2),
        bt * (sl - xl + d2) - ((xl - xr) - gap),
        (xr - xl) + gap - bt * (sr - xr - d2),
        bt * (sr - xr + d2) - ((xr - xl) - gap),
    )
    stable = (
        _block_best_response(m_left, m_right, p, grid) == m_left
        and _block_best_response(m_right, m_left, p, grid) == m_right
    )
    return TwoBlockStability(stable, all(s >= 0 for s in slacks), slacks)


@dataclass(frozen=True)
class ConsensusRegime:
    """Which consensus outcomes remain possible for the given initial block
    opinions and media strength, per the matching case analysis.

    b_interval is the half-open relative-media band that fired (None means
    unbounded on that side); nonextreme_h_bound is the homophily level at or
    beyond which non-extreme consensus is ruled out for divergent starts.
    """

    kind: str
    applied_case: str
    b_interval: tuple[Fraction | None, Fraction | None]
    nonextreme_h_bound: Fraction


def classify(
    m_left: int,
    m_right: int,
    p: TwoBlockParams,
    grid: OpinionGrid,
) -> ConsensusRegime:
    """Consensus-regime classification by the initial-opinion pattern:
    divergent with both / one / no block beyond the recommendation threshold,
    or convergent. Case rows are evaluated top-down; boundary points follow
    each row's stated strict or weak inequality."""
    bt = p.b_tilde
    h = p.h
    d = grid.delta
    lam = grid.effective_lambda
    lam_idx = grid.lam_index
    nonextreme_h = max(Fraction(2) / d - 1, (2 - d) / (2 * lam + 3 * d))

    divergent = m_left * m_right < 0
    if not divergent:
        if bt > h + 1:
            return ConsensusRegime(
                ONLY_EXTREME,
                "convergent initials: media above h+1 forbids non-extreme consensus",
                (h + 1, None),
                nonextreme_h,
            )
        return ConsensusRegime(
            UNCONSTRAINED,
            "convergent initials: media within h+1, no exclusion",
            (None, h + 1),
            nonextreme_h,
        )

    extremes = int(abs(m_left) > lam_idx) + int(abs(m_right) > lam_idx)
    t = thresholds(h, grid)
    if extremes >= 1 and h >= Fraction(2) / d + 1 / (1 - lam):
        return ConsensusRegime(
            NO_CONSENSUS,
            "divergent with an extreme block: homophily at or above the "
            "all-media no-consensus bound",
            (None, None),
            nonextreme_h,
        )

    zero = Fraction(0)
    m04 = max(zero, t.tau4)
    m23 = max(t.tau2, t.tau3)
    m0234 = max(zero, t.tau2, t.tau3, t.tau4)

    if extremes == 2:
        pattern = "divergent, both blocks extreme"
        cap = t.tau1
        cap_name = "tau1"
    elif extremes == 1:
        pattern = "divergent, one block extreme"
        cap = t.tau_star
        cap_name = "tau_star"
    else:
        pattern = "divergent, both blocks moderate"
        cap = None
        cap_name = ""

    if cap is not None:
        if bt > cap:
            return ConsensusRegime(
                NO_CONSENSUS, f"{pattern}: media above {cap_name}", (cap, None), nonextreme_h
            )
        if m0234 < bt <= cap:
            return ConsensusRegime(
                ONLY_ZERO,
                f"{pattern}: media between the sign-crossing thresholds and {cap_name}",
                (m0234, cap),
                nonextreme_h,
            )
    else:
        if bt > m23:
            return ConsensusRegime(
                ONLY_ZERO,
                f"{pattern}: media above the sign-crossing thresholds",
                (m23, None),
                nonextreme_h,
            )
    if m04 < bt <= m23:
        return ConsensusRegime(
            NON_EXTREME_OK,
            f"{pattern}: media inside the non-extreme consensus band",
            (m04, m23),
            nonextreme_h,
        )
    if zero < bt <= m04:
        return ConsensusRegime(
            NO_CONSENSUS, f"{pattern}: media at or below tau4", (zero, m04), nonextreme_h
        )
    return ConsensusRegime(
        UNCONSTRAINED, f"{pattern}: no case row covers this media level", (None, None), nonextreme_h
    )


def delta_to_zero_bound(m: int, h: Number, grid: OpinionGrid) -> Fraction:
    """Necessary upper bound on the relative media influence for consensus at
    a non-extreme positive grid opinion to be stable. Shrinks to zero as the
    grid refines, which is why non-extreme consensus dies with delta -> 0."""
    M = grid.inv_delta
    if not (0 < m < M):
        raise ValueError("opinion must be strictly between 0 and 1 on the grid")
    hf = as_fraction(h)
    x = grid.value_of(m)
    d2 = grid.delta / 2
    if x <= grid.effective_lambda:
        return d2 * (1 + hf) / (x - d2)
    return d2 * (1 + hf) / (1 - x - d2)


def async_step_bound(
    n: int,
    b: Number,
    w_max: Number,
    grid: OpinionGrid,
    k: int,
) -> int:
    """Upper bound on strictly improving asynchronous moves when b and all
    edge weights have decimal precision k: ceil(10^k (4bn + 4 w_max n^2) / delta^2)."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    bf, wf = as_fraction(b), as_fraction(w_max)
    M2 = grid.inv_delta * grid.inv_delta
    return math.ceil(10**k * (4 * bf * n + 4 * wf * n * n) * M2)
