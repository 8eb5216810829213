"""Monte-Carlo protocol: initial-opinion sampling, relaxed-consensus
detection, seeded trial execution, consensus-probability estimation, and CSV
emission for parameter sweeps.

Trials are seeded as base_seed XOR trial_index, so a record depends only on
the spec and its index, never on execution order; sweeps may therefore fan
trials out to worker processes and still aggregate deterministically.
"""

from __future__ import annotations

import dataclasses
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from . import dynamics, graphs
from .model import ModelParams, OpinionGrid, Profile, SocialGraph
from .graphs import LEFT, Partition

GENERAL_DIVERGENT = "general_divergent"
EXTREME_DIVERGENT = "extreme_divergent"
NON_DIVERGENT = "non_divergent"
FIXED_MEAN = "fixed_mean"

_SCHEME_KINDS = (GENERAL_DIVERGENT, EXTREME_DIVERGENT, NON_DIVERGENT, FIXED_MEAN)

NETWORK_MODELS = (
    "symmetric_two_block",
    "stochastic_two_block",
    "erdos_renyi",
    "watts_strogatz",
    "hyperbolic",
    "complete",
    "edge_list",
)

CSV_COLUMNS = (
    "experiment_id",
    "network_model",
    "n",
    "delta",
    "lambda",
    "w_in",
    "w_out",
    "b",
    "b_tilde",
    "h",
    "init_scheme",
    "update_mode",
    "n_p",
    "m_consensus",
    "p_c",
    "ci_half_width",
    "mean_steps",
    "mean_final_variance",
)


@dataclass(frozen=True)
class InitScheme:
    """How each side's initial opinions are drawn before grid rounding."""

    kind: str
    target_abs_mean: float | None = None

    def __post_init__(self):
        if self.kind not in _SCHEME_KINDS:
            raise ValueError(f"unknown init scheme {self.kind!r}")
        if self.kind == FIXED_MEAN:
            if self.target_abs_mean is None or not 0 <= self.target_abs_mean <= 1:
                raise ValueError("fixed_mean needs a target in [0, 1]")
        elif self.target_abs_mean is not None:
            raise ValueError("target_abs_mean only applies to fixed_mean")

    def label(self) -> str:
        if self.kind == FIXED_MEAN:
            return f"{FIXED_MEAN}({self.target_abs_mean!r})"
        return self.kind


def general_divergent() -> InitScheme:
    return InitScheme(GENERAL_DIVERGENT)


def extreme_divergent() -> InitScheme:
    return InitScheme(EXTREME_DIVERGENT)


def non_divergent() -> InitScheme:
    return InitScheme(NON_DIVERGENT)


def fixed_mean(target_abs_mean: float) -> InitScheme:
    return InitScheme(FIXED_MEAN, target_abs_mean)


def sample_initial_opinions(
    scheme: InitScheme,
    partition: Partition,
    grid: OpinionGrid,
    rng: random.Random,
) -> Profile:
    """Draw one real opinion per agent from its side's interval and round to
    the nearest grid value (halfway ties toward the smaller |value|).

    general_divergent: side caps at -xi / +xi with xi ~ U[0, lambda+delta]
    and the outer ends drawn uniformly; extreme_divergent: [-1, -lambda-delta]
    and [lambda+delta, 1]; non_divergent: both sides [-1, 1]; fixed_mean(m):
    [-m-delta, -m+delta] and [m-delta, m+delta], clipped to [-1, 1].

    Intervals use the caller's lambda as given (not the grid projection), so
    extreme draws land strictly beyond the recommendation threshold after
    rounding.
    """
    lam = float(grid.lam)
    d = float(grid.delta)
    if scheme.kind == GENERAL_DIVERGENT:
        xi = rng.uniform(0.0, min(lam + d, 1.0))
        high_left = -xi
        low_right = xi
        low_left = rng.uniform(-1.0, high_left)
        high_right = rng.uniform(low_right, 1.0)
    elif scheme.kind == EXTREME_DIVERGENT:
        if lam + d > 1:
            raise ValueError(
                f"extreme intervals are empty: lambda+delta = {lam + d} > 1"
            )
        low_left, high_left = -1.0, -(lam + d)
        low_right, high_right = lam + d, 1.0
    elif scheme.kind == NON_DIVERGENT:
        low_left, high_left = -1.0, 1.0
        low_right, high_right = -1.0, 1.0
    else:
        m = scheme.target_abs_mean
        low_left, high_left = max(-1.0, -m - d), min(1.0, -m + d)
        low_right, high_right = max(-1.0, m - d), min(1.0, m + d)
    out = []
    for i in range(partition.n):
        if partition.side[i] == LEFT:
            v = rng.uniform(low_left, high_left)
        else:
            v = rng.uniform(low_right, high_right)
        out.append(grid.round_value(v))
    return tuple(out)


@dataclass(frozen=True)
class RelaxedConsensus:
    """Side means projected onto the grid; consensus when both projections
    coincide. Side variances feed the tightness check against 0.5*delta."""

    consensus: bool
    projected_left: int
    projected_right: int
    mean_left: float
    mean_right: float
    var_left: float
    var_right: float


def relaxed_consensus(
    profile: Profile, partition: Partition, grid: OpinionGrid
) -> RelaxedConsensus:
    if partition.n != len(profile):
        raise ValueError("partition size does not match profile")
    left = partition.left()
    right = partition.right()
    if not left or not right:
        raise ValueError("both sides must be non-empty")

    def stats(ids: list[int]) -> tuple[float, float]:
        vals = [grid.float_of(profile[i]) for i in ids]
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        return mean, var

    mean_l, var_l = stats(left)
    mean_r, var_r = stats(right)
    proj_l = grid.round_value(mean_l)
    proj_r = grid.round_value(mean_r)
    return RelaxedConsensus(
        proj_l == proj_r, proj_l, proj_r, mean_l, mean_r, var_l, var_r
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep point: network model and parameters, grid, weight scheme,
    media rule (absolute b or a target b_tilde realized as b_tilde * a_out*),
    init scheme, update mode, and trial count.

    Float-valued network params and w_in/w_out may be (lo, hi) pairs, drawn
    uniformly per trial.
    """

    experiment_id: str
    network: str
    network_params: tuple[tuple[str, object], ...] = ()
    delta: object = 0.25
    lam: object = 0.5
    w_in: object = 1.0
    w_out: object = 1.0
    b: float | None = None
    b_tilde: float | None = None
    init: InitScheme = dataclasses.field(default_factory=non_divergent)
    update: str = "sync"
    max_steps: int = 1000
    n_p: int = 100
    base_seed: int = 0
    partition_rule: str = "auto"

    def __post_init__(self):
        if self.network not in NETWORK_MODELS:
            raise ValueError(f"unknown network model {self.network!r}")
        if (self.b is None) == (self.b_tilde is None):
            raise ValueError("set exactly one of b and b_tilde")
        if self.update not in ("sync", "async"):
            raise ValueError("update must be 'sync' or 'async'")
        if self.n_p < 1:
            raise ValueError("n_p must be >= 1")
        if self.partition_rule not in ("auto", "model", "kl", "random"):
            raise ValueError(f"unknown partition rule {self.partition_rule!r}")

    def params(self) -> dict[str, object]:
        return dict(self.network_params)

    def with_overrides(self, overrides: Mapping[str, object]) -> "ExperimentSpec":
        """Copy with field overrides; the network_params entry merges."""
        changes = dict(overrides)
        if "network_params" in changes:
            merged = self.params()
            merged.update(changes["network_params"])
            changes["network_params"] = tuple(sorted(merged.items()))
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one Monte-Carlo trial."""

    trial: int
    seed: int
    n: int
    h: float
    b: float
    b_tilde: float
    w_in: float
    w_out: float
    outcome: str
    steps: int
    consensus: bool
    consensus_value: float | None
    mean_left: float
    mean_right: float
    final_variance: float


_EDGE_LIST_CACHE: dict[str, graphs.LoadedEdgeList] = {}


def _load_cached(path: str) -> graphs.LoadedEdgeList:
    if path not in _EDGE_LIST_CACHE:
        _EDGE_LIST_CACHE[path] = graphs.load_edge_list(path)
    return _EDGE_LIST_CACHE[path]


def _draw(value, rng: random.Random, integer: bool = False):
    if isinstance(value, tuple):
        lo, hi = value
        return rng.randint(int(lo), int(hi)) if integer else rng.uniform(lo, hi)
    return value


def _build_network(
    spec: ExperimentSpec, rng: random.Random
) -> tuple[SocialGraph, Partition, float, float]:
    """Realize the trial's graph, partition, and weight scheme. Returns the
    graph, partition, and the realized (w_in, w_out) pair."""
    p = spec.params()
    kind = spec.network
    rule = spec.partition_rule
    if kind == "symmetric_two_block":
        a_in = _draw(p["a_in"], rng)
        a_out = _draw(p["a_out"], rng)
        graph, part = graphs.symmetric_two_block(int(p["n_per_block"]), a_in, a_out)
        return graph, part, float(a_in), float(a_out)
    if kind == "stochastic_two_block":
        graph, part = graphs.stochastic_two_block(
            int(p["n_per_block"]), _draw(p["p_in"], rng), _draw(p["p_out"], rng), rng
        )
    else:
        if kind == "erdos_renyi":
            graph = graphs.erdos_renyi(int(p["n"]), _draw(p["p"], rng), rng)
        elif kind == "watts_strogatz":
            graph = graphs.watts_strogatz_like(
                int(p["n"]),
                _draw(p["r"], rng, integer=True),
                _draw(p["k"], rng, integer=True),
                rng,
            )
        elif kind == "hyperbolic":
            graph = graphs.hyperbolic_rgg(
                int(p["n"]),
                _draw(p["gamma"], rng),
                _draw(p["temperature"], rng),
                _draw(p["mean_degree"], rng),
                rng,
            )
        elif kind == "complete":
            n = int(p["n"])
            w = p.get("weight", 1)
            graph = SocialGraph(
                n, ((i, j, w) for i in range(n) for j in range(i + 1, n))
            )
        else:
            graph = _load_cached(str(p["path"])).graph
        if rule == "auto":
            rule = "random" if kind == "edge_list" else "kl"
        part = (
            graphs.random_partition(graph.n, rng)
            if rule == "random"
            else graphs.kernighan_lin(graph)
        )
    w_in = _draw(spec.w_in, rng)
    w_out = _draw(spec.w_out, rng)
    if w_in != 1.0 or w_out != 1.0:
        graph = graphs.assign_weights(graph, part, w_in, w_out)
    return graph, part, float(w_in), float(w_out)


def run_trial(spec: ExperimentSpec, trial_index: int) -> RunRecord:
    """Execute one seeded trial: network, partition, weights, media weight,
    initial opinions, dynamics, and relaxed-consensus measurement."""
    seed = spec.base_seed ^ trial_index
    rng = random.Random(seed)
    graph, part, w_in, w_out = _build_network(spec, rng)
    hom = graphs.homophily(graph, part)
    h = float(hom.h) if hom.h is not None else math.nan
    a_out_star = float(hom.a_out_star)
    if spec.b is not None:
        b = float(spec.b)
    else:
        b = float(spec.b_tilde) * a_out_star
    b_tilde = b / a_out_star if a_out_star > 0 else math.nan
    grid = OpinionGrid(spec.delta, spec.lam)
    params = ModelParams(b)
    profile = sample_initial_opinions(spec.init, part, grid, rng)
    if spec.update == "sync":
        outcome, _ = dynamics.sync_run(
            profile, graph, params, grid, spec.max_steps, record=False
        )
    else:
        outcome, _ = dynamics.async_run(
            profile, graph, params, grid, rng, record=False
        )
        if outcome.kind == dynamics.STEP_LIMIT:
            raise RuntimeError(
                "asynchronous dynamics hit the safety cap; this cannot happen "
                "for improving-move dynamics and indicates an engine defect"
            )
    final = outcome.final_profile
    relaxed = relaxed_consensus(final, part, grid)
    consensus = outcome.kind == dynamics.CONVERGED and relaxed.consensus
    vals = [grid.float_of(m) for m in final]
    mean_all = sum(vals) / len(vals)
    var_all = sum((v - mean_all) ** 2 for v in vals) / len(vals)
    return RunRecord(
        trial=trial_index,
        seed=seed,
        n=graph.n,
        h=h,
        b=b,
        b_tilde=b_tilde,
        w_in=w_in,
        w_out=w_out,
        outcome=outcome.kind,
        steps=outcome.steps,
        consensus=consensus,
        consensus_value=grid.float_of(relaxed.projected_left) if consensus else None,
        mean_left=relaxed.mean_left,
        mean_right=relaxed.mean_right,
        final_variance=var_all,
    )


def _trial_worker(args: tuple[ExperimentSpec, int]) -> RunRecord:
    return run_trial(*args)


def run_spec(spec: ExperimentSpec, jobs: int = 1) -> list[RunRecord]:
    """All n_p trials of one spec, in trial order."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(
                pool.map(
                    _trial_worker,
                    ((spec, i) for i in range(spec.n_p)),
                    chunksize=max(1, spec.n_p // (4 * jobs)),
                )
            )
    return [run_trial(spec, i) for i in range(spec.n_p)]


def estimate_consensus_probability(records: Sequence[RunRecord]) -> tuple[float, float]:
    """Consensus probability m/n_p and its 95% half width
    2*sqrt(p_c(1-p_c)/n_p)."""
    if not records:
        raise ValueError("need at least one record")
    n_p = len(records)
    m = sum(1 for r in records if r.consensus)
    p_c = m / n_p
    return p_c, 2.0 * math.sqrt(p_c * (1.0 - p_c) / n_p)


@dataclass(frozen=True)
class SweepRow:
    """Aggregated CSV row for one sweep point. b, h, w_in, and w_out are
    means of the realized per-trial values; b_tilde is the spec target when
    one was set, otherwise the realized mean."""

    experiment_id: str
    network_model: str
    n: int
    delta: float
    lam: float
    w_in: float
    w_out: float
    b: float
    b_tilde: float
    h: float
    init_scheme: str
    update_mode: str
    n_p: int
    m_consensus: int
    p_c: float
    ci_half_width: float
    mean_steps: float
    mean_final_variance: float

    def values(self) -> tuple:
        return (
            self.experiment_id,
            self.network_model,
            self.n,
            self.delta,
            self.lam,
            self.w_in,
            self.w_out,
            self.b,
            self.b_tilde,
            self.h,
            self.init_scheme,
            self.update_mode,
            self.n_p,
            self.m_consensus,
            self.p_c,
            self.ci_half_width,
            self.mean_steps,
            self.mean_final_variance,
        )


def _finite_mean(values: list[float]) -> float:
    finite = [v for v in values if math.isfinite(v)]
    return sum(finite) / len(finite) if finite else math.nan


def summarize(spec: ExperimentSpec, records: Sequence[RunRecord]) -> SweepRow:
    p_c, half = estimate_consensus_probability(records)
    grid = OpinionGrid(spec.delta, spec.lam)
    return SweepRow(
        experiment_id=spec.experiment_id,
        network_model=spec.network,
        n=records[0].n,
        delta=float(grid.delta),
        lam=float(grid.lam),
        w_in=_finite_mean([r.w_in for r in records]),
        w_out=_finite_mean([r.w_out for r in records]),
        b=_finite_mean([r.b for r in records]),
        b_tilde=float(spec.b_tilde)
        if spec.b_tilde is not None
        else _finite_mean([r.b_tilde for r in records]),
        h=_finite_mean([r.h for r in records]),
        init_scheme=spec.init.label(),
        update_mode=spec.update,
        n_p=len(records),
        m_consensus=sum(1 for r in records if r.consensus),
        p_c=p_c,
        ci_half_width=half,
        mean_steps=sum(r.steps for r in records) / len(records),
        mean_final_variance=sum(r.final_variance for r in records) / len(records),
    )


def sweep(
    template: ExperimentSpec,
    axis: Sequence[Mapping[str, object]],
    jobs: int = 1,
) -> list[SweepRow]:
    """One aggregated row per axis point, in axis order. Each point is the
    template with that point's field overrides applied; its experiment id
    gains a '/index' suffix."""
    rows = []
    for idx, overrides in enumerate(axis):
        point = template.with_overrides(
            {"experiment_id": f"{template.experiment_id}/{idx}", **dict(overrides)}
        )
        rows.append(summarize(point, run_spec(point, jobs=jobs)))
    return rows


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Sequence[SweepRow], stream: IO[str]) -> None:
    """Emit the sweep schema: fixed header, comma separation, '.' decimals,
    deterministic row order."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(",".join(_cell(v) for v in row.values()) + "\n")
