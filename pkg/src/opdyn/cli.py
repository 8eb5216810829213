"""Operator entry point.

Subcommands: simulate | theory | sweep | gadget | partition | gen. Sweeps
write the harness CSV schema; traces are line-oriented
"step,mover,phi,opinions..." records, with mover "init" on the first line and
"ALL" for whole synchronous rounds. Identical configs and seeds produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import config as cfgmod
from . import dynamics, gadgets, graphs, harness, theory
from .model import ModelParams, OpinionGrid, make_profile


def _load_configs(args) -> list[cfgmod.RunConfig]:
    paths = list(args.config or [])
    for name in args.preset or []:
        paths.extend(cfgmod.preset_paths(name))
    if not paths:
        raise cfgmod.ConfigError("give --config and/or --preset")
    return [cfgmod.parse_config(p) for p in paths]


def _apply_seed(cfg: cfgmod.RunConfig, seed: int | None) -> cfgmod.RunConfig:
    if seed is None:
        return cfg
    return cfgmod.RunConfig(
        cfg.spec.with_overrides({"base_seed": seed}), cfg.axis, cfg.init_values
    )


def cmd_simulate(args) -> int:
    cfgs = _load_configs(args)
    if len(cfgs) != 1:
        raise cfgmod.ConfigError("simulate takes exactly one config")
    cfg = _apply_seed(cfgs[0], args.seed)
    spec = cfg.spec
    rng = random.Random(spec.base_seed)
    graph, part, _, _ = harness._build_network(spec, rng)
    grid = OpinionGrid(spec.delta, spec.lam)
    hom = graphs.homophily(graph, part)
    b = spec.b if spec.b is not None else float(spec.b_tilde) * float(hom.a_out_star)
    params = ModelParams(b)
    if cfg.init_values is not None:
        if len(cfg.init_values) != graph.n:
            raise cfgmod.ConfigError(
                f"init values count {len(cfg.init_values)} != {graph.n} agents"
            )
        profile = make_profile(cfg.init_values, grid)
    else:
        profile = harness.sample_initial_opinions(spec.init, part, grid, rng)
    if spec.update == "sync":
        outcome, traj = dynamics.sync_run(profile, graph, params, grid, spec.max_steps)
    else:
        outcome, traj = dynamics.async_run(profile, graph, params, grid, rng)
    relaxed = harness.relaxed_consensus(outcome.final_profile, part, grid)
    print(f"outcome: {outcome.kind}")
    print(f"steps: {outcome.steps}")
    if outcome.cycle_period is not None:
        print(f"cycle period: {outcome.cycle_period}")
    print(f"final potential: {traj.steps[-1].phi!r}")
    print(f"left mean: {relaxed.mean_left!r}  right mean: {relaxed.mean_right!r}")
    print(f"relaxed consensus: {'yes' if relaxed.consensus else 'no'}")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            dynamics.write_trace(traj, fh, grid)
        print(f"trace written to {args.trace}", file=sys.stderr)
    return 0


def cmd_theory(args) -> int:
    grid = OpinionGrid(Fraction(args.delta), Fraction(args.lam))
    h = Fraction(args.h)
    t = theory.thresholds(h, grid)
    for name, val in (
        ("tau1", t.tau1),
        ("tau2", t.tau2),
        ("tau3", t.tau3),
        ("tau4", t.tau4),
        ("tau5", t.tau5),
        ("tau*", t.tau_star),
    ):
        print(f"{name} = {val} = {float(val)!r}")
    rel = theory.check_relations(h, grid)
    print(
        "relations: tau1>tau4-bound %s, tau2<tau4-for-large-h %s, tau3<tau5 %s, "
        "tau5<0-when-tau4>0 %s"
        % rel
    )
    print(f"interval emptiness holds: {theory.interval_emptiness(h, grid)}")
    if args.b_tilde is not None:
        if args.x_left is None or args.x_right is None:
            raise cfgmod.ConfigError("--b-tilde needs --x-left and --x-right")
        ml = grid.round_value(Fraction(args.x_left))
        mr = grid.round_value(Fraction(args.x_right))
        p = theory.TwoBlockParams.from_ratios(h, Fraction(args.b_tilde))
        regime = theory.classify(ml, mr, p, grid)
        lo = "0" if regime.b_interval[0] is None else str(regime.b_interval[0])
        hi = "inf" if regime.b_interval[1] is None else str(regime.b_interval[1])
        print(f"regime: {regime.kind}")
        print(f"case: {regime.applied_case}")
        print(f"fired interval: ({lo}, {hi}]")
        print(f"non-extreme consensus h bound: {float(regime.nonextreme_h_bound)!r}")
    return 0


def cmd_sweep(args) -> int:
    cfgs = [_apply_seed(c, args.seed) for c in _load_configs(args)]
    rows = []
    for cfg in cfgs:
        spec = cfg.spec
        axis = cfg.axis if cfg.axis is not None else [{}]
        for idx, overrides in enumerate(axis):
            point = spec.with_overrides(
                {"experiment_id": f"{spec.experiment_id}/{idx}", **overrides}
            )
            records = harness.run_spec(point, jobs=args.jobs)
            rows.append(harness.summarize(point, records))
            print(
                f"{point.experiment_id}: point {idx + 1}/{len(axis)} done "
                f"(p_c={rows[-1].p_c:.3f})",
                file=sys.stderr,
            )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        harness.write_csv(rows, fh)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_gadget(args) -> int:
    if not 1 <= args.n <= 20:
        raise cfgmod.ConfigError("gadget count must be in 1..20")
    chain = gadgets.gadget_chain(
        args.n, Fraction(args.eps_ratio), Fraction(args.eps_prime_fraction)
    )
    report = gadgets.verify_schedule(chain)
    want = gadgets.expected_moves(args.n)
    print(f"gadgets: {args.n}")
    print(f"players: {chain.graph.n}")
    print(f"moves: {report.moves} (expected {want})")
    print(f"potential: {report.phi_trace[0]} -> {report.phi_trace[-1]} (scaled units)")
    ok = report.ok and report.moves == want
    print(f"verification: {'PASS' if ok else 'FAIL'}")
    for failure in report.failures[:20]:
        print(f"  {failure}", file=sys.stderr)
    if args.trace:
        outcome, traj = dynamics.scheduled_run(
            gadgets.initial_profile(chain),
            chain.graph,
            chain.params,
            chain.grid,
            gadgets.exponential_schedule(chain),
        )
        with open(args.trace, "w", encoding="utf-8") as fh:
            dynamics.write_trace(traj, fh, chain.grid)
    return 0 if ok else 1


def cmd_partition(args) -> int:
    loaded = graphs.load_edge_list(args.edge_list)
    part = graphs.kernighan_lin(loaded.graph)
    hom = graphs.homophily(loaded.graph, part)
    cut = sum(
        float(w)
        for i, j, w in loaded.graph.edges
        if part.side[i] != part.side[j]
    )
    lines = [
        f"{loaded.original_ids[i]} {side}\n" for i, side in enumerate(part.side)
    ]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
    else:
        sys.stdout.writelines(lines)
    h_part = f"h={float(hom.h)!r}" if hom.h is not None else "h=undefined"
    print(
        f"n={loaded.graph.n} edges={loaded.graph.edge_count} "
        f"cut_weight={cut!r} a_in*={float(hom.a_in_star)!r} "
        f"a_out*={float(hom.a_out_star)!r} {h_part}",
        file=sys.stderr,
    )
    return 0


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    part = None
    if args.model == "symmetric_two_block":
        graph, part = graphs.symmetric_two_block(args.n_per_block, args.a_in, args.a_out)
    elif args.model == "stochastic_two_block":
        graph, part = graphs.stochastic_two_block(args.n_per_block, args.p_in, args.p_out, rng)
    elif args.model == "erdos_renyi":
        graph = graphs.erdos_renyi(args.n, args.p, rng)
    elif args.model == "watts_strogatz":
        graph = graphs.watts_strogatz_like(args.n, args.r, args.k, rng)
    elif args.model == "hyperbolic":
        graph = graphs.hyperbolic_rgg(args.n, args.gamma, args.temperature, args.mean_degree, rng)
    else:
        raise cfgmod.ConfigError(f"unknown model {args.model!r}")
    with open(args.out, "w", encoding="utf-8") as fh:
        graphs.write_edge_list(graph, fh, weighted=args.weighted)
    if args.partition_out:
        if part is None:
            part = graphs.kernighan_lin(graph)
        with open(args.partition_out, "w", encoding="utf-8") as fh:
            graphs.write_partition(part, fh)
    print(f"wrote {graph.edge_count} edges over {graph.n} nodes to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opdyn",
        description="Discrete opinion dynamics under media recommendations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one dynamics instance")
    sim.add_argument("--config", action="append", help="INI config path")
    sim.add_argument("--preset", action="append", help="bundled preset name")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--trace", help="write the trajectory to this file")
    sim.set_defaults(func=cmd_simulate)

    th = sub.add_parser("theory", help="threshold table and consensus regime")
    th.add_argument("h", help="homophily ratio (number or fraction)")
    th.add_argument("delta", help="grid step, e.g. 1/4")
    th.add_argument("lam", nargs="?", default="1/2", help="threshold lambda")
    th.add_argument("--x-left", help="initial left-block opinion")
    th.add_argument("--x-right", help="initial right-block opinion")
    th.add_argument("--b-tilde", help="relative media influence")
    th.set_defaults(func=cmd_theory)

    sw = sub.add_parser("sweep", help="run sweep configs and write the CSV")
    sw.add_argument("--config", action="append")
    sw.add_argument("--preset", action="append")
    sw.add_argument("--out", required=True)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--seed", type=int, default=None)
    sw.set_defaults(func=cmd_sweep)

    ga = sub.add_parser("gadget", help="build and verify the exponential chain")
    ga.add_argument("n", type=int)
    ga.add_argument("--eps-ratio", default="10")
    ga.add_argument("--eps-prime-fraction", default="1/2")
    ga.add_argument("--trace")
    ga.set_defaults(func=cmd_gadget)

    pa = sub.add_parser("partition", help="bipartition an edge list")
    pa.add_argument("edge_list")
    pa.add_argument("--out")
    pa.set_defaults(func=cmd_partition)

    ge = sub.add_parser("gen", help="generate a network edge list")
    ge.add_argument("--model", required=True)
    ge.add_argument("--out", required=True)
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--n", type=int)
    ge.add_argument("--p", type=float)
    ge.add_argument("--n-per-block", type=int)
    ge.add_argument("--p-in", type=float)
    ge.add_argument("--p-out", type=float)
    ge.add_argument("--a-in", type=float)
    ge.add_argument("--a-out", type=float)
    ge.add_argument("--r", type=int)
    ge.add_argument("--k", type=int)
    ge.add_argument("--gamma", type=float, default=2.5)
    ge.add_argument("--temperature", type=float, default=0.6)
    ge.add_argument("--mean-degree", type=float)
    ge.add_argument("--weighted", action="store_true")
    ge.add_argument("--partition-out")
    ge.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
