import random
from fractions import Fraction

import pytest

from opdyn import dynamics
from opdyn.dynamics import (
    CONVERGED,
    CYCLE,
    async_run,
    async_step,
    best_response,
    improving_set,
    is_stable,
    scheduled_run,
    sync_run,
    sync_step,
)
from opdyn.graphs import symmetric_two_block
from opdyn.model import ModelParams, OpinionGrid, SocialGraph, make_profile, potential
from conftest import oracle_best_response, quiet_params, random_instance


def prop1():
    grid = OpinionGrid(Fraction(1, 2))
    graph = SocialGraph(2, [(0, 1, 10)])
    params = ModelParams(1, weight_precision_k=0)
    return graph, params, grid


def triangle():
    """Unit triangle, b = 1, delta = 1/2, start (-1, 1/2, 0)."""
    grid = OpinionGrid(Fraction(1, 2))
    graph = SocialGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    params = ModelParams(1, weight_precision_k=0)
    return graph, params, grid, make_profile([-1, "1/2", 0], grid)


class TestBestResponse:
    def test_prop1_flips_to_the_other_extreme(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        assert best_response(0, prof, graph, params, grid) == grid.index_of(1)
        assert best_response(1, prof, graph, params, grid) == grid.index_of(-1)

    def test_isolated_agent_follows_media(self):
        grid = OpinionGrid("1/2")
        graph = SocialGraph(1, [])
        assert best_response(0, (0,), graph, ModelParams(1), grid) == 0

    def test_two_block_rounds_to_extreme(self):
        # continuous minimizer -10/12 is nearest to -1 on the half grid
        grid = OpinionGrid("1/2")
        graph, _ = symmetric_two_block(2, 1, 1)
        params = ModelParams(10)
        prof = make_profile([-1, -1, 1, 1], grid)
        assert best_response(0, prof, graph, params, grid) == grid.index_of(-1)

    def test_matches_oracle_float_and_exact(self):
        rng = random.Random(42)
        for trial in range(200):
            graph, params, grid, prof = random_instance(rng, exact=trial % 2 == 0)
            for i in range(graph.n):
                got = best_response(i, prof, graph, params, grid)
                want = oracle_best_response(i, prof, graph, params, grid)
                assert got == want, (trial, i)

    def test_sandwich_around_continuous_minimizer(self):
        rng = random.Random(43)
        for _ in range(200):
            graph, params, grid, prof = random_instance(rng, exact=True)
            i = rng.randrange(graph.n)
            from opdyn.model import recommend

            s = recommend(prof[i], grid)
            den = params.b + graph.strength(i)
            if den == 0:
                continue
            num = params.b * s + sum(
                w * Fraction(prof[j], grid.inv_delta) for j, w in graph.adjacency[i]
            )
            mu = num / den
            got = Fraction(
                best_response(i, prof, graph, params, grid), grid.inv_delta
            )
            assert abs(got - mu) <= grid.delta / 2


class TestStability:
    def test_extreme_and_zero_consensus_stable(self):
        rng = random.Random(44)
        for _ in range(40):
            graph, params, grid, _ = random_instance(rng, n_max=8)
            for v in (-grid.inv_delta, 0, grid.inv_delta):
                prof = tuple([v] * graph.n)
                assert is_stable(prof, graph, params, grid)

    def test_extreme_consensus_stable_without_media(self):
        grid = OpinionGrid("1/4")
        graph = SocialGraph(3, [(0, 1, 1), (1, 2, 2)])
        params = quiet_params(0)
        assert is_stable((4, 4, 4), graph, params, grid)

    def test_prop1_not_stable(self):
        graph, params, grid = prop1()
        assert not is_stable(make_profile([-1, 1], grid), graph, params, grid)

    def test_improving_set_cases(self):
        graph, params, grid = prop1()
        assert improving_set(make_profile([-1, 1], grid), graph, params, grid) == {0, 1}
        assert improving_set(make_profile([1, 1], grid), graph, params, grid) == set()

    def test_improving_moves_strictly_lower_cost(self):
        from opdyn.model import agent_cost

        rng = random.Random(45)
        for _ in range(100):
            graph, params, grid, prof = random_instance(rng, n_max=8)
            for i in improving_set(prof, graph, params, grid):
                br = best_response(i, prof, graph, params, grid)
                assert agent_cost(i, br, prof, graph, params, grid) < agent_cost(
                    i, prof[i], prof, graph, params, grid
                )


class TestSyncDynamics:
    def test_prop1_round_swaps(self):
        graph, params, grid = prop1()
        assert sync_step(make_profile([-1, 1], grid), graph, params, grid) == make_profile(
            [1, -1], grid
        )

    def test_stable_profile_is_fixed_point(self):
        graph, params, grid = prop1()
        prof = make_profile([0, 0], grid)
        assert sync_step(prof, graph, params, grid) == prof

    def test_strong_coupling_freezes_two_block(self):
        grid = OpinionGrid("1/2")
        graph, _ = symmetric_two_block(2, 1, 1)
        params = ModelParams(10)
        prof = make_profile([-1, -1, 1, 1], grid)
        assert sync_step(prof, graph, params, grid) == prof

    def test_prop1_cycles_with_period_two(self):
        graph, params, grid = prop1()
        outcome, traj = sync_run(make_profile([-1, 1], grid), graph, params, grid, 50)
        assert outcome.kind == CYCLE
        assert outcome.cycle_period == 2
        assert len(traj.steps) == 3

    def test_prop1_alternation_matches_closed_form(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        for t in range(1, 21):
            prof = sync_step(prof, graph, params, grid)
            assert grid.float_of(prof[0]) == (-1.0) ** (t + 1)
            assert grid.float_of(prof[1]) == (-1.0) ** t

    def test_consensus_start_converges_in_zero_steps(self):
        graph, params, grid = prop1()
        outcome, _ = sync_run(make_profile([0, 0], grid), graph, params, grid, 10)
        assert outcome.kind == CONVERGED
        assert outcome.steps == 0


class TestAsyncDynamics:
    def test_stable_profile_has_no_move(self):
        graph, params, grid = prop1()
        assert async_step(make_profile([1, 1], grid), graph, params, grid, random.Random(0)) is None

    def test_uniform_mover_choice(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        hits = sum(
            async_step(prof, graph, params, grid, random.Random(seed))[0] == 0
            for seed in range(10_000)
        )
        assert abs(hits / 10_000 - 0.5) <= 0.02

    def test_singleton_improving_set_is_deterministic(self):
        grid = OpinionGrid("1/2")
        graph = SocialGraph(2, [(0, 1, 1)])
        params = ModelParams(1, weight_precision_k=0)
        prof = make_profile([0, "1/2"], grid)
        movers = {
            async_step(prof, graph, params, grid, random.Random(seed))[0]
            for seed in range(20)
            if async_step(prof, graph, params, grid, random.Random(seed))
        }
        assert len(movers) == 1

    def test_prop1_converges_asynchronously(self):
        graph, params, grid = prop1()
        for seed in range(10):
            outcome, _ = async_run(
                make_profile([-1, 1], grid), graph, params, grid, random.Random(seed)
            )
            assert outcome.kind == CONVERGED
            assert is_stable(outcome.final_profile, graph, params, grid)

    def test_consensus_start_needs_no_moves(self):
        graph, params, grid = prop1()
        outcome, _ = async_run(
            make_profile([1, 1], grid), graph, params, grid, random.Random(0)
        )
        assert outcome.steps == 0

    def test_order_dependence_on_triangle(self):
        # Oracle: breadth-first search over all improving-move sequences of
        # length <= 6 finds the reachable stable profiles.
        graph, params, grid, start = triangle()
        reachable = set()
        frontier = {start}
        for _ in range(6):
            nxt = set()
            for prof in frontier:
                movers = improving_set(prof, graph, params, grid)
                if not movers:
                    reachable.add(prof)
                    continue
                for i in movers:
                    new = list(prof)
                    new[i] = best_response(i, prof, graph, params, grid)
                    nxt.add(tuple(new))
            frontier = nxt
        for prof in frontier:
            if is_stable(prof, graph, params, grid):
                reachable.add(prof)
        assert len(reachable) >= 2

        finals = set()
        for seed in range(40):
            outcome, _ = async_run(start, graph, params, grid, random.Random(seed))
            assert outcome.kind == CONVERGED
            finals.add(outcome.final_profile)
        assert len(finals) >= 2
        assert finals <= reachable

    def test_identical_seeds_reproduce_trajectories(self):
        graph, params, grid, start = triangle()
        runs = []
        for _ in range(2):
            outcome, traj = async_run(start, graph, params, grid, random.Random(99))
            runs.append((outcome, [(s.mover, s.profile) for s in traj.steps]))
        assert runs[0] == runs[1]

    def test_snapshots_differ_only_at_the_mover(self):
        graph, params, grid, start = triangle()
        _, traj = async_run(start, graph, params, grid, random.Random(17))
        for prev, step in zip(traj.steps, traj.steps[1:]):
            diff = [
                i for i, (a, b) in enumerate(zip(prev.profile, step.profile)) if a != b
            ]
            assert diff == [step.mover]

    def test_potential_strictly_decreases(self):
        rng = random.Random(46)
        for _ in range(30):
            graph, params, grid, start = random_instance(rng, n_max=10)
            _, traj = async_run(start, graph, params, grid, random.Random(rng.random()))
            phis = [potential(s.profile, graph, params, grid) for s in traj.steps]
            assert all(a > b for a, b in zip(phis, phis[1:]))

    def test_tiny_step_cap_reports_the_defect(self):
        graph, params, grid = prop1()
        outcome, _ = async_run(
            make_profile([-1, 1], grid), graph, params, grid, random.Random(0),
            step_cap=0,
        )
        assert outcome.kind == dynamics.STEP_LIMIT


class TestScheduledRun:
    def test_empty_schedule_changes_nothing(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        outcome, traj = scheduled_run(prof, graph, params, grid, [])
        assert outcome.steps == 0
        assert outcome.final_profile == prof
        assert traj.skipped == []

    def test_single_entry_moves_that_agent(self):
        graph, params, grid = prop1()
        outcome, _ = scheduled_run(make_profile([-1, 1], grid), graph, params, grid, [0])
        assert outcome.final_profile == make_profile([1, 1], grid)

    def test_non_improving_entries_are_skipped(self):
        graph, params, grid = prop1()
        prof = make_profile([1, 1], grid)
        outcome, traj = scheduled_run(prof, graph, params, grid, [0, 1])
        assert outcome.steps == 0
        assert traj.skipped == [(0, 0), (1, 1)]

    def test_invalid_agent_id(self):
        graph, params, grid = prop1()
        with pytest.raises(IndexError):
            scheduled_run(make_profile([0, 0], grid), graph, params, grid, [2])


def test_trace_format(tmp_path):
    graph, params, grid = prop1()
    outcome, traj = sync_run(make_profile([-1, 1], grid), graph, params, grid, 10)
    out = tmp_path / "trace.csv"
    with open(out, "w") as fh:
        dynamics.write_trace(traj, fh, grid)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("0,init,40.0,-1.0,1.0")
    assert lines[1].startswith("1,ALL,")
