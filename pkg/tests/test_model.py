import random
from fractions import Fraction

import pytest

from opdyn.model import (
    ModelParams,
    OpinionGrid,
    SocialGraph,
    agent_cost,
    make_profile,
    potential,
    potential_scaled,
    recommend,
)
from conftest import oracle_minimizer_set, quiet_params, random_instance


def prop1():
    """Two players, one edge of weight 10, b = 1, delta = 1/2."""
    grid = OpinionGrid(Fraction(1, 2))
    graph = SocialGraph(2, [(0, 1, 10)])
    params = ModelParams(1, weight_precision_k=0)
    return graph, params, grid


class TestOpinionGrid:
    def test_grid_values(self):
        g = OpinionGrid("1/4")
        assert g.inv_delta == 4
        assert g.size == 9
        assert [float(g.value_of(m)) for m in g.indices()] == [
            -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0
        ]

    @pytest.mark.parametrize("bad", ["0", "0.6", "2/3", "-1/4"])
    def test_delta_domain(self, bad):
        with pytest.raises(ValueError):
            OpinionGrid(bad)

    @pytest.mark.parametrize("bad_lam", [0, 1, -0.5, 1.5])
    def test_lambda_domain(self, bad_lam):
        with pytest.raises(ValueError):
            OpinionGrid("1/4", bad_lam)

    def test_effective_lambda_on_grid(self):
        assert OpinionGrid("1/4", "1/2").effective_lambda == Fraction(1, 2)

    def test_effective_lambda_off_grid(self):
        g = OpinionGrid("1/4", 0.45)
        assert g.effective_lambda == Fraction(1, 4)
        # no grid value lies in (effective_lambda, lambda]
        assert all(
            not (g.effective_lambda < g.value_of(m) <= g.lam) for m in g.indices()
        )

    def test_round_halfway_toward_zero(self):
        g = OpinionGrid("1/2")
        assert g.round_value(0.25) == 0
        assert g.round_value(-0.25) == 0
        assert g.round_value(0.75) == 1
        assert g.round_value(-0.75) == -1
        assert g.round_value(0.9) == 2

    def test_index_of_rejects_off_grid(self):
        with pytest.raises(ValueError):
            OpinionGrid("1/2").index_of(0.3)


class TestRecommend:
    def test_above_threshold(self):
        g = OpinionGrid("1/4", "1/2")
        assert recommend(g.index_of(0.75), g) == 1

    def test_zero_is_moderate(self):
        assert recommend(0, OpinionGrid("1/4")) == 0

    def test_boundary_breaks_moderate(self):
        g = OpinionGrid("1/4", "1/2")
        assert recommend(g.index_of(-0.5), g) == 0
        assert recommend(g.index_of(0.5), g) == 0

    @pytest.mark.parametrize("delta,lam", [("1/2", "1/2"), ("1/4", "1/2"), ("1/8", 0.3)])
    def test_odd_away_from_ties(self, delta, lam):
        g = OpinionGrid(delta, lam)
        for m in g.indices():
            if abs(m) != g.lam_index:
                assert recommend(-m, g) == -recommend(m, g)


class TestAgentCost:
    def test_prop1_extreme_target(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        assert agent_cost(0, grid.index_of(1), prof, graph, params, grid) == 4.0

    def test_all_zero_profile_costs_nothing(self):
        graph, params, grid = prop1()
        prof = make_profile([0, 0], grid)
        assert agent_cost(0, 0, prof, graph, params, grid) == 0.0

    def test_prop1_midpoint(self):
        graph, params, grid = prop1()
        prof = make_profile([-1, 1], grid)
        assert agent_cost(0, grid.index_of(0.5), prof, graph, params, grid) == 4.75

    def test_index_out_of_range(self):
        graph, params, grid = prop1()
        with pytest.raises(IndexError):
            agent_cost(2, 0, make_profile([0, 0], grid), graph, params, grid)

    def test_minimizers_adjacent(self):
        rng = random.Random(11)
        for _ in range(150):
            graph, params, grid, prof = random_instance(rng, n_max=6, exact=True)
            i = rng.randrange(graph.n)
            mins = oracle_minimizer_set(i, prof, graph, params, grid)
            if len(mins) > 1 and len(mins) < grid.size:
                assert len(mins) == 2 and mins[1] - mins[0] == 1


class TestPotential:
    def test_extreme_consensus_is_zero(self):
        graph, params, grid = prop1()
        assert potential(make_profile([1, 1], grid), graph, params, grid) == 0.0

    def test_prop1_value(self):
        graph, params, grid = prop1()
        assert potential(make_profile([-1, 1], grid), graph, params, grid) == 40.0

    def test_single_agent_media_term(self):
        grid = OpinionGrid("1/4")
        graph = SocialGraph(1, [])
        params = ModelParams(2)
        assert potential((grid.index_of(0.25),), graph, params, grid) == 0.125

    def test_length_mismatch(self):
        graph, params, grid = prop1()
        with pytest.raises(ValueError):
            potential((0,), graph, params, grid)

    def test_scaled_matches_float(self):
        rng = random.Random(5)
        for _ in range(50):
            graph, params, grid, prof = random_instance(rng, n_max=8, exact=True)
            scaled = potential_scaled(prof, graph, params, grid)
            real = potential(prof, graph, params, grid)
            assert scaled == pytest.approx(real * grid.inv_delta**2)

    def test_half_sum_identity(self):
        # potential = sum_i b(x_i - s)^2 + half the sum of per-agent discord
        rng = random.Random(6)
        for _ in range(50):
            graph, params, grid, prof = random_instance(rng, n_max=8)
            b = float(params.b)
            media = sum(
                b * (grid.float_of(m) - recommend(m, grid)) ** 2 for m in prof
            )
            discord_i = [
                sum(
                    float(w) * (grid.float_of(prof[i]) - grid.float_of(prof[j])) ** 2
                    for j, w in graph.adjacency[i]
                )
                for i in range(graph.n)
            ]
            assert potential(prof, graph, params, grid) == pytest.approx(
                media + 0.5 * sum(discord_i)
            )

    def test_single_move_changes_scaled_by_integer(self):
        rng = random.Random(7)
        for _ in range(50):
            graph, params, grid, prof = random_instance(rng, n_max=8, exact=True)
            i = rng.randrange(graph.n)
            before = potential_scaled(prof, graph, params, grid)
            moved = list(prof)
            moved[i] = rng.choice(list(grid.indices()))
            after = potential_scaled(tuple(moved), graph, params, grid)
            assert isinstance(after - before, int)


class TestSocialGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            SocialGraph(2, [(0, 0, 1)])

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            SocialGraph(2, [(0, 1, 0)])

    def test_rejects_duplicate_pair(self):
        with pytest.raises(ValueError):
            SocialGraph(2, [(0, 1, 1), (1, 0, 2)])

    def test_adjacency_mirrors_edges(self):
        g = SocialGraph(3, [(0, 1, 2), (1, 2, "1/2")])
        assert g.strength(1) == Fraction(5, 2)
        assert g.degree(0) == 1


class TestModelParams:
    def test_negative_b_rejected(self):
        with pytest.raises(ValueError):
            ModelParams(-1)

    def test_zero_b_warns(self):
        with pytest.warns(UserWarning):
            ModelParams(0)

    def test_precision_contract(self):
        with pytest.raises(ValueError):
            ModelParams(0.15, weight_precision_k=1)
        assert ModelParams(0.15, weight_precision_k=2).b == Fraction(3, 20)

    def test_scaled_potential_needs_precision(self):
        graph, _, grid = prop1()
        loose = ModelParams(1)
        with pytest.raises(ValueError):
            potential_scaled((0, 0), graph, loose, grid)

    def test_graph_weights_checked_against_precision(self):
        grid = OpinionGrid("1/2")
        graph = SocialGraph(2, [(0, 1, 0.25)])
        params = quiet_params(1, weight_precision_k=1)
        with pytest.raises(ValueError):
            potential_scaled((0, 0), graph, params, grid)
