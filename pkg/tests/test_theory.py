import random
from fractions import Fraction

import pytest

from opdyn import dynamics
from opdyn.graphs import symmetric_two_block
from opdyn.model import ModelParams, OpinionGrid, make_profile
from opdyn.theory import (
    NO_CONSENSUS,
    NON_EXTREME_OK,
    ONLY_EXTREME,
    ONLY_ZERO,
    UNCONSTRAINED,
    TwoBlockParams,
    async_step_bound,
    check_relations,
    classify,
    delta_to_zero_bound,
    interval_emptiness,
    best_response_target,
    thresholds,
    twoblock_stable,
    twoblock_sync_run,
)

G4 = OpinionGrid("1/4")
G2 = OpinionGrid("1/2")


class TestThresholds:
    def test_tau1_hand_value(self):
        assert thresholds(2, G4).tau1 == Fraction(11, 3)

    def test_tau4_root(self):
        g = G4
        h_root = Fraction(2) / g.delta + 1
        assert thresholds(h_root, g).tau4 == 0

    def test_tau2_without_homophily(self):
        assert thresholds(0, G2).tau2 == 3

    def test_tau_star_is_max(self):
        t = thresholds(0, G4)
        assert t.tau_star == max(t.tau1, t.tau2)

    def test_negative_h_rejected(self):
        with pytest.raises(ValueError):
            thresholds(-1, G4)

    def test_relations_hold_on_grid(self):
        for num in range(0, 201, 5):
            h = Fraction(num, 10)
            for delta in ("1/16", "1/8", "1/4"):
                assert all(check_relations(h, OpinionGrid(delta)))

    def test_interval_emptiness_examples(self):
        assert interval_emptiness(1, G4)
        assert interval_emptiness(Fraction(2) / G4.delta + 2, G4)
        for num in range(0, 81):
            assert interval_emptiness(Fraction(num, 2), G4)


class TestBestResponseTarget:
    def test_agreement_pulls_to_extreme(self):
        p = TwoBlockParams(3, 2, 1)
        assert best_response_target(1, 1, 1, p) == 1

    def test_hand_value(self):
        assert best_response_target(-1, -1, 1, TwoBlockParams(1, 1, 10)) == Fraction(-10, 12)

    def test_all_zero(self):
        assert best_response_target(0, 0, 0, TwoBlockParams(1, 1, 10)) == 0

    def test_rejects_bad_recommendation(self):
        with pytest.raises(ValueError):
            best_response_target(2, 0, 0, TwoBlockParams(1, 1, 1))


class TestTwoBlockRun:
    def test_zero_consensus_is_fixed(self):
        run = twoblock_sync_run(0, 0, TwoBlockParams(1, 1, 1), G4, 100)
        assert run.kind == "converged"
        assert run.steps == 0

    def test_strong_media_freezes_extremes(self):
        p = TwoBlockParams(1, 1, 10)
        run = twoblock_sync_run(-2, 2, p, G2, 100)
        assert run.kind == "converged"
        assert run.final == (-2, 2)
        assert all(l != r for l, r in run.states)

    def test_mirror_symmetry(self):
        p = TwoBlockParams(2, 1, 3)
        a = twoblock_sync_run(-3, 2, p, G4, 50)
        b = twoblock_sync_run(2, -3, p, G4, 50)
        assert [(r, l) for l, r in a.states] == list(b.states)

    def test_agrees_with_engine_on_concrete_graph(self):
        # a blockwise-constant profile on the realized two-block graph stays
        # blockwise constant and follows the two-scalar recursion exactly
        rng = random.Random(47)
        for _ in range(25):
            n_per_block = 5
            a_in = rng.choice([1, 2, 4])
            a_out = rng.choice([1, 2, 5])
            b = rng.choice([0.25, 1, 2.5, 8])
            graph, _ = symmetric_two_block(n_per_block, a_in, a_out)
            grid = rng.choice([G2, G4])
            params = ModelParams(b, weight_precision_k=2)
            p = TwoBlockParams(a_in, a_out, b)
            ml = rng.choice(list(grid.indices()))
            mr = rng.choice(list(grid.indices()))
            run = twoblock_sync_run(ml, mr, p, grid, 30)
            prof = tuple([ml] * n_per_block + [mr] * n_per_block)
            for state in run.states[1:]:
                prof = dynamics.sync_step(prof, graph, params, grid)
                assert set(prof[:n_per_block]) == {state[0]}
                assert set(prof[n_per_block:]) == {state[1]}


class TestTwoBlockStability:
    def test_zero_consensus_stable_with_slack(self):
        st = twoblock_stable(0, 0, TwoBlockParams(1, 1, 10), G2)
        assert st.stable and st.conditions_hold
        assert all(s > 0 for s in st.slacks)

    def test_extreme_consensus_always_stable(self):
        for b in (0.01, 1, 50):
            for h in (0.1, 1, 25):
                p = TwoBlockParams.from_ratios(h, b)
                assert twoblock_stable(G4.inv_delta, G4.inv_delta, p, G4).stable

    def test_low_consensus_dies_past_h_plus_one(self):
        p = TwoBlockParams.from_ratios(1, Fraction(21, 10))
        assert not twoblock_stable(1, 1, p, G4).stable

    def test_exact_stability_implies_conditions(self):
        rng = random.Random(48)
        for _ in range(300):
            grid = rng.choice([G2, G4])
            p = TwoBlockParams.from_ratios(
                Fraction(rng.randint(0, 80), 10) + Fraction(1, 100),
                Fraction(rng.randint(0, 120), 10),
            )
            ml = rng.choice(list(grid.indices()))
            mr = rng.choice(list(grid.indices()))
            st = twoblock_stable(ml, mr, p, grid)
            if st.stable:
                assert st.conditions_hold


class TestClassify:
    def test_extreme_divergent_high_media(self):
        regime = classify(-4, 4, TwoBlockParams.from_ratios(1, 10), G4)
        assert regime.kind == NO_CONSENSUS
        assert regime.b_interval[0] == 4  # tau1 at h=1, delta=1/4

    def test_high_homophily_kills_consensus_for_all_media(self):
        h = Fraction(2) / G4.delta + 1 / (1 - G4.effective_lambda)
        for bt in (Fraction(1, 10), 1, 100):
            regime = classify(-4, 1, TwoBlockParams.from_ratios(h, bt), G4)
            assert regime.kind == NO_CONSENSUS
            assert regime.b_interval == (None, None)

    def test_convergent_inside_bound_is_unconstrained(self):
        p = TwoBlockParams.from_ratios(1, Fraction(3, 2))
        regime = classify(G4.index_of(0.25), G4.index_of(0.5), p, G4)
        assert regime.kind == UNCONSTRAINED

    def test_convergent_beyond_bound_forces_extremes(self):
        p = TwoBlockParams.from_ratios(1, 5)
        regime = classify(G4.index_of(0.25), G4.index_of(0.5), p, G4)
        assert regime.kind == ONLY_EXTREME

    def test_moderate_divergent_high_media_only_zero(self):
        p = TwoBlockParams.from_ratios(1, 20)
        regime = classify(G4.index_of(-0.25), G4.index_of(0.5), p, G4)
        assert regime.kind == ONLY_ZERO

    def test_non_extreme_band(self):
        # h=0: tau2 = 2/delta - 1 = 7 at delta=1/4; any 0 < bt <= 7 with
        # bt > tau4 = -9 sits in the band unless the only-zero row fires first
        p = TwoBlockParams.from_ratios(Fraction(1, 100), 1)
        regime = classify(G4.index_of(-0.25), G4.index_of(0.25), p, G4)
        assert regime.kind == NON_EXTREME_OK

    def test_classifier_never_allows_forbidden_consensus(self):
        rng = random.Random(49)
        checked = 0
        for _ in range(400):
            grid = rng.choice([G2, G4, OpinionGrid("1/8")])
            p = TwoBlockParams.from_ratios(
                Fraction(rng.randint(1, 120), 10), Fraction(rng.randint(1, 150), 10)
            )
            ml = rng.choice([m for m in grid.indices() if m < 0])
            mr = rng.choice([m for m in grid.indices() if m > 0])
            regime = classify(ml, mr, p, grid)
            if regime.kind not in (NO_CONSENSUS, ONLY_ZERO):
                continue
            checked += 1
            run = twoblock_sync_run(ml, mr, p, grid, 500)
            for left, right in run.states:
                if regime.kind == NO_CONSENSUS:
                    assert left != right
                elif left == right:
                    assert left == 0
        assert checked >= 100


class TestDeltaToZero:
    def test_bound_at_first_positive_opinion(self):
        assert delta_to_zero_bound(1, 1, G4) == 2

    def test_bound_at_last_interior_opinion(self):
        assert delta_to_zero_bound(3, 1, G4) == 2

    def test_bound_shrinks_with_delta(self):
        bounds = [
            delta_to_zero_bound(OpinionGrid(d).index_of(0.25), 1, OpinionGrid(d))
            for d in ("1/4", "1/8", "1/16")
        ]
        assert bounds == sorted(bounds, reverse=True)
        assert bounds[0] == 2 and bounds[-1] == Fraction(2, 7)

    def test_rejects_extremes(self):
        for m in (-4, 0, 4):
            with pytest.raises(ValueError):
                delta_to_zero_bound(m, 1, G4)


class TestStepBound:
    def test_hand_value(self):
        assert async_step_bound(10, 1, 1, G2, 0) == 1760

    def test_precision_scales_linearly(self):
        assert async_step_bound(10, 1, 1, G2, 1) == 17600

    def test_degenerate_instance(self):
        assert async_step_bound(1, 0, 0, G2, 0) == 0
