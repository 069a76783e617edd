import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

import oracle
from martinprice import (
    Derivative,
    PriceSystem,
    ZeroPriceLP,
    build_dual,
    build_game,
    estimate_r,
    to_standard_form,
)
from martinprice._simplex_core import OPTIMAL, solve_standard_form


def make_ps(prices, payoffs) -> PriceSystem:
    return PriceSystem(prices=prices, payoffs=payoffs)


COMPLETE = make_ps([1.0, 1.0], [[1, 1], [2, 0.5]])
THREE_STATE = make_ps([1.0, 1.0], [[1, 1, 1], [0, 1, 2]])
ARBITRAGE = make_ps([1.0, 0.5], [[1, 1], [2, 3]])


class TestStandardForm:
    def test_scaling_of_reference_market(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "max")
        assert lp.s_max == 2.0
        assert lp.d_max == 2.0
        assert lp.A.shape == (4, 2)
        np.testing.assert_allclose(lp.c, [0.5, 0.5, -0.5, -0.5])
        np.testing.assert_allclose(lp.objective, [-1.0, -0.25])

    def test_constant_payoff_objective(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[1.0, 1.0]), "max")
        np.testing.assert_allclose(lp.objective, [-1.0, -1.0])

    def test_min_sense_flips_objective(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "min")
        np.testing.assert_allclose(lp.objective, [1.0, 0.25])

    def test_single_event_market(self):
        ps = make_ps([1.0], [[1.0]])
        lp = to_standard_form(ps, Derivative(payoffs=[5.0]), "max")
        res = solve_standard_form(lp.A, lp.c, lp.objective)
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(-1.0, abs=1e-12)
        assert -res.objective * lp.d_max == pytest.approx(5.0)

    def test_zero_payoff_short_circuits(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[0.0, 0.0]), "max")
        assert isinstance(lp, ZeroPriceLP)
        assert lp.price == 0.0

    def test_negative_payoff_rejected(self):
        with pytest.raises(ValueError):
            to_standard_form(COMPLETE, Derivative(payoffs=[-1.0, 1.0]), "max")

    @given(st.integers(min_value=0, max_value=10_000))
    def test_all_coefficients_in_unit_box(self, seed):
        rng = np.random.default_rng(seed)
        prices, payoffs = oracle.dirichlet_market(
            rng, int(rng.integers(2, 5)), int(rng.integers(2, 9))
        )
        d = rng.uniform(0.0, 4.0, payoffs.shape[1])
        d[int(rng.integers(d.shape[0]))] = 4.0  # pin d_max away from 0
        lp = to_standard_form(make_ps(prices, payoffs), Derivative(payoffs=d), "max")
        assert np.max(np.abs(lp.A)) <= 1.0 + 1e-12
        assert np.max(np.abs(lp.c)) <= 1.0 + 1e-12
        assert np.max(np.abs(lp.objective)) <= 1.0 + 1e-12


def scipy_dual_optimum(dual):
    # min objective @ xi  s.t.  lhs xi >= rhs, xi >= 0
    return linprog(
        dual.objective,
        A_ub=-dual.lhs,
        b_ub=-dual.rhs,
        bounds=[(0, None)] * dual.objective.shape[0],
        method="highs",
    )


class TestDual:
    def test_strong_duality_on_complete_market(self):
        d = Derivative(payoffs=[2.0, 0.5])
        lp = to_standard_form(COMPLETE, d, "max")
        dual = build_dual(lp)
        res = scipy_dual_optimum(dual)
        assert res.status == 0
        # scaled dual optimum maps back through d_max
        assert res.fun * lp.d_max == pytest.approx(1.0, abs=1e-9)

    def test_arbitrage_primal_gives_unbounded_dual(self):
        lp = to_standard_form(ARBITRAGE, Derivative(payoffs=[1.0, 2.0]), "max")
        res = scipy_dual_optimum(build_dual(lp))
        assert res.status == 3  # unbounded below

    def test_dual_feasible_points_upper_bound_the_price(self):
        d = Derivative(payoffs=[0.0, 0.0, 1.0])
        lp = to_standard_form(THREE_STATE, d, "max")
        dual = build_dual(lp)
        res = scipy_dual_optimum(dual)
        assert res.status == 0
        assert res.fun * lp.d_max == pytest.approx(0.5, abs=1e-9)

    def test_min_form_rejected(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "min")
        with pytest.raises(ValueError):
            build_dual(lp)


class TestEstimateR:
    def test_complete_market_replication(self):
        # exact replication of (2, 0.5): zeta solves S^T zeta = D
        est = estimate_r(COMPLETE, Derivative(payoffs=[2.0, 0.5]))
        assert est.source == "dual"
        zeta = np.linalg.solve(COMPLETE.payoffs.T, [2.0, 0.5])
        assert est.value == pytest.approx(np.abs(zeta).sum(), abs=1e-9)

    def test_constant_payoff_bond_only(self):
        est = estimate_r(COMPLETE, Derivative(payoffs=[3.0, 3.0]))
        assert est.value == pytest.approx(3.0, abs=1e-9)

    def test_zero_payoff_floored_at_one(self):
        est = estimate_r(COMPLETE, Derivative(payoffs=[0.0, 0.0]))
        assert est.value == 1.0

    def test_fallback_on_unbounded_dual(self):
        est = estimate_r(ARBITRAGE, Derivative(payoffs=[1.0, 2.0]), fallback=7.0)
        assert est.value == 7.0
        assert est.source == "fallback"
        with pytest.raises(RuntimeError):
            estimate_r(ARBITRAGE, Derivative(payoffs=[1.0, 2.0]))


class TestGameEmbedding:
    def test_shape_for_one_risky_asset(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "max")
        emb = build_game(lp, alpha=0.5, r=2.0)
        assert emb.F.shape == (7, 4)
        assert emb.n_rows == 7 and emb.n_cols == 4

    def test_alpha_zero_clears_threshold_entry(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "max")
        emb = build_game(lp, alpha=0.0, r=1.0)
        np.testing.assert_allclose(emb.F[2, :2], lp.objective)
        assert emb.F[2, 2] == 0.0
        assert emb.F[2, 3] == 0.0

    def test_zero_objective_row_keeps_alpha(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "max")
        zeroed = type(lp)(
            A=lp.A,
            c=lp.c,
            objective=np.zeros_like(lp.objective),
            s_max=lp.s_max,
            d_max=lp.d_max,
            sense=lp.sense,
        )
        emb = build_game(zeroed, alpha=0.25, r=1.0)
        np.testing.assert_allclose(emb.F[2], [0.0, 0.0, 0.0, 0.25])

    def test_with_alpha_only_patches_one_entry(self):
        lp = to_standard_form(THREE_STATE, Derivative(payoffs=[0, 0, 1.0]), "max")
        emb = build_game(lp, alpha=0.5, r=1.0)
        patched = emb.with_alpha(0.75)
        assert patched.F[2, -1] == pytest.approx(0.75 / patched.R)
        diff = np.abs(patched.F - emb.F)
        diff[2, -1] = 0.0
        assert not diff.any()

    def test_entries_stay_in_unit_box(self):
        lp = to_standard_form(THREE_STATE, Derivative(payoffs=[0, 0, 1.0]), "max")
        emb = build_game(lp, alpha=1.0, r=3.0)
        assert np.max(np.abs(emb.F)) <= 1.0

    def test_invalid_arguments(self):
        lp = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "max")
        with pytest.raises(ValueError):
            build_game(lp, alpha=1.5, r=1.0)
        with pytest.raises(ValueError):
            build_game(lp, alpha=0.5, r=0.5)
        lp_min = to_standard_form(COMPLETE, Derivative(payoffs=[2.0, 0.5]), "min")
        with pytest.raises(ValueError):
            build_game(lp_min, alpha=0.5, r=1.0)
