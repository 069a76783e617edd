import math

import numpy as np
import pytest

import oracle
from martinprice import (
    BsmSpec,
    Derivative,
    analytic_price,
    build,
    build_rn_lp,
    call_payoff,
    detect_arbitrage,
    girsanov_rn,
    put_payoff,
    rn_price_interval,
)
from martinprice.market import MartingaleMeasure


BASE = build(BsmSpec(pi=10.0, mu=1.0, sigma=1.0, k0=50))
DRIFTLESS = build(BsmSpec(pi=10.0, mu=0.0, sigma=1.0, k0=50))
SMALL = build(BsmSpec(pi=10.0, mu=0.0, sigma=1.0, k0=20))


class TestSpecValidation:
    def test_defaults(self):
        spec = BsmSpec()
        assert spec.n_events == 101
        assert spec.half_sigma_sign == "-"

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(pi=0.0),
            dict(pi=-1.0),
            dict(sigma=0.0),
            dict(k0=0),
            dict(half_sigma_sign="x"),
            dict(sigma=200.0),  # overflow guard
        ],
    )
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(ValueError):
            BsmSpec(**kwargs)


class TestBuild:
    def test_grid_endpoints(self):
        assert BASE.grid_b[-1] == pytest.approx(6.0)
        assert BASE.grid_b[0] == pytest.approx(-6.0)
        assert BASE.grid_b[50] == 0.0

    def test_center_payoff_reference_value(self):
        # spot * exp(mu - sigma^2/2) at the grid center
        assert BASE.price_system.payoffs[1, 50] == pytest.approx(
            10.0 * math.exp(0.5), abs=1e-4
        )

    def test_weights_form_a_symmetric_distribution(self):
        p = BASE.p
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert p.min() > 0.0
        assert np.argmax(p) == 50
        np.testing.assert_allclose(p, p[::-1], atol=1e-15)

    def test_market_rows(self):
        ps = BASE.price_system
        assert ps.n_assets == 2
        assert ps.n_events == 101
        np.testing.assert_allclose(ps.payoffs[0], 1.0)
        np.testing.assert_allclose(ps.prices, [1.0, 10.0])

    def test_sign_convention_flag_changes_payoffs(self):
        plus = build(BsmSpec(pi=10.0, mu=1.0, sigma=1.0, k0=50, half_sigma_sign="+"))
        ratio = plus.price_system.payoffs[1] / BASE.price_system.payoffs[1]
        np.testing.assert_allclose(ratio, math.exp(1.0), atol=1e-9)

    def test_generated_market_is_arbitrage_free(self):
        verdict = detect_arbitrage(SMALL.price_system)
        assert isinstance(verdict, MartingaleMeasure)


class TestPayoffs:
    def test_call_at_center(self):
        d = call_payoff(BASE, 10.0)
        assert d.payoffs[50] == pytest.approx(10.0 * math.exp(0.5) - 10.0, abs=1e-4)
        assert d.label == "call@10"

    def test_zero_strike_call_is_the_asset(self):
        d = call_payoff(BASE, 0.0)
        np.testing.assert_allclose(d.payoffs, BASE.price_system.payoffs[1])

    def test_far_strike_call_vanishes(self):
        d = call_payoff(BASE, 1e12)
        assert not d.payoffs.any()

    def test_put_call_decomposition(self):
        strike = 12.0
        call = call_payoff(BASE, strike).payoffs
        put = put_payoff(BASE, strike).payoffs
        s2 = BASE.price_system.payoffs[1]
        np.testing.assert_allclose(call - put, s2 - strike, atol=1e-9)

    def test_negative_strike_rejected(self):
        with pytest.raises(ValueError):
            call_payoff(BASE, -1.0)


class TestGirsanov:
    def test_zero_theta_is_identity(self):
        x = girsanov_rn(BASE, theta=0.0)
        np.testing.assert_allclose(x, 1.0)

    def test_center_value(self):
        x = girsanov_rn(BASE)
        theta = BASE.theta
        assert x[50] == pytest.approx(math.exp(-0.5 * theta**2))

    def test_finite_difference_slope(self):
        x = girsanov_rn(BASE)
        theta = BASE.theta
        delta = BASE.grid_b[1] - BASE.grid_b[0]
        slope = (x[2:] - x[:-2]) / (2.0 * delta)
        np.testing.assert_allclose(slope, -theta * x[1:-1], rtol=delta**2 * 2)

    def test_reweighting_reprices_the_asset(self):
        x = girsanov_rn(BASE)
        q = BASE.p * x
        repriced = BASE.price_system.payoffs @ q
        np.testing.assert_allclose(repriced, BASE.price_system.prices, atol=1e-6)


class TestAnalyticPrice:
    def test_closed_form_matches_independent_formulas(self):
        ref = analytic_price(BASE, "call", 10.0)
        assert ref["closed_form"] == pytest.approx(
            oracle.closed_call(10.0, 1.0, 10.0), abs=1e-12
        )
        assert ref["closed_form"] == pytest.approx(
            oracle.riemann_option(10.0, 1.0, 10.0, "call"), abs=1e-8
        )
        assert ref["closed_form"] == pytest.approx(3.8292, abs=1e-4)

    def test_put_closed_form(self):
        ref = analytic_price(BASE, "put", 12.0)
        assert ref["closed_form"] == pytest.approx(
            oracle.closed_put(10.0, 1.0, 12.0), abs=1e-12
        )

    def test_discrete_converges_to_closed(self):
        ref = analytic_price(BASE, "call", 10.0)
        assert ref["discrete"] == pytest.approx(ref["closed_form"], rel=5e-3)

    def test_drift_invariance_of_discrete_price(self):
        prices = [
            analytic_price(build(BsmSpec(pi=10.0, mu=mu, sigma=1.0, k0=50)), "call", 10.0)["discrete"]
            for mu in (0.0, 0.5, 1.0)
        ]
        assert max(prices) - min(prices) <= 1e-10

    def test_zero_strike_call_prices_at_spot(self):
        ref = analytic_price(BASE, "call", 0.0)
        assert ref["closed_form"] == pytest.approx(10.0, abs=1e-12)
        assert ref["discrete"] == pytest.approx(10.0, rel=1e-2)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            analytic_price(BASE, "straddle", 10.0)


class TestRnLp:
    def test_unregularized_structure(self):
        lp = build_rn_lp(SMALL, call_payoff(SMALL, 10.0))
        assert lp.g_ub is None
        assert lp.a_eq.shape == (2, 41)
        np.testing.assert_allclose(lp.a_eq[0], SMALL.p)

    def test_regularization_row_count(self):
        lp = build_rn_lp(SMALL, call_payoff(SMALL, 10.0), eta=0.5)
        assert lp.g_ub.shape == (2 * 40, 41)
        assert not lp.h_ub.any()

    def test_regularization_rows_encode_the_band(self):
        lp = build_rn_lp(SMALL, call_payoff(SMALL, 10.0), eta=0.5)
        x_flat = np.ones(41)
        assert np.all(lp.g_ub @ x_flat <= 1e-12)  # constant curve always allowed
        x_steep = np.ones(41)
        x_steep[5] = 2.0
        assert np.any(lp.g_ub @ x_steep > 0.0)

    def test_nonpositive_eta_rejected(self):
        with pytest.raises(ValueError):
            build_rn_lp(SMALL, call_payoff(SMALL, 10.0), eta=0.0)


class TestRnPriceInterval:
    def test_containment_of_analytic_price(self):
        d = call_payoff(SMALL, 10.0)
        interval = rn_price_interval(SMALL, d)
        ref = analytic_price(SMALL, "call", 10.0)["discrete"]
        assert interval.status == "optimal"
        assert interval.min_price <= ref <= interval.max_price

    def test_recovered_measure_sums_to_one(self):
        d = call_payoff(SMALL, 10.0)
        interval = rn_price_interval(SMALL, d, eta=0.5)
        for x in (interval.x_min, interval.x_max):
            q = SMALL.p * x
            assert q.sum() == pytest.approx(1.0, abs=1e-9)
            assert q.min() >= -1e-12

    def test_tighter_band_nests_the_interval(self):
        d = call_payoff(SMALL, 10.0)
        wide = rn_price_interval(SMALL, d, eta=10.0)
        narrow = rn_price_interval(SMALL, d, eta=0.2)
        assert narrow.min_price >= wide.min_price - 1e-9
        assert narrow.max_price <= wide.max_price + 1e-9
        assert narrow.width <= wide.width + 1e-9

    def test_drifted_market_with_tight_band_is_infeasible(self):
        # the band must admit the drift's per-step measure-change ratio
        # exp(theta * grid step) - 1, about 0.127 on this grid
        m = BASE
        d = call_payoff(m, 10.0)
        tight = rn_price_interval(m, d, eta=0.1)
        assert tight.status == "infeasible"
        assert math.isnan(tight.min_price)
        loose = rn_price_interval(m, d, eta=0.13)
        assert loose.status == "optimal"
