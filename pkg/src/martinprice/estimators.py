"""Estimator-style wrappers: fit a market once, price payoff batches.

fit(X) ingests a market (a PriceSystem, a {"prices", "payoffs"} mapping,
or a (prices, payoffs) pair) and validates it; predict(D) prices one or
more payoff vectors against the fitted market. Hyperparameters follow
the scikit-learn constructor/get_params convention so the pricers drop
into pipelines and grid searches.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from sklearn.base import BaseEstimator

from .market import (
    ArbitrageCertificate,
    Derivative,
    PriceSystem,
    detect_arbitrage,
    validate_price_system,
)
from .pseudoinverse import NotLeastSquaresMarketError, pinv_solve
from .simplex import solve
from .zsg import InfeasibleMarketError, price_absolute_batch


def _coerce_price_system(X) -> PriceSystem:
    if isinstance(X, PriceSystem):
        return X
    if isinstance(X, dict):
        try:
            return PriceSystem(
                prices=np.asarray(X["prices"], dtype=np.float64),
                payoffs=np.asarray(X["payoffs"], dtype=np.float64),
            )
        except KeyError as exc:
            raise TypeError(f"market mapping missing key {exc}") from None
    if isinstance(X, (tuple, list)) and len(X) == 2:
        prices, payoffs = X
        return PriceSystem(
            prices=np.asarray(prices, dtype=np.float64),
            payoffs=np.asarray(payoffs, dtype=np.float64),
        )
    raise TypeError(
        "expected a PriceSystem, a {'prices', 'payoffs'} mapping, "
        f"or a (prices, payoffs) pair, got {type(X).__name__}"
    )


def _coerce_payoff_rows(D, n_events: int) -> NDArray[np.float64]:
    if isinstance(D, Derivative):
        rows = D.payoffs[None, :]
    elif isinstance(D, (list, tuple)) and D and isinstance(D[0], Derivative):
        rows = np.vstack([d.payoffs for d in D])
    else:
        rows = np.atleast_2d(np.asarray(D, dtype=np.float64))
    if rows.ndim != 2 or rows.shape[1] != n_events:
        raise ValueError(
            f"payoff rows must have shape (n, {n_events}), got {rows.shape}"
        )
    return rows


class _MarketFitMixin:
    def _fit_market(self, X) -> PriceSystem:
        ps = _coerce_price_system(X)
        problems = validate_price_system(ps)
        if problems:
            raise ValueError("invalid market: " + "; ".join(problems))
        self.price_system_ = ps
        self.n_assets_ = ps.n_assets
        self.n_events_ = ps.n_events
        return ps


class SimplexPricer(_MarketFitMixin, BaseEstimator):
    """Exact one-bound pricing by the revised simplex method.

    Raises InfeasibleMarketError at fit time when the market admits
    arbitrage (there is no price interval to report).
    """

    def __init__(self, sense: str = "max", rule: str = "bland"):
        self.sense = sense
        self.rule = rule

    def fit(self, X, y=None):
        ps = self._fit_market(X)
        verdict = detect_arbitrage(ps)
        if isinstance(verdict, ArbitrageCertificate):
            raise InfeasibleMarketError(
                "market admits arbitrage; no price interval exists",
                certificate=verdict,
            )
        self.measure_ = verdict
        return self

    def predict(self, D) -> NDArray[np.float64]:
        rows = _coerce_payoff_rows(D, self.n_events_)
        out = np.empty(rows.shape[0])
        for idx, row in enumerate(rows):
            sol = solve(
                self.price_system_,
                Derivative(payoffs=row),
                self.sense,
                rule=self.rule,
            )
            out[idx] = sol.objective
        return out


class ZsgPricer(_MarketFitMixin, BaseEstimator):
    """Sampling-based one-bound pricing via the matrix-game solver.

    The default iteration and sample caps target interactive latency;
    set them to None to run the full worst-case budgets.
    """

    def __init__(
        self,
        sense: str = "max",
        eps: float = 0.05,
        delta: float = 0.1,
        seed: int = 0,
        t_max: int | None = 5_000_000,
        sample_max: int | None = 100_000,
    ):
        self.sense = sense
        self.eps = eps
        self.delta = delta
        self.seed = seed
        self.t_max = t_max
        self.sample_max = sample_max

    def fit(self, X, y=None):
        ps = self._fit_market(X)
        verdict = detect_arbitrage(ps)
        if isinstance(verdict, ArbitrageCertificate):
            raise InfeasibleMarketError(
                "market admits arbitrage; no price interval exists",
                certificate=verdict,
            )
        self.measure_ = verdict
        return self

    def predict(self, D) -> NDArray[np.float64]:
        rows = _coerce_payoff_rows(D, self.n_events_)
        pairs = [
            (self.price_system_, Derivative(payoffs=row)) for row in rows
        ]
        results = price_absolute_batch(
            pairs,
            sense=self.sense,
            eps=self.eps,
            delta=self.delta,
            seeds=[self.seed] * len(pairs),
            t_max=self.t_max,
            sample_max=self.sample_max,
            check_arbitrage=False,
        )
        return np.array([r.price for r in results])


class PinvPricer(_MarketFitMixin, BaseEstimator):
    """Single-price pseudoinverse pricing on least-squares markets.

    fit raises NotLeastSquaresMarketError (carrying the diagnostic
    report) when the minimum-norm solution is not a valid measure.
    """

    def __init__(
        self,
        tol_rank: float = 1e-12,
        tol_pos: float = 1e-9,
        residual_tol: float = 1e-7,
    ):
        self.tol_rank = tol_rank
        self.tol_pos = tol_pos
        self.residual_tol = residual_tol

    def fit(self, X, y=None):
        ps = self._fit_market(X)
        report = pinv_solve(
            ps,
            tol_rank=self.tol_rank,
            tol_pos=self.tol_pos,
            residual_tol=self.residual_tol,
            compute_distance=False,
        )
        if not report.is_least_squares_market:
            raise NotLeastSquaresMarketError(
                "not a least-squares market: "
                f"residual={report.residual:.3e}, min entry={report.min_entry:.3e}",
                report,
            )
        self.report_ = report
        self.q_plus_ = report.q_plus
        return self

    def predict(self, D) -> NDArray[np.float64]:
        rows = _coerce_payoff_rows(D, self.n_events_)
        return rows @ self.q_plus_
