"""Single-period market model: price systems, derivatives, martingale
measures, arbitrage certificates, and the detection routine that returns
exactly one of the latter two.

A price system pairs today's asset prices with a payoff matrix over a
finite event space. Row 0 is the safe asset: price 1, payoff 1 in every
event. A martingale measure is a nonnegative event weighting q with
S q = Pi; an arbitrage certificate is a portfolio with non-positive
present value whose payoff is nonnegative everywhere and positive
somewhere. Exactly one of the two exists, and ``detect_arbitrage``
returns whichever does.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.typing import NDArray

from . import _simplex_core as core

DEFAULT_FEASIBILITY_TOL = 1e-7
DEFAULT_WEIGHT_TOL = 1e-9


class MarketFormatError(ValueError):
    """Malformed or out-of-contract market input."""


def _as_float_array(values, name: str) -> NDArray[np.float64]:
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MarketFormatError(f"{name} is not numeric: {exc}") from exc
    return arr


@dataclass(frozen=True)
class PriceSystem:
    """Current prices (N+1,) and the payoff matrix (N+1, K)."""

    prices: NDArray[np.float64]
    payoffs: NDArray[np.float64]

    def __post_init__(self):
        prices = np.array(self.prices, dtype=np.float64).ravel()
        payoffs = np.array(self.payoffs, dtype=np.float64, ndmin=2)
        if payoffs.ndim != 2:
            raise ValueError("payoffs must be a 2-d matrix")
        if prices.shape[0] != payoffs.shape[0]:
            raise ValueError(
                f"{prices.shape[0]} prices for {payoffs.shape[0]} payoff rows"
            )
        prices.flags.writeable = False
        payoffs.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "payoffs", payoffs)

    @property
    def n_assets(self) -> int:
        """Number of assets including the safe one (N+1)."""
        return self.prices.shape[0]

    @property
    def n_risky(self) -> int:
        return self.n_assets - 1

    @property
    def n_events(self) -> int:
        return self.payoffs.shape[1]

    def __repr__(self) -> str:
        return f"PriceSystem(n_assets={self.n_assets}, n_events={self.n_events})"


@dataclass(frozen=True)
class Derivative:
    """A payoff vector over the event space, nonnegative by convention."""

    payoffs: NDArray[np.float64]
    label: str | None = None

    def __post_init__(self):
        payoffs = np.array(self.payoffs, dtype=np.float64).ravel()
        payoffs.flags.writeable = False
        object.__setattr__(self, "payoffs", payoffs)

    @property
    def d_max(self) -> float:
        return float(np.max(self.payoffs)) if self.payoffs.size else 0.0

    @property
    def n_events(self) -> int:
        return self.payoffs.shape[0]


def validate_price_system(ps: PriceSystem, *, tol: float = 1e-9) -> list[str]:
    """Return every violated price-system invariant, empty when clean."""
    problems: list[str] = []
    if ps.n_events < 1:
        problems.append("empty event space")
    if not np.all(np.isfinite(ps.prices)):
        problems.append("prices contain non-finite entries")
    if not np.all(np.isfinite(ps.payoffs)):
        problems.append("payoffs contain non-finite entries")
    else:
        bad = np.argwhere(ps.payoffs < -tol)
        for row, col in bad[:8]:
            problems.append(f"negative payoff at row {row}, column {col}")
    finite_prices = np.isfinite(ps.prices)
    for i in np.nonzero(finite_prices & (ps.prices < -tol))[0]:
        problems.append(f"negative price at index {i}")
    if finite_prices[0] and abs(ps.prices[0] - 1.0) > tol:
        problems.append("safe asset price is not 1")
    if np.all(np.isfinite(ps.payoffs)) and ps.n_events >= 1:
        if np.max(np.abs(ps.payoffs[0] - 1.0)) > tol:
            problems.append("safe asset row not all ones")
    return problems


def numerical_rank(ps: PriceSystem, tol: float = 1e-10) -> int:
    """Numerical row rank of the payoff matrix at a relative tolerance."""
    s = np.linalg.svd(ps.payoffs, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class MartingaleMeasure:
    """Event weights q >= 0 with S q = Pi, plus diagnostics.

    min_weight reports how close equivalence (strict positivity) is; it is
    a diagnostic, never an enforced constraint.
    """

    weights: NDArray[np.float64]
    residual_inf: float
    min_weight: float

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64).ravel()
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_weights(cls, weights, ps: PriceSystem) -> "MartingaleMeasure":
        w = np.asarray(weights, dtype=np.float64).ravel()
        if w.shape[0] != ps.n_events:
            raise ValueError("weight vector length differs from event count")
        residual = float(np.max(np.abs(ps.payoffs @ w - ps.prices)))
        return cls(weights=w, residual_inf=residual, min_weight=float(np.min(w)))

    def check(
        self,
        *,
        feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
        weight_tol: float = DEFAULT_WEIGHT_TOL,
    ) -> list[str]:
        problems = []
        if self.residual_inf > feasibility_tol:
            problems.append(f"pricing residual {self.residual_inf:.3e} above tolerance")
        if self.min_weight < -weight_tol:
            problems.append(f"negative weight {self.min_weight:.3e}")
        if abs(float(np.sum(self.weights)) - 1.0) > max(weight_tol, 1e-9):
            problems.append("weights do not sum to 1")
        return problems


@dataclass(frozen=True)
class ArbitrageCertificate:
    """Portfolio v with v.Pi <= 0, (S^T v) >= 0, and some payoff > 0."""

    portfolio: NDArray[np.float64]
    present_value: float
    future_values: NDArray[np.float64]

    def __post_init__(self):
        portfolio = np.array(self.portfolio, dtype=np.float64).ravel()
        future = np.array(self.future_values, dtype=np.float64).ravel()
        portfolio.flags.writeable = False
        future.flags.writeable = False
        object.__setattr__(self, "portfolio", portfolio)
        object.__setattr__(self, "future_values", future)

    @classmethod
    def from_portfolio(cls, v, ps: PriceSystem) -> "ArbitrageCertificate":
        v = np.asarray(v, dtype=np.float64).ravel()
        if v.shape[0] != ps.n_assets:
            raise ValueError("portfolio length differs from asset count")
        return cls(
            portfolio=v,
            present_value=float(v @ ps.prices),
            future_values=ps.payoffs.T @ v,
        )

    def verify(self, ps: PriceSystem, tol: float = 1e-9) -> bool:
        """Recompute both sides from the raw market data and check them."""
        pv = float(self.portfolio @ ps.prices)
        future = ps.payoffs.T @ self.portfolio
        return bool(
            pv <= tol
            and np.all(future >= -tol)
            and np.max(future, initial=0.0) > tol
        )


ArbitrageVerdict = Union[MartingaleMeasure, ArbitrageCertificate]


def detect_arbitrage(
    ps: PriceSystem, tol: float = DEFAULT_FEASIBILITY_TOL
) -> ArbitrageVerdict:
    """Return a martingale measure or an arbitrage certificate, never both.

    A feasibility program decides whether nonnegative event weights can
    reproduce the prices; when it cannot, the program's dual ray is the
    arbitrage portfolio. The certificate is always shifted along the safe
    asset so every future payoff is strictly positive, then re-verified
    against the raw market data.
    """
    problems = [
        p for p in validate_price_system(ps)
        if "non-finite" in p or "empty" in p
    ]
    if problems:
        raise MarketFormatError("; ".join(problems))
    res = core.solve_standard_form(
        ps.payoffs,
        ps.prices,
        np.zeros(ps.n_events),
        tol=min(tol, 1e-9),
    )
    if res.status == core.OPTIMAL:
        return MartingaleMeasure.from_weights(res.x, ps)
    if res.status != core.INFEASIBLE:
        raise RuntimeError(f"feasibility program ended {res.status}")
    v = -res.dual_ray
    pv = float(v @ ps.prices)
    if pv >= 0.0:
        raise RuntimeError("dual ray failed to produce a negative present value")
    # buying -pv/2 units of the safe asset keeps the present value negative
    # and lifts every future payoff strictly above zero
    v = v.copy()
    v[0] += -pv / 2.0
    v /= np.max(np.abs(v))
    cert = ArbitrageCertificate.from_portfolio(v, ps)
    if not cert.verify(ps, tol=tol):
        raise RuntimeError("arbitrage certificate failed re-verification")
    return cert


def price_under_measure(derivative: Derivative, measure: MartingaleMeasure) -> float:
    """Expected payoff of the derivative under the measure."""
    d = derivative.payoffs
    if d.shape[0] != measure.weights.shape[0]:
        raise ValueError("derivative and measure cover different event spaces")
    return float(d @ measure.weights)


def arrow_expand(
    fn: Callable[[float], float], ps: PriceSystem, asset_index: int
) -> Derivative:
    """Tabulate ``fn`` over one risky asset's payoffs as a derivative.

    ``asset_index`` is the payoff-matrix row, between 1 and N; payoffs must
    come out nonnegative.
    """
    if not 1 <= asset_index <= ps.n_risky:
        raise ValueError(
            f"asset_index must be in [1, {ps.n_risky}], got {asset_index}"
        )
    values = np.array(
        [float(fn(float(s))) for s in ps.payoffs[asset_index]], dtype=np.float64
    )
    if not np.all(np.isfinite(values)):
        raise ValueError("payoff function produced non-finite values")
    if np.any(values < 0.0):
        raise ValueError("payoff function produced negative values")
    return Derivative(payoffs=values, label=f"fn(asset {asset_index})")


@dataclass(frozen=True)
class LoadedMarket:
    """A parsed market plus the generator model when one built it."""

    price_system: PriceSystem
    generated: object | None = None  # DiscretizedBsm for generated markets


_EXPLICIT_KEYS = {"prices", "payoffs"}
_GENERATOR_KEYS = {"generator", "pi", "mu", "sigma", "k0"}
_GENERATOR_OPT_KEYS = {"half_sigma_sign"}


def market_from_json(text: str) -> LoadedMarket:
    """Parse a market from its JSON form.

    Two shapes are accepted: ``{"prices": [...], "payoffs": [[...], ...]}``
    and ``{"generator": "bsm", "pi": ..., "mu": ..., "sigma": ..., "k0": ...}``
    (optional ``half_sigma_sign``). Validation is strict: unknown keys,
    non-finite or negative entries, and broken invariants all raise
    MarketFormatError.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MarketFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MarketFormatError("market JSON must be an object")
    keys = set(data)
    if "generator" in keys:
        if data["generator"] != "bsm":
            raise MarketFormatError(f"unknown generator: {data['generator']!r}")
        unknown = keys - _GENERATOR_KEYS - _GENERATOR_OPT_KEYS
        if unknown:
            raise MarketFormatError(f"unknown keys: {sorted(unknown)}")
        missing = _GENERATOR_KEYS - keys
        if missing:
            raise MarketFormatError(f"missing keys: {sorted(missing)}")
        from .bsm import BsmSpec, build

        try:
            spec = BsmSpec(
                pi=float(data["pi"]),
                mu=float(data["mu"]),
                sigma=float(data["sigma"]),
                k0=int(data["k0"]),
                half_sigma_sign=str(data.get("half_sigma_sign", "-")),
            )
        except (TypeError, ValueError) as exc:
            raise MarketFormatError(str(exc)) from exc
        model = build(spec)
        return LoadedMarket(price_system=model.price_system, generated=model)
    unknown = keys - _EXPLICIT_KEYS
    if unknown:
        raise MarketFormatError(f"unknown keys: {sorted(unknown)}")
    if keys != _EXPLICIT_KEYS:
        raise MarketFormatError(f"missing keys: {sorted(_EXPLICIT_KEYS - keys)}")
    prices = _as_float_array(data["prices"], "prices")
    payoffs = _as_float_array(data["payoffs"], "payoffs")
    if prices.ndim != 1 or payoffs.ndim != 2:
        raise MarketFormatError("prices must be a vector and payoffs a matrix")
    try:
        ps = PriceSystem(prices=prices, payoffs=payoffs)
    except ValueError as exc:
        raise MarketFormatError(str(exc)) from exc
    problems = validate_price_system(ps)
    if problems:
        raise MarketFormatError("; ".join(problems))
    return LoadedMarket(price_system=ps)
