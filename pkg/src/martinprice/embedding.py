"""Normalization of the pricing programs and their zero-sum-game form.

The interval-pricing program  max/min D^T q  s.t.  S q = Pi, q >= 0  is
rescaled so every coefficient lands in [-1, 1]: payoffs divide by the
largest matrix entry s_max, the objective by the largest derivative
payoff d_max, and the equality pair S q = Pi becomes the inequality
block A q <= c with A = [S'; -S'], c = [Pi'; -Pi']. The scaled optimum
alpha lives in [0, 1] and maps back through d_max.

``build_game`` embeds the question "is the maximal price at least
alpha?" into a matrix game whose value is 0 when the answer is yes and
grows linearly in the shortfall otherwise; a multiplicative-weights
solver can then answer it by sampling.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import _simplex_core as core
from .market import Derivative, PriceSystem


class AssemblyError(ValueError):
    """Game entries left [-1, 1]; normalization upstream is broken."""


@dataclass(frozen=True)
class ZeroPriceLP:
    """Marker for an identically zero payoff: both price bounds are 0."""

    sense: str

    @property
    def price(self) -> float:
        return 0.0


@dataclass(frozen=True)
class StandardFormLP:
    """min objective @ q  s.t.  A q <= c, q >= 0, all coefficients in [-1, 1].

    sense records which original bound this encodes: for "max" the
    objective is -D/d_max and the original optimum is -OPT * d_max; for
    "min" it is +D/d_max and the optimum is OPT * d_max.
    """

    A: NDArray[np.float64]
    c: NDArray[np.float64]
    objective: NDArray[np.float64]
    s_max: float
    d_max: float
    sense: str

    @property
    def n_events(self) -> int:
        return self.A.shape[1]

    @property
    def n_assets(self) -> int:
        return self.A.shape[0] // 2


def to_standard_form(
    ps: PriceSystem, derivative: Derivative, sense: str = "max"
) -> StandardFormLP | ZeroPriceLP:
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    d = derivative.payoffs
    if d.shape[0] != ps.n_events:
        raise ValueError("derivative and market cover different event spaces")
    if np.any(d < 0.0):
        raise ValueError("derivative payoffs must be nonnegative")
    s_max = float(np.max(ps.payoffs))
    if s_max <= 0.0:
        raise ValueError("payoff matrix has no positive entry")
    d_max = float(np.max(d)) if d.size else 0.0
    if d_max == 0.0:
        return ZeroPriceLP(sense=sense)
    S_scaled = ps.payoffs / s_max
    pi_scaled = ps.prices / s_max
    A = np.vstack([S_scaled, -S_scaled])
    c = np.concatenate([pi_scaled, -pi_scaled])
    d_hat = d / d_max
    objective = -d_hat if sense == "max" else d_hat
    return StandardFormLP(
        A=A, c=c, objective=objective, s_max=s_max, d_max=d_max, sense=sense
    )


@dataclass(frozen=True)
class DualLP:
    """Superhedging program: min objective @ xi  s.t.  lhs xi >= rhs, xi >= 0.

    Solutions split the hedge portfolio into nonnegative halves,
    zeta = xi[:N+1] - xi[N+1:]; the optimal cost equals the scaled
    maximal price, and any feasible xi upper-bounds every measure price
    (weak duality).
    """

    lhs: NDArray[np.float64]
    rhs: NDArray[np.float64]
    objective: NDArray[np.float64]

    def portfolio(self, xi: NDArray[np.float64]) -> NDArray[np.float64]:
        n = self.objective.shape[0] // 2
        return xi[:n] - xi[n:]


def build_dual(lp: StandardFormLP) -> DualLP:
    if lp.sense != "max":
        raise ValueError("the superhedging dual is defined for the max form")
    return DualLP(lhs=lp.A.T.copy(), rhs=-lp.objective.copy(), objective=lp.c.copy())


@dataclass(frozen=True)
class REstimate:
    """Hedge-size bound used to scale game precision: max(l1 norm, 1)."""

    value: float
    source: str  # "dual" or "fallback"


def estimate_r(
    ps: PriceSystem,
    derivative: Derivative,
    fallback: float | None = None,
) -> REstimate:
    """l1 norm of an optimal superhedge of the derivative, floored at 1.

    Solves  min Pi @ zeta  s.t.  S^T zeta >= D  in split variables. When
    the program cannot be solved (an arbitrage market makes it unbounded)
    the fallback is returned instead, or the failure is raised if no
    fallback was given.
    """
    n, k = ps.n_assets, ps.n_events
    S_t = ps.payoffs.T
    A = np.hstack([S_t, -S_t, -np.eye(k)])
    b = derivative.payoffs.copy()
    c = np.concatenate([ps.prices, -ps.prices, np.zeros(k)])
    try:
        res = core.solve_standard_form(A, b, c)
    except core.IterationLimitError:
        res = None
    if res is None or res.status != core.OPTIMAL:
        if fallback is None:
            status = res.status if res is not None else "iteration-limit"
            raise RuntimeError(f"hedge-size estimate failed: dual program {status}")
        return REstimate(value=float(fallback), source="fallback")
    zeta = res.x[:n] - res.x[n : 2 * n]
    return REstimate(value=max(float(np.sum(np.abs(zeta))), 1.0), source="dual")


@dataclass(frozen=True)
class GameEmbedding:
    """Matrix game asking whether the scaled maximal price reaches alpha.

    F has 2N+5 rows and K+2 columns. Columns are the K event weights, a
    slack column, and a scale column; rows are two simplex-coupling rows,
    the objective row (whose last entry is alpha/R), and the +/- scaled
    payoff blocks. The game value is 0 when the scaled price is >= alpha
    and grows with the shortfall otherwise.
    """

    F: NDArray[np.float64]
    alpha: float
    R: float
    r: float
    n_assets: int
    n_events: int

    @property
    def n_rows(self) -> int:
        return self.F.shape[0]

    @property
    def n_cols(self) -> int:
        return self.F.shape[1]

    @property
    def objective_row(self) -> int:
        return 2

    @property
    def payoff_rows(self) -> slice:
        return slice(3, 3 + self.n_assets)

    @property
    def negated_payoff_rows(self) -> slice:
        return slice(3 + self.n_assets, 3 + 2 * self.n_assets)

    @property
    def measure_cols(self) -> slice:
        return slice(0, self.n_events)

    def with_alpha(self, alpha: float) -> "GameEmbedding":
        """Copy with the threshold re-patched; only F[2, -1] changes."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {alpha}")
        F = self.F.copy()
        F[2, -1] = alpha / self.R
        return dataclasses.replace(self, F=F, alpha=alpha)


def build_game(lp: StandardFormLP, alpha: float, r: float) -> GameEmbedding:
    if lp.sense != "max":
        raise ValueError("the game embedding encodes the max form")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if r < 1.0:
        raise ValueError(f"hedge bound r must be >= 1, got {r}")
    R = 1.0
    n_assets = lp.n_assets
    k = lp.n_events
    n_rows = 3 + 2 * n_assets  # == 2N + 5 with N risky assets
    F = np.zeros((n_rows, k + 2))
    F[0, :k] = 1.0
    F[0, k] = 1.0
    F[0, k + 1] = -1.0
    F[1, :k] = -1.0
    F[1, k] = 1.0
    F[1, k + 1] = 1.0
    F[2, :k] = lp.objective
    F[2, k + 1] = alpha / R
    F[3:, :k] = lp.A
    F[3:, k + 1] = -lp.c
    if np.max(np.abs(F)) > 1.0 + 1e-12:
        raise AssemblyError(
            "game entries outside [-1, 1]; normalization upstream is broken"
        )
    return GameEmbedding(
        F=F, alpha=alpha, R=R, r=float(r), n_assets=n_assets, n_events=k
    )
