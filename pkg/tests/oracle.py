"""Independent reference implementations used to check the package.

Everything here is built from numpy, math, and itertools only, with no
imports from the package under test. The LP oracle enumerates polytope
vertices directly, which is exact (up to floating point) for the small
markets the tests use and shares no code path with the simplex or the
sampling solver.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def closed_call(pi: float, sigma: float, strike: float) -> float:
    """Zero-rate lognormal call value, E[(pi e^{sigma X - sigma^2/2} - Z)+]."""
    if strike <= 0.0:
        return pi
    d1 = (math.log(pi / strike) + 0.5 * sigma * sigma) / sigma
    d2 = d1 - sigma
    return pi * normal_cdf(d1) - strike * normal_cdf(d2)


def closed_put(pi: float, sigma: float, strike: float) -> float:
    if strike <= 0.0:
        return 0.0
    d1 = (math.log(pi / strike) + 0.5 * sigma * sigma) / sigma
    d2 = d1 - sigma
    return strike * normal_cdf(-d2) - pi * normal_cdf(-d1)


def riemann_option(
    pi: float,
    sigma: float,
    strike: float,
    kind: str,
    lo: float = -14.0,
    hi: float = 14.0,
    n: int = 400_001,
) -> float:
    """Numeric integral of the payoff against the standard normal density."""
    x = np.linspace(lo, hi, n)
    s = pi * np.exp(sigma * x - 0.5 * sigma * sigma)
    payoff = np.maximum(s - strike, 0.0) if kind == "call" else np.maximum(
        strike - s, 0.0
    )
    density = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(np.trapezoid(payoff * density, x))


def vertex_bounds(prices, payoffs, payoff_row, tol: float = 1e-9):
    """Exact price interval by enumerating basic feasible solutions.

    The measure polytope {q >= 0 : S q = prices} is bounded (the safe row
    forces the weights to sum to prices[0]), so both LP bounds are attained
    at vertices, and every vertex has a linearly independent support of at
    most rank(S) columns. Returns (min, max) or None when infeasible.
    """
    S = np.asarray(payoffs, dtype=np.float64)
    pi = np.asarray(prices, dtype=np.float64)
    d = np.asarray(payoff_row, dtype=np.float64)
    n_events = S.shape[1]
    r = int(np.linalg.matrix_rank(S, tol=1e-10))
    lo, hi = np.inf, -np.inf
    found = False
    for size in range(1, r + 1):
        for cols in itertools.combinations(range(n_events), size):
            B = S[:, cols]
            if np.linalg.matrix_rank(B, tol=1e-10) < size:
                continue
            q, *_ = np.linalg.lstsq(B, pi, rcond=None)
            if np.max(np.abs(B @ q - pi)) > tol:
                continue
            if np.min(q) < -tol:
                continue
            val = float(d[list(cols)] @ q)
            found = True
            lo = min(lo, val)
            hi = max(hi, val)
    if not found:
        return None
    return lo, hi


def vertex_feasible(prices, payoffs, tol: float = 1e-9) -> bool:
    zero = np.zeros(np.asarray(payoffs).shape[1])
    return vertex_bounds(prices, payoffs, zero, tol=tol) is not None


def dirichlet_market(rng: np.random.Generator, n_assets_total: int, n_events: int, scale: float = 4.0):
    """Arbitrage-free by construction: prices priced by an interior measure."""
    q = rng.dirichlet(np.ones(n_events))
    risky = rng.uniform(0.0, scale, size=(n_assets_total - 1, n_events))
    payoffs = np.vstack([np.ones(n_events), risky])
    return payoffs @ q, payoffs


def mixed_market(rng: np.random.Generator, n_assets_total: int, n_events: int, scale: float = 4.0):
    """Prices drawn independently of payoffs; may or may not admit a measure."""
    risky = rng.uniform(0.0, scale, size=(n_assets_total - 1, n_events))
    payoffs = np.vstack([np.ones(n_events), risky])
    prices = np.concatenate([[1.0], rng.uniform(0.0, scale, size=n_assets_total - 1)])
    return prices, payoffs
