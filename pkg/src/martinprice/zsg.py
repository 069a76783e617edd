"""Sampling-based interval pricing through a zero-sum matrix game.

The question "is the scaled maximal price at least alpha?" becomes a
matrix game whose value is 0 when the answer is yes and positive
otherwise. Both players run multiplicative-weights updates with exact
softmax sampling; the game value is then estimated by sampling matrix
entries under the players' empirical strategies, and a bisection on
alpha pins the price. Iteration and sample counts default to their
worst-case budgets; ``t_max`` / ``sample_max`` cap them when wall-clock
matters more than the proven constants, and every run records the caps
it actually used. A capped run rebalances its step size, branch
threshold, and sample count to the precision the reduced budget can
actually certify (the uncapped budget reproduces the nominal settings
exactly), so accuracy degrades gracefully instead of collapsing.

All randomness flows through one counter-based (Philox) stream per
market in a fixed consumption order: two variates per game iteration
(column draw then row draw), then two blocks for the value estimate
(row indices, column indices). Batched runs therefore reproduce
single-market runs bit for bit, seed by seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np
from numpy.typing import NDArray

from .embedding import (
    GameEmbedding,
    StandardFormLP,
    ZeroPriceLP,
    build_game,
    estimate_r,
    to_standard_form,
)
from .market import (
    ArbitrageCertificate,
    Derivative,
    MartingaleMeasure,
    PriceSystem,
    detect_arbitrage,
)

_CHUNK = 4096
_RENORM_EVERY = 32
_SPARSITY_TOL = 1e-12
_PRECISION_FLOOR = 2.0 ** -20
# bisection branches when the certified value midpoint exceeds this
# multiple of the run's effective precision; calibrated so that wrong
# branches at capped budgets stay rare without inflating the price
_TAU_COEFF = 0.15


class InfeasibleMarketError(RuntimeError):
    """The market admits arbitrage, so no price interval exists."""

    def __init__(self, message: str, certificate: ArbitrageCertificate | None = None):
        super().__init__(message)
        self.certificate = certificate


class PrecisionFloorError(RuntimeError):
    """Relative pricing could not separate the price from zero."""


def _philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def iteration_budget(
    n_rows: int, n_cols: int, eps_prime: float, delta: float, rounds: int = 1
) -> int:
    """Worst-case iteration count for one game run.

    ceil(16 / eps'^2 * ln(n_rows * n_cols * rounds / delta)); the rounds
    factor union-bounds over a bisection reusing the same budget.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if eps_prime <= 0.0:
        raise ValueError(f"eps_prime must be positive, got {eps_prime}")
    return math.ceil(
        16.0 / eps_prime**2 * math.log(n_rows * n_cols * max(rounds, 1) / delta)
    )


def sample_budget(eps_prime: float, delta: float) -> int:
    """Entry samples needed to estimate the game value to eps_prime."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if eps_prime <= 0.0:
        raise ValueError(f"eps_prime must be positive, got {eps_prime}")
    return math.ceil(math.log(1.0 / delta) / eps_prime**2)


def effective_eps(
    n_rows: int, n_cols: int, t_used: int, delta: float, rounds: int = 1
) -> float:
    """Precision a run of t_used iterations can certify.

    Inverts the iteration budget: eps = 4 * sqrt(ln(n1 n2 rounds / delta)
    / t). Running with fewer iterations than the nominal budget at an
    unchanged step size would leave the regret term dominant and bias
    every value estimate upward; rebalancing eta and the decision
    threshold to this value keeps the estimates centered at the coarser
    scale the budget affords.
    """
    if t_used < 1:
        raise ValueError(f"t_used must be at least 1, got {t_used}")
    return 4.0 * math.sqrt(
        math.log(n_rows * n_cols * max(rounds, 1) / delta) / t_used
    )


def gibbs_distribution(
    F: NDArray[np.float64], v: NDArray[np.float64], side: str
) -> NDArray[np.float64]:
    """Softmax strategy induced by an opponent accumulator.

    side="column": v accumulates column play, returns softmax(F v) over
    rows. side="row": v accumulates row play, returns softmax(-F^T v)
    over columns. Computed with max-subtraction; sums to 1 exactly up to
    the final renormalization.
    """
    F = np.asarray(F, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64).ravel()
    if side == "column":
        z = F @ v
    elif side == "row":
        z = -(F.T @ v)
    else:
        raise ValueError(f"side must be 'row' or 'column', got {side!r}")
    z = z - np.max(z)
    w = np.exp(z)
    return w / np.sum(w)


@dataclass
class GameState:
    """Accumulated (unnormalized) strategies after t iterations of step eta."""

    x: NDArray[np.float64]
    y: NDArray[np.float64]
    eta: float
    t: int


@numba.njit(cache=True)
def _mwu_advance(F, mul_col, mul_rowT, w_col, w_row, x, y, U, eta, step0):
    """Advance one game by U.shape[0] // 2 iterations in place.

    Per iteration: draw column j from the normalized column weights with
    U[2s], row i from the row weights with U[2s+1], then y[j] += eta,
    x[i] += eta, w_col *= mul_col[i, :], w_row *= mul_rowT[j, :]. Every
    _RENORM_EVERY lifetime steps (step0 carries the count across calls)
    each weight block is divided by its maximum, which leaves the
    sampled distributions unchanged.
    """
    n1, n2 = F.shape
    m = U.shape[0] // 2
    steps = step0
    for s in range(m):
        tot_c = 0.0
        for t in range(n2):
            tot_c += w_col[t]
        r = U[2 * s] * tot_c
        j = n2 - 1
        acc = 0.0
        for t in range(n2):
            acc += w_col[t]
            if acc >= r:
                j = t
                break
        tot_r = 0.0
        for t in range(n1):
            tot_r += w_row[t]
        r = U[2 * s + 1] * tot_r
        i = n1 - 1
        acc = 0.0
        for t in range(n1):
            acc += w_row[t]
            if acc >= r:
                i = t
                break
        y[j] += eta
        x[i] += eta
        for t in range(n2):
            w_col[t] *= mul_col[i, t]
        for t in range(n1):
            w_row[t] *= mul_rowT[j, t]
        steps += 1
        if steps % _RENORM_EVERY == 0:
            mx = w_col[0]
            for t in range(1, n2):
                if w_col[t] > mx:
                    mx = w_col[t]
            for t in range(n2):
                w_col[t] /= mx
            mx = w_row[0]
            for t in range(1, n1):
                if w_row[t] > mx:
                    mx = w_row[t]
            for t in range(n1):
                w_row[t] /= mx
    return steps


class _GameBatch:
    """Multiplicative-weights driver for a batch of independent games.

    Game g advances t_totals[g] iterations. Per iteration, from the
    pre-update accumulators, the column index j is drawn from
    softmax(-F^T x) and the row index i from softmax(F y); then
    y[j] += eta and x[i] += eta. Weights are maintained multiplicatively
    (exactly exp of the logits, up to float drift) and renormalized by
    their maximum on a fixed per-game cadence, which leaves the sampled
    distributions unchanged. Uniform variates are generated from each
    game's own stream in blocks of at most 2 * _CHUNK, so a game's
    trajectory depends only on its own matrix, step size, budget, and
    stream, never on its batch neighbors.
    """

    def __init__(self, mats, etas, t_totals, rngs):
        B = len(mats)
        self.B = B
        self.rngs = list(rngs)
        self.etas = np.asarray(etas, dtype=np.float64)
        self.t_totals = np.asarray(t_totals, dtype=np.int64)
        self.n1s = np.array([M.shape[0] for M in mats], dtype=np.int64)
        self.n2s = np.array([M.shape[1] for M in mats], dtype=np.int64)
        self.F = [np.ascontiguousarray(M, dtype=np.float64) for M in mats]
        # mul_col is indexed by the sampled row and scales column weights;
        # mul_rowT is the row-weight table laid out for a by-column gather
        self.mul_col = [np.exp(-eta * M) for eta, M in zip(self.etas, self.F)]
        self.mul_rowT = [
            np.ascontiguousarray(np.exp(eta * M).T)
            for eta, M in zip(self.etas, self.F)
        ]
        self.w_col = [np.ones(M.shape[1]) for M in self.F]
        self.w_row = [np.ones(M.shape[0]) for M in self.F]
        self.x = [np.zeros(M.shape[0]) for M in self.F]
        self.y = [np.zeros(M.shape[1]) for M in self.F]

    def run(self) -> None:
        for g in range(self.B):
            remaining = int(self.t_totals[g])
            steps = 0
            while remaining > 0:
                need = min(remaining, _CHUNK)
                U = self.rngs[g].random(2 * need)
                steps = _mwu_advance(
                    self.F[g],
                    self.mul_col[g],
                    self.mul_rowT[g],
                    self.w_col[g],
                    self.w_row[g],
                    self.x[g],
                    self.y[g],
                    U,
                    float(self.etas[g]),
                    steps,
                )
                remaining -= need

    def value_bounds(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Certified per-game value interval from the empirical strategies.

        For any mixed strategies, min_j (xbar^T F)_j <= value <= max_i
        (F ybar)_i; the width shrinks with the players' regret. Unlike
        the sampled estimate this is exact given the run, so bisection
        decisions built on it carry no sampling noise.
        """
        lo = np.empty(self.B)
        hi = np.empty(self.B)
        for g in range(self.B):
            Fg = self.F[g]
            xbar = self.x[g] / self.x[g].sum()
            ybar = self.y[g] / self.y[g].sum()
            lo[g] = float(np.min(xbar @ Fg))
            hi[g] = float(np.max(Fg @ ybar))
        return lo, hi

    def estimate_value(self, n_samples) -> NDArray[np.float64]:
        """Mean sampled entry under the empirical strategies, per game."""
        lam = np.zeros(self.B)
        for g in range(self.B):
            n = int(n_samples[g])
            block = self.rngs[g].random(2 * n)
            cx = np.cumsum(self.x[g])
            cy = np.cumsum(self.y[g])
            i = np.searchsorted(cx, block[:n] * cx[-1], side="left")
            j = np.searchsorted(cy, block[n:] * cy[-1], side="left")
            lam[g] = float(np.mean(self.F[g][i, j]))
        return lam


def play_game(
    emb: GameEmbedding,
    eps_prime: float,
    delta: float,
    *,
    seed: int = 0,
    t_max: int | None = None,
    sample_max: int | None = None,
    rounds_hint: int = 1,
) -> tuple[GameState, float]:
    """One multiplicative-weights run plus a sampled value estimate.

    Runs min(worst-case budget, t_max) iterations and estimates the game
    value from sampled entries; |estimate - value| <= eps_prime with
    probability at least 1 - delta when the budgets are uncapped. A
    capped run rebalances eta and the sample count to the effective
    precision of the reduced budget.
    """
    t_formula = iteration_budget(emb.n_rows, emb.n_cols, eps_prime, delta, rounds_hint)
    t_used = t_formula if t_max is None else min(t_formula, int(t_max))
    eps_eff = max(
        eps_prime, effective_eps(emb.n_rows, emb.n_cols, t_used, delta, rounds_hint)
    )
    n_formula = sample_budget(eps_eff, delta)
    n_used = n_formula if sample_max is None else min(n_formula, int(sample_max))
    eta = eps_eff / 4.0
    batch = _GameBatch([emb.F], [eta], [t_used], [_philox(seed)])
    batch.run()
    lam = batch.estimate_value([n_used])
    state = GameState(x=batch.x[0].copy(), y=batch.y[0].copy(), eta=eta, t=t_used)
    return state, float(lam[0])


@dataclass(frozen=True)
class ZsgPriceResult:
    """Price bound from the game solver, with its audit trail."""

    price: float
    alpha_final: float
    eps: float
    delta: float
    seed: int
    sense: str
    d_max: float
    measure: MartingaleMeasure | None
    dual_weights: NDArray[np.float64] | None
    iterations_total: int
    samples_used: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        sparsity = (
            int(np.sum(self.measure.weights > _SPARSITY_TOL))
            if self.measure is not None
            else 0
        )
        return {
            "price": self.price,
            "alpha": self.alpha_final,
            "eps": self.eps,
            "seed": self.seed,
            "iterations": self.iterations_total,
            "samples": self.samples_used,
            "measure_sparsity": sparsity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def price_absolute(
    ps: PriceSystem,
    derivative: Derivative,
    *,
    sense: str = "max",
    eps: float = 0.01,
    delta: float = 0.1,
    seed: int = 0,
    t_max: int | None = None,
    sample_max: int | None = None,
    check_arbitrage: bool = True,
    r_fallback: float | None = None,
) -> ZsgPriceResult:
    """Price one bound to absolute error eps * d_max (budgets permitting)."""
    return price_absolute_batch(
        [(ps, derivative)],
        sense=sense,
        eps=eps,
        delta=delta,
        seeds=[seed],
        t_max=t_max,
        sample_max=sample_max,
        check_arbitrage=check_arbitrage,
        r_fallback=r_fallback,
    )[0]


def price_absolute_batch(
    markets: Sequence[tuple[PriceSystem, Derivative]],
    *,
    sense: str = "max",
    eps: float = 0.01,
    delta: float = 0.1,
    seeds: Sequence[int] | None = None,
    t_max: int | None = None,
    sample_max: int | None = None,
    check_arbitrage: bool = True,
    r_fallback: float | None = None,
) -> list[ZsgPriceResult]:
    """Price many markets in lockstep; equals per-market runs bit for bit.

    Each market keeps its own Philox stream, bisection state, and
    iteration budget; batching only amortizes the per-iteration driver
    cost. For sense="min" the payoff is complemented so the same
    max-form game answers both bounds; the reported measure is then the
    minimizing one.
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    B = len(markets)
    if seeds is None:
        seeds = list(range(B))
    if len(seeds) != B:
        raise ValueError(f"{len(seeds)} seeds for {B} markets")
    rounds = max(1, math.ceil(math.log2(1.0 / eps)))

    records: list[dict] = []
    results: list[ZsgPriceResult | None] = [None] * B
    for g, (ps, d) in enumerate(markets):
        if d.payoffs.shape[0] != ps.n_events:
            raise ValueError(f"market {g}: derivative event count mismatch")
        measure0 = None
        if check_arbitrage:
            verdict = detect_arbitrage(ps)
            if isinstance(verdict, ArbitrageCertificate):
                raise InfeasibleMarketError(
                    f"market {g} admits arbitrage; no price interval exists",
                    certificate=verdict,
                )
            measure0 = verdict
        d_max_orig = d.d_max
        if sense == "max":
            work = d
            shift, flip = 0.0, 1.0
        else:
            work = Derivative(payoffs=d_max_orig - d.payoffs, label=d.label)
            shift, flip = d_max_orig, -1.0
        lp = to_standard_form(ps, work, "max")
        if isinstance(lp, ZeroPriceLP):
            # identically zero working payoff: the bound is the shift itself
            results[g] = ZsgPriceResult(
                price=shift,
                alpha_final=0.0,
                eps=eps,
                delta=delta,
                seed=int(seeds[g]),
                sense=sense,
                d_max=d_max_orig,
                measure=measure0,
                dual_weights=None,
                iterations_total=0,
                samples_used=0,
                metadata={"zero_payoff": True, "rounds": 0},
            )
            continue
        r_est = estimate_r(ps, work, fallback=r_fallback)
        eps_prime = eps / (6.0 * (r_est.value + 1.0))
        emb = build_game(lp, 0.5, r_est.value)
        t_formula = iteration_budget(emb.n_rows, emb.n_cols, eps_prime, delta, rounds)
        t_used = t_formula if t_max is None else min(t_formula, int(t_max))
        eps_eff = max(
            eps_prime, effective_eps(emb.n_rows, emb.n_cols, t_used, delta, rounds)
        )
        n_formula = sample_budget(eps_eff, delta)
        n_used = n_formula if sample_max is None else min(n_formula, int(sample_max))
        records.append(
            {
                "g": g,
                "ps": ps,
                "lp": lp,
                "emb": emb,
                "r": r_est,
                "eps_prime": eps_prime,
                "eps_eff": eps_eff,
                "eta": eps_eff / 4.0,
                "t_formula": t_formula,
                "t": t_used,
                "n_formula": n_formula,
                "n": n_used,
                "rng": _philox(int(seeds[g])),
                "alpha": 0.5,
                "x_lo": 0.0,
                "x_hi": 1.0,
                "seed": int(seeds[g]),
                "shift": shift,
                "flip": flip,
                "scale": lp.d_max,
                "d_max_orig": d_max_orig,
                "iters": 0,
                "samples": 0,
            }
        )

    batch = None
    for _ in range(rounds):
        if not records:
            break
        mats = [rec["emb"].with_alpha(rec["alpha"]).F for rec in records]
        batch = _GameBatch(
            mats,
            [rec["eta"] for rec in records],
            [rec["t"] for rec in records],
            [rec["rng"] for rec in records],
        )
        batch.run()
        lams = batch.estimate_value([rec["n"] for rec in records])
        lo, hi = batch.value_bounds()
        for rec, lam, stat in zip(records, lams, 0.5 * (np.maximum(lo, 0.0) + hi)):
            rec["iters"] += rec["t"]
            rec["samples"] += rec["n"]
            # branch on the certified interval midpoint; the sampled
            # estimate is reported but carries avoidable noise
            if stat > _TAU_COEFF * rec["eps_eff"]:
                # value clearly positive: the scaled price is below alpha
                rec["x_hi"] = rec["alpha"]
                rec["alpha"] = (rec["x_lo"] + rec["alpha"]) / 2.0
            else:
                rec["x_lo"] = rec["alpha"]
                rec["alpha"] = (rec["alpha"] + rec["x_hi"]) / 2.0
            rec["lam"] = float(lam)
            rec["stat"] = float(stat)

    for idx, rec in enumerate(records):
        g = rec["g"]
        ps = rec["ps"]
        lp = rec["lp"]
        k = ps.n_events
        n_assets = ps.n_assets
        y = batch.y[idx]
        x = batch.x[idx]
        q_raw = y[:k]
        q_sum = float(np.sum(q_raw))
        weights = q_raw / q_sum if q_sum > 0.0 else np.zeros(k)
        measure = MartingaleMeasure.from_weights(weights, ps)
        dual_raw = x[3 : 3 + n_assets]
        dual_sum = float(np.sum(np.abs(dual_raw)))
        dual = dual_raw / dual_sum if dual_sum > 0.0 else np.zeros(n_assets)
        gap = float(np.max(lp.A @ weights - lp.c))
        alpha = rec["alpha"]
        price = rec["shift"] + rec["flip"] * alpha * rec["scale"]
        results[g] = ZsgPriceResult(
            price=float(price),
            alpha_final=float(alpha),
            eps=eps,
            delta=delta,
            seed=rec["seed"],
            sense=sense,
            d_max=rec["d_max_orig"],
            measure=measure,
            dual_weights=dual,
            iterations_total=int(rec["iters"]),
            samples_used=int(rec["samples"]),
            metadata={
                "rounds": rounds,
                "r": rec["r"].value,
                "r_source": rec["r"].source,
                "eps_prime": rec["eps_prime"],
                "eps_effective": rec["eps_eff"],
                "t_formula": rec["t_formula"],
                "t_per_round": rec["t"],
                "t_capped": rec["t"] < rec["t_formula"],
                "samples_formula": rec["n_formula"],
                "samples_per_round": rec["n"],
                "samples_capped": rec["n"] < rec["n_formula"],
                "feasibility_gap": gap,
                "last_lambda": rec.get("lam"),
                "last_value_mid": rec.get("stat"),
            },
        )
    return results  # type: ignore[return-value]


def price_relative(
    ps: PriceSystem,
    derivative: Derivative,
    *,
    sense: str = "max",
    eps: float = 0.1,
    seed: int = 0,
    t_max: int | None = None,
    sample_max: int | None = None,
    check_arbitrage: bool = True,
    r_fallback: float | None = None,
) -> ZsgPriceResult:
    """Price one bound to relative error eps.

    Halving probes at absolute precision 2^-k (each with success
    probability 0.99) run until the price provably exceeds 3 * 2^-k of
    the payoff scale; one final absolute run at eps * (alpha_k - 2^-k)
    then delivers the relative guarantee. Prices indistinguishable from
    zero hit the 2^-20 precision floor and raise PrecisionFloorError.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    d_max = derivative.d_max
    if d_max == 0.0:
        return price_absolute(
            ps,
            derivative,
            sense=sense,
            eps=0.5,
            delta=0.01,
            seed=seed,
            t_max=t_max,
            sample_max=sample_max,
            check_arbitrage=check_arbitrage,
            r_fallback=r_fallback,
        )
    common = dict(
        sense=sense,
        t_max=t_max,
        sample_max=sample_max,
        check_arbitrage=check_arbitrage,
        r_fallback=r_fallback,
    )
    k = 0
    while True:
        k += 1
        probe_eps = 2.0**-k
        if probe_eps < _PRECISION_FLOOR:
            raise PrecisionFloorError(
                f"price not separable from zero above 2^-20 of the payoff scale "
                f"after {k - 1} probes"
            )
        probe = price_absolute(
            ps, derivative, eps=probe_eps, delta=0.01, seed=seed + k, **common
        )
        alpha_k = probe.price / d_max
        if alpha_k - 3.0 * probe_eps > 0.0:
            eps_abs = eps * (alpha_k - probe_eps)
            final = price_absolute(
                ps, derivative, eps=eps_abs, delta=0.01, seed=seed, **common
            )
            final.metadata["relative"] = {
                "probes": k,
                "probe_alpha": alpha_k,
                "eps_abs": eps_abs,
                "eps_relative": eps,
            }
            return final


@dataclass(frozen=True)
class AdvantageReport:
    """Asymptotic query-count comparison; constant factors omitted."""

    n_risky: int
    n_events: int
    eps: float
    rho: float
    xi_l0: float
    threshold: float
    advantageous: bool
    quantum_queries: float
    classical_queries: float

    def to_dict(self) -> dict:
        return {
            "n_risky": self.n_risky,
            "n_events": self.n_events,
            "eps": self.eps,
            "rho": self.rho,
            "xi_l0": self.xi_l0,
            "threshold": self.threshold,
            "advantageous": self.advantageous,
            "quantum_queries": self.quantum_queries,
            "classical_queries": self.classical_queries,
            "note": "asymptotic query counts; constant factors omitted",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def quantum_advantage_report(
    n_risky: int,
    n_events: int,
    eps: float,
    rho: float,
    xi_l0: float,
) -> AdvantageReport:
    """Compare asymptotic sampling-solver query counts across hardware.

    The sampling route wins asymptotically when the optimal hedge uses
    few assets: xi_l0 <= eps * sqrt(N + K) / rho. Both query counts use
    the hedge sparsity as the scale bound r.
    """
    if n_risky < 1 or n_events < 1:
        raise ValueError("need at least one risky asset and one event")
    if eps <= 0.0 or rho <= 0.0 or xi_l0 < 0.0:
        raise ValueError("eps and rho must be positive and xi_l0 nonnegative")
    threshold = eps * math.sqrt(n_risky + n_events) / rho
    quantum = (math.sqrt(n_risky) + math.sqrt(n_events)) * (
        (xi_l0 + 1.0) * rho / eps
    ) ** 3
    classical = (n_risky + n_events) * (xi_l0 + 1.0) ** 2 * rho**2 / eps**2
    return AdvantageReport(
        n_risky=n_risky,
        n_events=n_events,
        eps=eps,
        rho=rho,
        xi_l0=xi_l0,
        threshold=threshold,
        advantageous=xi_l0 <= threshold,
        quantum_queries=quantum,
        classical_queries=classical,
    )
