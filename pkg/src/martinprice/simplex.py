"""Exact interval pricing by revised simplex.

``solve`` computes one bound of the price interval
max/min D^T q  s.t.  S q = Pi, q >= 0  and reports the optimal basis,
its condition number, and iteration count. ``extract_measure`` rebuilds
the martingale measure from the basis with a fresh factorization rather
than trusting the solver's working state. ``crossover_heuristic``
evaluates the scale comparison that says when the sampling solver
becomes preferable to pivoting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import lu_factor, lu_solve

from . import _simplex_core as core
from .market import Derivative, MartingaleMeasure, PriceSystem

IterationLimitError = core.IterationLimitError
SingularBasisError = core.SingularBasisError


class InternalInconsistencyError(RuntimeError):
    """The pricing program behaved in a way its structure forbids."""


@dataclass(frozen=True)
class SimplexSolution:
    objective: float
    basis: tuple[int, ...]
    q: NDArray[np.float64]
    kappa_basis: float
    iterations: int
    status: str  # optimal | infeasible | unbounded | cycled
    sense: str
    active_rows: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "price": self.objective,
            "basis": list(self.basis),
            "kappa_basis": self.kappa_basis,
            "iterations": self.iterations,
            "status": self.status,
            "sense": self.sense,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def solve(
    ps: PriceSystem,
    derivative: Derivative,
    sense: str = "max",
    *,
    rule: str = "bland",
    max_iter: int | None = None,
) -> SimplexSolution:
    """Price bound by two-phase revised simplex.

    Requires K >= N+1 so a pricing basis can exist. An arbitrage market
    comes back with status "infeasible"; an unbounded status is impossible
    for this program (the feasible set sits inside a scaled simplex) and
    raises InternalInconsistencyError.
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    d = derivative.payoffs
    if d.shape[0] != ps.n_events:
        raise ValueError("derivative and market cover different event spaces")
    if ps.n_events < ps.n_assets:
        raise ValueError(
            f"need at least as many events as assets: K={ps.n_events} < {ps.n_assets}"
        )
    sign = -1.0 if sense == "max" else 1.0
    res = core.solve_standard_form(
        ps.payoffs, ps.prices, sign * d, rule=rule, max_iter=max_iter
    )
    if res.status == core.UNBOUNDED:
        raise InternalInconsistencyError(
            "pricing program reported unbounded; the measure set is bounded"
        )
    if res.status in (core.INFEASIBLE, core.CYCLED):
        return SimplexSolution(
            objective=float("nan"),
            basis=(),
            q=np.zeros(ps.n_events),
            kappa_basis=float("nan"),
            iterations=res.iterations,
            status=res.status,
            sense=sense,
            active_rows=tuple(int(i) for i in res.active_rows),
        )
    basis = tuple(int(j) for j in res.basis)
    S_B = ps.payoffs[np.ix_(res.active_rows, res.basis)]
    kappa = _condition_number(S_B)
    return SimplexSolution(
        objective=float(sign * res.objective),
        basis=basis,
        q=res.x,
        kappa_basis=kappa,
        iterations=res.iterations,
        status="optimal",
        sense=sense,
        active_rows=tuple(int(i) for i in res.active_rows),
    )


def _condition_number(M: NDArray[np.float64]) -> float:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def extract_measure(
    sol: SimplexSolution, ps: PriceSystem
) -> MartingaleMeasure:
    """Measure from the optimal basis via a fresh factorization.

    Solves S_B q_B = Pi on the solver's active rows instead of reusing
    the pivoting state, so factorization drift cannot leak into the
    reported measure.
    """
    if sol.status != "optimal":
        raise ValueError(f"cannot extract a measure from status {sol.status!r}")
    rows = np.array(sol.active_rows, dtype=int)
    cols = np.array(sol.basis, dtype=int)
    S_B = ps.payoffs[np.ix_(rows, cols)]
    kappa = _condition_number(S_B)
    if not np.isfinite(kappa) or kappa > 1.0 / np.finfo(np.float64).eps:
        raise SingularBasisError(
            f"basis condition number {kappa:.3e} leaves no reliable digits"
        )
    lu = lu_factor(S_B)
    q_B = lu_solve(lu, ps.prices[rows])
    weights = np.zeros(ps.n_events)
    weights[cols] = q_B
    return MartingaleMeasure.from_weights(weights, ps)


@dataclass(frozen=True)
class CrossoverDecision:
    preferred: str  # "simplex" or "zsg"
    simplex_side: float
    zsg_side: float

    def to_dict(self) -> dict:
        return {
            "preferred": self.preferred,
            "simplex_side": self.simplex_side,
            "zsg_side": self.zsg_side,
        }


def crossover_heuristic(
    n_risky: int,
    n_events: int,
    kappa_basis: float,
    t_simplex: float,
    eps_simplex: float,
    eps_zsg: float,
    r: float,
    price: float,
) -> CrossoverDecision:
    """Scale comparison between the two solver families.

    Evaluates sqrt(NK)/(sqrt(N)+sqrt(K)) against
    (eps_smpx / (kappa T_smpx)) * ((r+1) price / eps_zsg)^3 and prefers
    simplex while the left side is the smaller one. Both sides are echoed
    so the caller can see how close the call was.
    """
    if min(n_risky, n_events) < 1:
        raise ValueError("need at least one risky asset and one event")
    lhs = math.sqrt(n_risky * n_events) / (math.sqrt(n_risky) + math.sqrt(n_events))
    rhs = (eps_simplex / (kappa_basis * t_simplex)) * (
        (r + 1.0) * price / eps_zsg
    ) ** 3
    return CrossoverDecision(
        preferred="simplex" if lhs <= rhs else "zsg",
        simplex_side=lhs,
        zsg_side=rhs,
    )
