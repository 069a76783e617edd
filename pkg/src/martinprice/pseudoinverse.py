"""Pseudoinverse pricing for least-squares markets.

A market is a least-squares market when the minimum-norm solution
q+ = S+ pi of the price equations is itself a valid martingale measure:
then every derivative has the single price D^T q+ and no linear program
is needed. This module computes q+ by SVD, tests the condition, and
reports the conditioning quantities that govern downstream error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ._simplex_core import OPTIMAL, solve_standard_form
from .market import Derivative, PriceSystem


class NotLeastSquaresMarketError(RuntimeError):
    """Raised when pseudoinverse pricing is asked for but invalid.

    Carries the full report so callers can inspect why the condition
    failed and fall back to an LP method.
    """

    def __init__(self, message: str, report: "PinvReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class PinvReport:
    """Minimum-norm solve of the price equations plus diagnostics.

    gamma is the squared norm of the unit price vector's projection onto
    the payoff column space (1 means prices are exactly representable);
    kappa is the ratio of extreme nonzero singular values. The
    least-squares verdict requires strictly positive entries; the
    closed-set relaxation (entries >= -tol_pos) is reported separately
    and never changes the verdict. distance_to_feasible is the
    l-infinity distance from q_plus to the feasible measure set, or None
    when that set is empty or the projection was not requested.
    """

    q_plus: NDArray[np.float64]
    residual: float
    min_entry: float
    gamma: float
    kappa: float
    rank: int
    is_complete: bool
    is_least_squares_market: bool
    nonneg_within_tol: bool
    distance_to_feasible: float | None
    tol_rank: float
    tol_pos: float


def _distance_to_feasible(
    ps: PriceSystem, q_plus: NDArray[np.float64]
) -> float | None:
    # min t  s.t.  S q = pi,  |q - q+|_inf <= t,  q >= 0
    # slack form: q - t + s1 = q+  and  -q - t + s2 = -q+
    k = ps.n_events
    n_rows = ps.n_assets
    eye = np.eye(k)
    ones = np.ones((k, 1))
    A = np.block(
        [
            [ps.payoffs, np.zeros((n_rows, 1)), np.zeros((n_rows, 2 * k))],
            [eye, -ones, eye, np.zeros((k, k))],
            [-eye, -ones, np.zeros((k, k)), eye],
        ]
    )
    b = np.concatenate([ps.prices, q_plus, -q_plus])
    c = np.zeros(3 * k + 1)
    c[k] = 1.0
    result = solve_standard_form(A, b, c)
    if result.status != OPTIMAL:
        return None
    return float(result.objective)


def pinv_solve(
    ps: PriceSystem,
    *,
    tol_rank: float = 1e-12,
    tol_pos: float = 1e-9,
    residual_tol: float = 1e-7,
    compute_distance: bool = True,
) -> PinvReport:
    """Compute q+ = S+ pi and test the least-squares-market condition.

    Singular values below tol_rank times the largest are treated as
    zero. The verdict requires the price equations solved to within
    residual_tol in l2 and every entry of q+ above tol_pos.
    """
    S = ps.payoffs
    pi = ps.prices
    U, sig, Vt = np.linalg.svd(S, full_matrices=False)
    cutoff = tol_rank * sig[0]
    rank = int(np.sum(sig > cutoff))
    Ur = U[:, :rank]
    q_plus = Vt[:rank].T @ ((Ur.T @ pi) / sig[:rank])
    residual = float(np.linalg.norm(S @ q_plus - pi))
    min_entry = float(np.min(q_plus))
    pi_hat = pi / np.linalg.norm(pi)
    gamma = float(np.linalg.norm(Ur.T @ pi_hat) ** 2)
    kappa = float(sig[0] / sig[rank - 1])
    k = ps.n_events
    is_complete = ps.n_assets == k and rank == k
    is_lsq = residual <= residual_tol and min_entry > tol_pos
    distance = (
        _distance_to_feasible(ps, q_plus) if compute_distance else None
    )
    return PinvReport(
        q_plus=q_plus,
        residual=residual,
        min_entry=min_entry,
        gamma=gamma,
        kappa=kappa,
        rank=rank,
        is_complete=is_complete,
        is_least_squares_market=is_lsq,
        nonneg_within_tol=min_entry >= -tol_pos,
        distance_to_feasible=distance,
        tol_rank=tol_rank,
        tol_pos=tol_pos,
    )


def pinv_price(
    ps: PriceSystem,
    derivative: Derivative,
    *,
    tol_rank: float = 1e-12,
    tol_pos: float = 1e-9,
    residual_tol: float = 1e-7,
) -> tuple[float, PinvReport]:
    """Price a derivative as D^T q+; valid only on least-squares markets."""
    report = pinv_solve(
        ps,
        tol_rank=tol_rank,
        tol_pos=tol_pos,
        residual_tol=residual_tol,
        compute_distance=False,
    )
    if not report.is_least_squares_market:
        # the rejection report is the diagnostic artifact; spend the extra
        # LP on it to say how far from a valid measure q+ landed
        report = pinv_solve(
            ps,
            tol_rank=tol_rank,
            tol_pos=tol_pos,
            residual_tol=residual_tol,
            compute_distance=True,
        )
        raise NotLeastSquaresMarketError(
            "not a least-squares market: "
            f"residual={report.residual:.3e}, min entry={report.min_entry:.3e}",
            report,
        )
    return float(derivative.payoffs @ report.q_plus), report


def gamma_kappa(ps: PriceSystem, *, tol_rank: float = 1e-12) -> tuple[float, float]:
    """Projection mass of the unit price vector and payoff conditioning."""
    report = pinv_solve(ps, tol_rank=tol_rank, compute_distance=False)
    return report.gamma, report.kappa
