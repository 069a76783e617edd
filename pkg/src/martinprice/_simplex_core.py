"""Two-phase revised simplex for dense equality-form programs.

Solves   minimize c @ x   subject to   A x = b,  x >= 0.

The basis inverse is held explicitly and rebuilt from a fresh LU
factorization every REFRESH_EVERY pivots or as soon as the primal
residual drifts past DRIFT_TOL. Entering columns follow Bland's rule by
default, with Dantzig pricing available; either way the leaving row is
chosen by the lexicographic ratio test, which terminates for any
entering rule and does not stall on degenerate plateaus. Redundant
equality rows discovered in phase 1 are dropped so degenerate inputs
cannot wedge the cleanup step. Phase 1 starts from a crash basis of
single-nonzero columns (embedded slacks) where possible; on programs
whose right-hand side is mostly zeros this avoids marching hundreds of
artificials in from an all-artificial start.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
CYCLED = "cycled"

REFRESH_EVERY = 50
DRIFT_TOL = 1e-10
PIVOT_TOL = 1e-11
RATIO_TIE_TOL = 1e-12
CRASH_MIN_PIVOT = 1e-7


class IterationLimitError(RuntimeError):
    """Pivot loop exceeded its iteration budget."""


class SingularBasisError(RuntimeError):
    """Basis too ill-conditioned to keep pivoting (or to extract from)."""


@dataclass
class CoreResult:
    status: str
    x: np.ndarray
    basis: np.ndarray
    objective: float
    iterations: int
    duals: np.ndarray | None
    dual_ray: np.ndarray | None
    active_rows: np.ndarray


def solve_standard_form(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    *,
    rule: str = "bland",
    max_iter: int | None = None,
    tol: float = 1e-9,
) -> CoreResult:
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule: {rule!r}")
    solver = _RevisedSimplex(A, b, c, rule=rule, max_iter=max_iter, tol=tol)
    return solver.run()


class _RevisedSimplex:
    def __init__(self, A, b, c, *, rule, max_iter, tol):
        A = np.array(A, dtype=np.float64, copy=True, ndmin=2)
        b = np.array(b, dtype=np.float64, copy=True).ravel()
        c = np.array(c, dtype=np.float64, copy=True).ravel()
        m, n = A.shape
        if b.shape != (m,) or c.shape != (n,):
            raise ValueError("inconsistent LP dimensions")
        # rows are flipped so b >= 0; duals are mapped back through the signs
        self.row_signs = np.where(b < 0.0, -1.0, 1.0)
        self.A = A * self.row_signs[:, None]
        self.b = b * self.row_signs
        self.c = c
        self.n = n
        self.rule = rule
        self.tol = tol
        self.max_iter = max_iter if max_iter is not None else 50 * (m + n + 10)
        self.iterations = 0
        self.active_rows = np.arange(m)

    # -- basis algebra -------------------------------------------------

    def _rebuild_inverse(self, T, basis):
        # scipy only warns on an exactly singular factor and then emits
        # nan, which would poison every later comparison; raise instead
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu = lu_factor(T[:, basis])
        u_diag = np.abs(np.diag(lu[0]))
        if not np.all(np.isfinite(u_diag)) or np.any(u_diag == 0.0):
            raise SingularBasisError(
                "refresh factorization hit a singular basis"
            )
        return lu_solve(lu, np.eye(len(basis)))

    def _pivot_update(self, B_inv, d, p):
        piv = d[p]
        B_inv[p, :] /= piv
        rows = np.arange(B_inv.shape[0]) != p
        B_inv[rows, :] -= np.outer(d[rows], B_inv[p, :])

    # -- pivot loop ----------------------------------------------------

    def _iterate(self, T, b, cost, basis, B_inv, allowed):
        """Run pivoting until optimal/unbounded. Mutates basis and B_inv."""
        m = T.shape[0]
        since_refresh = 0
        while True:
            if self.iterations >= self.max_iter:
                raise IterationLimitError(
                    f"simplex exceeded {self.max_iter} iterations"
                )
            x_B = B_inv @ b
            # refresh the factorization on drift, not only on the pivot count
            drift = np.max(np.abs(T[:, basis] @ x_B - b)) if m else 0.0
            if not np.isfinite(drift):
                # product-form updates degraded past repair; a nan here
                # would read as "no drift" and fake an optimal exit
                raise SingularBasisError(
                    "basis inverse lost finiteness during pivoting"
                )
            if since_refresh >= REFRESH_EVERY or drift > DRIFT_TOL:
                B_inv[...] = self._rebuild_inverse(T, basis)
                x_B = B_inv @ b
                since_refresh = 0
            y = cost[basis] @ B_inv
            reduced = cost[allowed] - y @ T[:, allowed]
            neg = np.nonzero(reduced < -self.tol)[0]
            if neg.size == 0:
                return OPTIMAL
            if self.rule == "bland":
                enter = allowed[neg[0]]
            else:
                enter = allowed[neg[np.argmin(reduced[neg])]]
            d = B_inv @ T[:, enter]
            pos = np.nonzero(d > PIVOT_TOL)[0]
            if pos.size == 0:
                return UNBOUNDED
            ratios = x_B[pos] / d[pos]
            best = np.min(ratios)
            ties = pos[ratios <= best + RATIO_TIE_TOL * max(1.0, abs(best))]
            if ties.size == 1:
                leave = int(ties[0])
            else:
                # lexicographic ratio test: the unique lexico-minimum of
                # (x_B_i, B_inv[i, :]) / d_i leaves. Each pivot then
                # shrinks the tableau lexico-strictly, so no basis can
                # repeat and degenerate plateaus cannot trap the walk the
                # way a smallest-index tie-break can.
                M = np.column_stack((x_B[ties], B_inv[ties])) / d[ties, None]
                leave = int(ties[np.lexsort(M.T[::-1])[0]])
            self._pivot_update(B_inv, d, leave)
            basis[leave] = enter
            self.iterations += 1
            since_refresh += 1

    # -- driver ----------------------------------------------------------

    def run(self) -> CoreResult:
        m = self.A.shape[0]
        n = self.n
        T = np.hstack([self.A, np.eye(m)])
        cost1 = np.concatenate([np.zeros(n), np.ones(m)])
        basis = np.arange(n, n + m)
        crashed = self._crash_basis(basis)
        B_inv = self._rebuild_inverse(T, basis) if crashed else np.eye(m)
        allowed = np.arange(n)  # artificials never re-enter
        status = self._iterate(T, self.b, cost1, basis, B_inv, allowed)
        if status != OPTIMAL:
            raise RuntimeError(f"phase 1 ended {status}; it must be bounded")
        x_B = B_inv @ self.b
        phase1_obj = float(cost1[basis] @ x_B)
        if phase1_obj > self.tol * max(1.0, np.max(np.abs(self.b), initial=0.0)):
            y = cost1[basis] @ B_inv
            ray = y * self.row_signs  # satisfies ray @ b_orig > 0, ray @ A_orig <= 0
            return CoreResult(
                status=INFEASIBLE,
                x=np.zeros(n),
                basis=basis.copy(),
                objective=float("nan"),
                iterations=self.iterations,
                duals=None,
                dual_ray=ray,
                active_rows=self.active_rows.copy(),
            )
        T, basis, B_inv = self._cleanup_artificials(T, basis, B_inv)
        m2 = T.shape[0]
        status = self._iterate(T, self.b, self.c, basis, B_inv, np.arange(n))
        if status in (UNBOUNDED, CYCLED):
            return CoreResult(
                status=status,
                x=np.zeros(n),
                basis=basis.copy(),
                objective=float("nan"),
                iterations=self.iterations,
                duals=None,
                dual_ray=None,
                active_rows=self.active_rows.copy(),
            )
        B_inv = self._rebuild_inverse(T, basis)
        x_B = B_inv @ self.b
        x = np.zeros(n)
        x[basis] = x_B
        duals = (self.c[basis] @ B_inv) * self.row_signs[self.active_rows]
        return CoreResult(
            status=OPTIMAL,
            x=x,
            basis=basis.copy(),
            objective=float(self.c @ x),
            iterations=self.iterations,
            duals=duals,
            dual_ray=None,
            active_rows=self.active_rows.copy(),
        )

    def _crash_basis(self, basis) -> bool:
        """Seat single-nonzero columns as initial basics for their rows.

        Such a column (an embedded slack, typically) is feasible at level
        b_i / a_ij >= 0, so its row needs no artificial. Mutates basis;
        returns whether anything was seated.
        """
        col_nnz = np.count_nonzero(self.A, axis=0)
        crashed = False
        for j in np.nonzero(col_nnz == 1)[0]:
            i = int(np.argmax(np.abs(self.A[:, j])))
            if basis[i] >= self.n and self.A[i, j] > CRASH_MIN_PIVOT:
                basis[i] = j
                crashed = True
        return crashed

    def _cleanup_artificials(self, T, basis, B_inv):
        """Pivot zero-level artificials out; drop rows where that is impossible."""
        n = self.n
        drop: list[int] = []
        for p in np.nonzero(basis >= n)[0]:
            row = B_inv[p, :] @ T[:, :n]
            cands = np.nonzero(np.abs(row) > 1e-9)[0]
            cands = cands[~np.isin(cands, basis)]
            if cands.size:
                enter = int(cands[0])
                d = B_inv @ T[:, enter]
                self._pivot_update(B_inv, d, p)
                basis[p] = enter
            else:
                drop.append(int(p))
        if not drop:
            return T, basis, B_inv
        keep = np.setdiff1d(np.arange(T.shape[0]), np.array(drop, dtype=int))
        self.active_rows = self.active_rows[keep]
        self.A = self.A[keep]
        self.b = self.b[keep]
        # one basic variable per row, so dropping rows drops their basics
        T2 = np.hstack([self.A, np.eye(keep.size)])
        basis2 = basis[keep]
        B_inv2 = self._rebuild_inverse(T2, basis2)
        return T2, basis2, B_inv2
