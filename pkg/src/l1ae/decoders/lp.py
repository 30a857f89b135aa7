"""Two-phase revised simplex for the l1 decoders.

Standard form ``min c^T x  s.t.  A x = b, x >= 0`` is solved with an
explicit basis inverse that is updated by elementary row operations and
re-inverted every ``REFACTOR_EVERY`` pivots.  Sparse-recovery LPs have
heavily degenerate optima (most basics sit at zero), where pivoting can
stall for tens of thousands of steps, so by default the right-hand side is
shifted by a tiny deterministic positive perturbation.  The final basis is
then re-evaluated against the true right-hand side; reduced costs do not
depend on it, so a feasible restored basis is optimal.  Phase 1 starts from an
artificial identity basis; artificials that remain basic at zero level are
pivoted out where possible and otherwise mark redundant rows (they can never
move again, so they are simply left in place).  The pivot loop itself lives
in :mod:`l1ae.kernels`.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..numerics import as_matrix, as_vector

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

PIVOT_TOL = 1e-10
OPT_TOL = 1e-10
FEAS_TOL = 1e-9
ZERO_TOL = 1e-12
PERTURBATION = 1e-7
PERTURB_SEED = 12345
REFACTOR_EVERY = 64

_RULES = {"bland": kernels.RULE_BLAND, "dantzig": kernels.RULE_DANTZIG}


@dataclass
class LPSolution:
    x: np.ndarray
    objective: float
    status: str
    iterations: int
    residual: float = np.nan

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Simplex:
    def __init__(self, A, b, rule, backend, perturb=0.0):
        m, n = A.shape
        flip = np.where(b < 0, -1.0, 1.0)
        self.m, self.n = m, n
        self.b_true = b * flip
        self.b = self.b_true.copy()
        if perturb > 0.0 and m:
            u = np.random.default_rng(PERTURB_SEED).random(m)
            self.b += perturb * (1.0 + self.b_true.max()) * (0.5 + 0.5 * u)
        self.zero_tol = ZERO_TOL * (1.0 + (self.b_true.max() if m else 0.0))
        self.full = np.hstack([A * flip[:, None], np.eye(m)])
        self.At = np.ascontiguousarray(self.full.T)
        self.basis = np.arange(n, n + m, dtype=np.int64)
        self.in_basis = np.zeros(n + m, dtype=np.uint8)
        self.in_basis[n:] = 1
        self.Binv = np.eye(m)
        self.xB = self.b.copy()
        self.state = np.zeros(2, dtype=np.int64)
        self.rule = _RULES[rule]
        self.backend = backend
        self.iterations = 0

    def refactor(self):
        B = self.full[:, self.basis]
        self.Binv = np.ascontiguousarray(np.linalg.inv(B))
        self.xB = np.linalg.solve(B, self.b)
        self.xB[np.abs(self.xB) <= self.zero_tol] = 0.0

    def run(self, c, limit):
        while True:
            budget = min(REFACTOR_EVERY, limit - self.iterations)
            if budget <= 0:
                return kernels.LIMIT
            status, it = kernels.simplex_iterate(
                self.At, c, self.basis, self.Binv, self.xB, self.in_basis,
                self.n, budget, self.rule, self.state, PIVOT_TOL, OPT_TOL,
                self.zero_tol,
                backend=self.backend,
            )
            self.iterations += it
            if status != kernels.LIMIT:
                return status
            self.refactor()

    def pivot(self, r, q):
        w = self.Binv @ self.full[:, q]
        self.Binv[r] /= w[r]
        w_r = w.copy()
        w_r[r] = 0.0
        self.Binv -= np.outer(w_r, self.Binv[r])
        self.in_basis[self.basis[r]] = 0
        self.in_basis[q] = 1
        self.basis[r] = q
        self.iterations += 1

    def drive_out_artificials(self):
        A_struct = self.full[:, :self.n]
        for r in range(self.m):
            if self.basis[r] < self.n:
                continue
            row = self.Binv[r] @ A_struct
            row[self.in_basis[:self.n].astype(bool)] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > PIVOT_TOL * max(1.0, np.abs(row).max()):
                self.pivot(r, j)
            # otherwise the row is redundant: the artificial stays at zero
        self.refactor()

    def restore(self):
        """Drop the perturbation; True if the current basis stays feasible."""
        self.b = self.b_true
        self.refactor()
        tol = FEAS_TOL * (1.0 + (self.b.max() if self.m else 0.0))
        if self.m and (self.xB.min() < -tol or self.xB[self.basis >= self.n].sum() > tol):
            return False
        self.xB = np.maximum(self.xB, 0.0)
        return True

    def primal(self):
        x = np.zeros(self.n)
        structural = self.basis < self.n
        x[self.basis[structural]] = self.xB[structural]
        return x


def simplex(A, b, c, rule="dantzig", max_iter=None, backend=None, perturb=True):
    """Solve ``min c^T x  s.t.  A x = b, x >= 0`` by the two-phase method.

    ``rule`` selects the entering-variable rule: ``"bland"`` (smallest
    improving index) or ``"dantzig"`` (most negative reduced cost, falling
    back to Bland after a long run of degenerate pivots).  The default
    iteration limit is ``50 * (n + m)``.  With ``perturb`` the solve runs on
    a slightly shifted right-hand side first; unless that yields an optimal
    basis that is also feasible for the true one, the problem is re-solved
    without the shift.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    c = as_vector(c, "c")
    m, n = A.shape
    if b.shape[0] != m or c.shape[0] != n:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}, c {c.shape}")
    if rule not in _RULES:
        raise ValueError(f"unknown pivot rule {rule!r}")
    limit = 50 * (n + m) if max_iter is None else int(max_iter)
    if perturb:
        # the shift can make redundant rows inconsistent; only a clean
        # optimal answer is trusted, anything else is re-solved unshifted
        sol = _solve(A, b, c, rule, limit, backend, PERTURBATION)
        if sol is not None and sol.status == OPTIMAL:
            return sol
    return _solve(A, b, c, rule, limit, backend, 0.0)


def _solve(A, b, c, rule, limit, backend, perturb):
    m, n = A.shape
    lp = _Simplex(A, b, rule, backend, perturb)
    scale = 1.0 + (np.abs(lp.b).max() if m else 0.0)
    c1 = np.zeros(n + m)
    c1[n:] = 1.0
    status = lp.run(c1, limit)
    if status == kernels.LIMIT:
        return LPSolution(lp.primal(), np.nan, ITERATION_LIMIT, lp.iterations)
    lp.refactor()
    infeas = float(np.sum(lp.xB[lp.basis >= n]))
    if infeas > FEAS_TOL * scale:
        return LPSolution(lp.primal(), np.nan, INFEASIBLE, lp.iterations)
    lp.drive_out_artificials()

    c2 = np.zeros(n + m)
    c2[:n] = c
    lp.state[:] = 0
    status = lp.run(c2, limit)
    if perturb > 0.0 and not lp.restore():
        return None
    lp.refactor()
    x = lp.primal()
    residual = float(np.abs(A @ x - b).max()) if m else 0.0
    if status == kernels.UNBOUNDED:
        return LPSolution(x, -np.inf, UNBOUNDED, lp.iterations, residual)
    if status == kernels.LIMIT:
        return LPSolution(x, float(c @ x), ITERATION_LIMIT, lp.iterations, residual)
    return LPSolution(x, float(c @ x), OPTIMAL, lp.iterations, residual)


def l1_min_pos(A, y, rule="dantzig", max_iter=None, backend=None, perturb=True):
    """``min sum(x)  s.t.  A x = y, x >= 0``."""
    A = as_matrix(A, "A")
    return simplex(A, y, np.ones(A.shape[1]), rule=rule, max_iter=max_iter,
                   backend=backend, perturb=perturb)


def l1_min(A, y, rule="dantzig", max_iter=None, backend=None, perturb=True):
    """``min ||x||_1  s.t.  A x = y`` via the split ``x = p - q``, ``p, q >= 0``."""
    A = as_matrix(A, "A")
    d = A.shape[1]
    sol = simplex(np.hstack([A, -A]), y, np.ones(2 * d), rule=rule,
                  max_iter=max_iter, backend=backend, perturb=perturb)
    x = sol.x[:d] - sol.x[d:]
    objective = float(np.abs(x).sum()) if sol.status == OPTIMAL else sol.objective
    return LPSolution(x, objective, sol.status, sol.iterations, sol.residual)
