"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one for one and are used when the compiled
extension is unavailable (or when ``L1AE_PURE_PYTHON=1``).  Pivot choices
and rotation orderings are identical between the two, so results agree to
rounding.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
LIMIT = 2

RULE_BLAND = 0
RULE_DANTZIG = 1

# consecutive degenerate pivots tolerated before Dantzig pricing hands over
# to Bland's rule for the remainder of the solve
DEGENERATE_LIMIT = 50
_DEGENERATE_STEP = 1e-14


def jacobi_eigh(S, schedule, tol=1e-15, max_sweeps=60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    ``schedule`` is an int array of shape (rounds, pairs, 2) holding a
    round-robin ordering of all index pairs; pairs within one round are
    disjoint, so their rotations commute and are applied together.

    Returns the unsorted eigenvalues and a matrix whose *rows* are the
    matching eigenvectors, plus the number of sweeps used.
    """
    a = np.array(S, dtype=np.float64, copy=True)
    n = a.shape[0]
    vt = np.eye(n)
    scale = np.sqrt(np.sum(a * a))
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), vt, 0
    tiny = 1e-300
    sweeps = 0
    for sweep in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        sweeps = sweep + 1
        for rnd in schedule:
            P = rnd[:, 0]
            Q = rnd[:, 1]
            apq = a[P, Q]
            keep = np.abs(apq) > tiny
            if not keep.any():
                continue
            P, Q, apq = P[keep], Q[keep], apq[keep]
            theta = (a[Q, Q] - a[P, P]) / (2.0 * apq)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cc = c[:, None]
            sc = s[:, None]

            ap = a[P, :]
            aq = a[Q, :]
            a[P, :] = cc * ap - sc * aq
            a[Q, :] = sc * ap + cc * aq

            ap = a[:, P]
            aq = a[:, Q]
            a[:, P] = ap * c - aq * s
            a[:, Q] = ap * s + aq * c
            a[P, Q] = 0.0
            a[Q, P] = 0.0

            vp = vt[P, :]
            vq = vt[Q, :]
            vt[P, :] = cc * vp - sc * vq
            vt[Q, :] = sc * vp + cc * vq
    return np.diag(a).copy(), vt, sweeps


def simplex_iterate(At, c, basis, Binv, xB, in_basis, n_enter, max_iter,
                    rule, state, pivot_tol, opt_tol, zero_tol):
    """Run up to ``max_iter`` revised-simplex pivots in place.

    ``At`` holds the constraint columns as rows (shape (n, m)); only the
    first ``n_enter`` columns are eligible to enter.  ``Binv`` is the
    explicit basis inverse, updated by elementary row operations.
    ``state`` is a length-2 int array: current run of degenerate pivots and
    whether Bland's rule has been forced on.  Basic values within
    ``zero_tol`` of zero are treated as exactly zero, so degenerate ties are
    recognized despite roundoff.

    Returns ``(status, iterations)``.
    """
    m = Binv.shape[0]
    cand = At[:n_enter]
    c_enter = c[:n_enter]
    mask = in_basis[:n_enter].astype(bool)
    for it in range(max_iter):
        pi = c[basis] @ Binv
        d = c_enter - cand @ pi
        d[mask] = np.inf
        if rule == RULE_BLAND or state[1]:
            neg = np.flatnonzero(d < -opt_tol)
            if neg.size == 0:
                return OPTIMAL, it
            q = int(neg[0])
        else:
            q = int(np.argmin(d))
            if not d[q] < -opt_tol:
                return OPTIMAL, it
        w = Binv @ At[q]
        pos = np.flatnonzero(w > pivot_tol)
        if pos.size == 0:
            return UNBOUNDED, it
        ratios = np.where(xB[pos] > zero_tol, xB[pos], 0.0) / w[pos]
        theta = ratios.min()
        ties = pos[ratios <= theta * (1.0 + 1e-12)]
        r = int(ties[np.argmin(basis[ties])])
        theta = (xB[r] if xB[r] > zero_tol else 0.0) / w[r]

        if theta <= _DEGENERATE_STEP:
            state[0] += 1
            if rule == RULE_DANTZIG and state[0] > DEGENERATE_LIMIT:
                state[1] = 1
        else:
            state[0] = 0

        xB -= theta * w
        xB[np.abs(xB) <= zero_tol] = 0.0
        xB[r] = theta
        Binv[r, :] /= w[r]
        w[r] = 0.0
        Binv -= np.outer(w, Binv[r, :])

        leaving = basis[r]
        in_basis[leaving] = 0
        if leaving < n_enter:
            mask[leaving] = False
        in_basis[q] = 1
        mask[q] = True
        basis[r] = q
    return LIMIT, max_iter
