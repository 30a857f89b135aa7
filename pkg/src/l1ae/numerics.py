"""Dense linear-algebra kernels shared by the rest of the package.

Matrices and vectors are plain float64 numpy arrays; every public function
validates shapes and finiteness of its inputs and returns fresh arrays.
"""

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels


class NumericsError(ValueError):
    """Base class for linear-algebra precondition failures."""


class RankDeficientError(NumericsError):
    def __init__(self, column, ratio):
        self.column = column
        self.ratio = ratio
        super().__init__(
            f"rank deficient: column {column} is numerically dependent on "
            f"earlier columns (|R_kk|/max|R_ii| = {ratio:.3e})"
        )


class SingularMatrixError(NumericsError):
    def __init__(self, smallest, largest, what="matrix"):
        self.smallest = smallest
        self.largest = largest
        super().__init__(
            f"{what} is numerically singular: smallest eigenvalue {smallest:.3e} "
            f"vs largest {largest:.3e}"
        )


class AsymmetricMatrixError(NumericsError):
    pass


RANK_TOL = 1e-12
SYMMETRY_TOL = 1e-10
POWER_METHOD_THRESHOLD = 2000


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise NumericsError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericsError(f"{name} has non-finite entries")
    return a


def as_vector(v, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise NumericsError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericsError(f"{name} has non-finite entries")
    return v


def least_squares(A_sub, y):
    """Solve ``min_h ||A_sub h - y||_2`` for a tall full-column-rank matrix.

    Uses a Householder QR factorization.  Raises :class:`RankDeficientError`
    naming the first column whose R diagonal falls below ``1e-12`` times the
    largest one.
    """
    A_sub = as_matrix(A_sub, "A_sub")
    y = as_vector(y, "y")
    m, k = A_sub.shape
    if y.shape[0] != m:
        raise NumericsError(f"y has length {y.shape[0]}, expected {m}")
    if k > m:
        raise NumericsError(f"least squares needs k <= m, got {k} > {m}")
    if k == 0:
        return np.zeros(0)
    Q, R = np.linalg.qr(A_sub, mode="reduced")
    diag = np.abs(np.diag(R))
    top = diag.max()
    if top == 0.0:
        raise RankDeficientError(0, 0.0)
    small = np.flatnonzero(diag <= RANK_TOL * top)
    if small.size:
        col = int(small[0])
        raise RankDeficientError(col, diag[col] / top)
    return solve_triangular(R, Q.T @ y, lower=False)


def sym_eig(S, backend=None):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and the eigenvectors as orthonormal columns.
    """
    S = as_matrix(S, "S")
    n = S.shape[0]
    if S.shape != (n, n):
        raise NumericsError(f"S must be square, got {S.shape}")
    asym = np.max(np.abs(S - S.T)) if n else 0.0
    if asym > SYMMETRY_TOL:
        raise AsymmetricMatrixError(f"S is not symmetric (max |S - S^T| = {asym:.3e})")
    S = 0.5 * (S + S.T)
    w, vt, _ = kernels.jacobi_eigh(S, backend=backend)
    order = np.argsort(-w, kind="stable")
    return w[order], np.ascontiguousarray(vt[order].T)


def inv_sqrt_psd(S):
    """Return the symmetric inverse square root of a positive-definite matrix."""
    w, V = sym_eig(S)
    largest = w[0] if w.size else 0.0
    smallest = w[-1] if w.size else 0.0
    if w.size == 0 or largest <= 0.0 or smallest <= RANK_TOL * largest:
        raise SingularMatrixError(smallest, largest, "S")
    R = (V / np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


class RowSpaceSolver:
    """Cached Cholesky factor of ``A A^T`` for repeated pseudoinverse use.

    ``A`` must have full row rank; the factorization is rejected when the
    squared ratio of the extreme Cholesky pivots (a proxy for the condition
    number of ``A A^T``) drops below ``1e-12``.
    """

    def __init__(self, A):
        A = as_matrix(A, "A")
        m, d = A.shape
        if m > d:
            raise NumericsError(f"A must be wide (m <= d), got {A.shape}")
        self.A = A
        G = A @ A.T
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            w = np.linalg.eigvalsh(G)
            raise SingularMatrixError(w[0], w[-1], "A A^T") from None
        piv = np.diag(L) ** 2
        if piv.min() <= RANK_TOL * piv.max():
            raise SingularMatrixError(piv.min(), piv.max(), "A A^T")
        self.L = L

    def solve_gram(self, v):
        """Solve ``(A A^T) z = v``."""
        z = solve_triangular(self.L, v, lower=True)
        return solve_triangular(self.L.T, z, lower=False)

    def pinv(self, v):
        """Apply ``A^T (A A^T)^{-1}`` to ``v`` (vector or stacked columns)."""
        return self.A.T @ self.solve_gram(v)


def pinv_apply(A, v):
    """Minimum-norm solution of ``A x = v`` for full-row-rank ``A``."""
    v = as_vector(v, "v")
    A = as_matrix(A, "A")
    if v.shape[0] != A.shape[0]:
        raise NumericsError(f"v has length {v.shape[0]}, expected {A.shape[0]}")
    return RowSpaceSolver(A).pinv(v)


def _block_power(X, m, tol=1e-8, max_iter=500, seed=0):
    n, d = X.shape
    rng = np.random.default_rng(seed)
    # a few extra columns speed up convergence of the trailing vectors
    k = min(d, m + 8)
    Q, _ = np.linalg.qr(rng.standard_normal((d, k)))
    for _ in range(max_iter):
        Z = X.T @ (X @ Q)
        Q_new, _ = np.linalg.qr(Z)
        # largest principal angle between consecutive leading m-subspaces
        s = np.linalg.svd(Q[:, :m].T @ Q_new[:, :m], compute_uv=False)
        Q = Q_new
        if np.sqrt(max(0.0, 1.0 - s.min() ** 2)) <= tol:
            break
    # Rayleigh-Ritz on the converged subspace fixes ordering and rotation
    H = Q.T @ (X.T @ (X @ Q))
    w, U = sym_eig(0.5 * (H + H.T))
    return (Q @ U[:, :m]).T


def truncated_svd(X, m):
    """Top-``m`` right singular vectors of ``X`` as the rows of an m x d matrix.

    Small problems go through the smaller Gram matrix and :func:`sym_eig`;
    when ``min(n, d)`` exceeds 2000 a block power method is used instead.
    Signs are fixed so the largest-magnitude entry of each row is positive.
    """
    X = as_matrix(X, "X")
    n, d = X.shape
    if not 1 <= m <= min(n, d):
        raise NumericsError(f"m must lie in [1, {min(n, d)}], got {m}")
    if min(n, d) > POWER_METHOD_THRESHOLD:
        V = _block_power(X, m)
    elif d <= n:
        _, U = sym_eig(X.T @ X)
        V = U[:, :m].T
    else:
        w, U = sym_eig(X @ X.T)
        sigma = np.sqrt(np.maximum(w[:m], 0.0))
        if sigma[-1] <= RANK_TOL * max(sigma[0], 1e-300):
            raise SingularMatrixError(sigma[-1] ** 2, sigma[0] ** 2, "X X^T")
        V = (X.T @ U[:, :m] / sigma).T
        # re-orthonormalize to remove the conditioning loss of the division
        Qv, Rv = np.linalg.qr(V.T)
        V = (Qv * np.sign(np.diag(Rv))).T
    V = np.array(V, dtype=np.float64)
    idx = np.argmax(np.abs(V), axis=1)
    signs = np.sign(V[np.arange(V.shape[0]), idx])
    signs[signs == 0] = 1.0
    return V * signs[:, None]


def dct_matrix(d):
    """Orthonormal type-II DCT matrix (row k is the k-th cosine basis vector)."""
    if d < 1:
        raise NumericsError(f"d must be >= 1, got {d}")
    k = np.arange(d)[:, None]
    j = np.arange(d)[None, :]
    M = np.cos(np.pi * (2 * j + 1) * k / (2 * d))
    M[0] *= np.sqrt(1.0 / d)
    M[1:] *= np.sqrt(2.0 / d)
    return M
