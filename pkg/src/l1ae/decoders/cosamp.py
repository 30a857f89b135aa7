"""Model-based CoSaMP with a positivity clamp."""

from dataclasses import dataclass, field

import numpy as np

from ..numerics import NumericsError, as_matrix, as_vector, least_squares
from .structured import structured_support

RIDGE = 1e-10


@dataclass(frozen=True)
class CosampConfig:
    model: object
    K: int = None
    max_iters: int = 50
    residual_tol: float = 1e-12
    stall_window: int = 3
    positive: bool = True

    def __post_init__(self):
        if self.K is None:
            object.__setattr__(self, "K", self.model.K)
        if self.K < 1 or self.max_iters < 1 or self.stall_window < 1:
            raise ValueError("K, max_iters and stall_window must be positive")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class CosampInfo:
    iterations: int = 0
    residual: float = np.nan
    ridge_fallback: bool = False
    stopped: str = ""
    residual_history: list = field(default_factory=list)


def _ls_on_support(A, y, support, info):
    A_T = A[:, support]
    try:
        return least_squares(A_T, y)
    except NumericsError:
        # merged supports can make A_T rank deficient (or wider than tall)
        info.ridge_fallback = True
        G = A_T.T @ A_T
        return np.linalg.solve(G + RIDGE * np.eye(G.shape[0]), A_T.T @ y)


def model_cosamp_pos(A, y, cfg, return_info=False):
    """Recover a nonnegative ``x`` in ``M_K`` from ``y = A x``.

    Each iteration proxies the residual with ``A^T r``, merges the support of
    its best ``M_2K`` approximation with the current one, solves least
    squares there, clamps negatives to zero (unless ``cfg.positive`` is off)
    and prunes back to ``M_K``.  Stops when ``||r|| <= residual_tol``, after
    ``max_iters``, or when the residual has not improved for
    ``stall_window`` iterations; the best iterate seen is returned.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    m, d = A.shape
    if y.shape[0] != m:
        raise ValueError(f"y has length {y.shape[0]}, expected {m}")
    model, K = cfg.model, cfg.K
    if model.d != d:
        raise ValueError(f"sparsity model is for d={model.d}, A has {d} columns")
    info = CosampInfo()
    x = np.zeros(d)
    r = y.copy()
    best_x, best_res = x, float(np.linalg.norm(r))
    info.residual = best_res
    since_best = 0
    for it in range(1, cfg.max_iters + 1):
        if best_res <= cfg.residual_tol:
            info.stopped = "residual"
            break
        e = r @ A
        omega = structured_support(e, model, 2 * K)
        support = np.union1d(omega, np.flatnonzero(x))
        b = np.zeros(d)
        b[support] = _ls_on_support(A, y, support, info)
        if cfg.positive:
            b = np.maximum(b, 0.0)
        keep = structured_support(b, model, K)
        x = np.zeros(d)
        x[keep] = b[keep]
        r = y - A @ x
        res = float(np.linalg.norm(r))
        info.iterations = it
        info.residual_history.append(res)
        if res < best_res:
            best_x, best_res, since_best = x, res, 0
        else:
            since_best += 1
            if since_best >= cfg.stall_window:
                info.stopped = "stall"
                break
    else:
        info.stopped = "max_iters"
    if best_res <= cfg.residual_tol and not info.stopped:
        info.stopped = "residual"
    info.residual = best_res
    return (best_x, info) if return_info else best_x
