"""Best structured sparse approximations for the block and one-hot models."""

import numpy as np

from ..numerics import as_vector


def _top(scores, K):
    # stable sort on -score keeps the lowest index among ties
    return np.sort(np.argsort(-scores, kind="stable")[:K])


def structured_support(x, model, K):
    """Sorted coordinate indices kept by :func:`structured_approx`."""
    x = as_vector(x, "x")
    if x.shape[0] != model.d:
        raise ValueError(f"x has length {x.shape[0]}, model expects d={model.d}")
    if K < 0:
        raise ValueError("K must be non-negative")
    if model.kind == "block":
        J = model.J
        norms = np.einsum("nj,nj->n", x.reshape(-1, J), x.reshape(-1, J))
        blocks = _top(norms, min(K, model.N))
        return (blocks[:, None] * J + np.arange(J)).ravel()
    if model.kind == "onehot":
        best = np.empty(len(model.groups), dtype=np.int64)
        for g, (start, stop) in enumerate(model.groups):
            best[g] = start + int(np.argmax(np.abs(x[start:stop])))
        groups = _top(np.abs(x[best]), min(K, len(best)))
        return best[groups]
    raise ValueError(f"no structured projection for sparsity model {model.kind!r}")


def structured_approx(x, model, K):
    """Nearest point of ``M_K`` to ``x``.

    Block model: keep the ``K`` blocks of largest l2 norm.  One-hot model:
    keep the largest-magnitude entry of each of the ``K`` groups whose maxima
    are largest.  Ties go to the lowest index.
    """
    x = as_vector(x, "x")
    out = np.zeros_like(x)
    keep = structured_support(x, model, K)
    out[keep] = x[keep]
    return out


def structured_approx_B(x, model, K, B):
    """Approximation in the ``B``-order sum ``M_K + ... + M_K``.

    For both supported models the sum of ``B`` copies of ``M_K`` is
    ``M_{BK}``, so this is ``structured_approx(x, model, B * K)``.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    return structured_approx(x, model, B * K)
