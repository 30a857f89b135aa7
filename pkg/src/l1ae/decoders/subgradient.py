"""Projected subgradient decoders for ``min ||x||_1  s.t.  A x = y``.

Two equivalent recursions with step ``alpha_t = beta / t``::

    pinv form:       x1 = A^+ y,     x_{t+1} = x_t - alpha_t (I - A^+ A) sign(x_t)
    transpose form:  x1 = At^T y,    x_{t+1} = x_t - alpha_t (I - At^T At) sign(x_t)

The transpose form is only a projection when ``At`` has orthonormal rows,
which :func:`row_normalize_singular` arranges without changing the null space.
"""

from dataclasses import dataclass

import numpy as np

from ..numerics import (RowSpaceSolver, SingularMatrixError, as_matrix, as_vector,
                        inv_sqrt_psd)


@dataclass(frozen=True)
class SubgradientConfig:
    T: int = 10
    beta: float = 1.0

    def __post_init__(self):
        if int(self.T) < 1:
            raise ValueError("T must be at least 1")

    def step(self, t):
        return self.beta / t


def _check(A, y):
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    if y.shape[0] != A.shape[0]:
        raise ValueError(f"y has length {y.shape[0]}, expected {A.shape[0]}")
    return A, y


def project_affine(A, y, z):
    """Euclidean projection of ``z`` onto ``{x : A x = y}``."""
    A, y = _check(A, y)
    z = as_vector(z, "z")
    if z.shape[0] != A.shape[1]:
        raise ValueError(f"z has length {z.shape[0]}, expected {A.shape[1]}")
    return z + RowSpaceSolver(A).pinv(y - A @ z)


def subgradient_decode_pinv(A, y, cfg, return_iterates=False):
    """Run the pinv-form recursion for ``cfg.T`` steps.

    Returns ``x_{T+1}``, or the list ``[x_1, ..., x_{T+1}]`` when
    ``return_iterates`` is set.
    """
    A, y = _check(A, y)
    solver = RowSpaceSolver(A)
    x = solver.pinv(y)
    iterates = [x]
    for t in range(1, cfg.T + 1):
        s = np.sign(x)
        x = x - cfg.step(t) * (s - solver.pinv(A @ s))
        iterates.append(x)
    return iterates if return_iterates else x


def row_normalize_singular(A):
    """``(A A^T)^{-1/2} A``: same null space, orthonormal rows."""
    A = as_matrix(A, "A")
    if A.shape[0] > A.shape[1]:
        raise ValueError(f"A must be wide, got {A.shape}")
    try:
        R = inv_sqrt_psd(A @ A.T)
    except SingularMatrixError as exc:
        raise SingularMatrixError(exc.smallest, exc.largest, "A A^T") from None
    return R @ A


def subgradient_decode_transpose(At, y, cfg, return_iterates=False):
    """Transpose-form recursion; no linear solves are needed."""
    At, y = _check(At, y)
    x = y @ At
    iterates = [x]
    for t in range(1, cfg.T + 1):
        s = np.sign(x)
        x = x - cfg.step(t) * (s - (At @ s) @ At)
        iterates.append(x)
    return iterates if return_iterates else x
