"""Measurement matrices that are not learned by the autoencoder.

Every constructor is deterministic given its seed (or training data).
"""

from dataclasses import dataclass

import numpy as np

from .data import dense_rows
from .decoders.lp import l1_min_pos
from .numerics import RowSpaceSolver, dct_matrix, truncated_svd

KINDS = ("gaussian", "fourier", "pca", "lbcs", "l1ae", "simple_ae")


@dataclass
class MeasurementScheme:
    """A measurement matrix plus how it should be decoded by default.

    ``decode`` is ``"l1pos"`` or ``"linear"``; ``basis`` is only meaningful
    for LBCS (``"gaussian"``, ``"dct"`` or ``"identity"``).
    """

    kind: str
    matrix: np.ndarray
    provenance: str = ""
    decode: str = "l1pos"
    basis: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("scheme matrix must be 2-D")
        if self.decode not in ("l1pos", "linear"):
            raise ValueError(f"unknown decoder {self.decode!r}")

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def d(self):
        return self.matrix.shape[1]

    def measure(self, X):
        return dense_rows(X) @ self.matrix.T

    def linear_decode(self, Y):
        """Minimum-norm solutions ``A^T (A A^T)^{-1} y`` for rows of ``Y``."""
        Y = np.atleast_2d(Y)
        return RowSpaceSolver(self.matrix).pinv(Y.T).T

    def decode_one(self, y):
        if self.decode == "linear":
            return self.linear_decode(y)[0]
        return l1_min_pos(self.matrix, y).x


def gaussian_matrix(m, d, seed):
    """i.i.d. ``N(0, 1/m)`` entries."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0 / np.sqrt(m), size=(m, d))


def fourier_rows(m, d, seed):
    """Row indices and complex rows drawn for :func:`partial_fourier`."""
    if m < 2 or m % 2:
        raise ValueError(f"partial Fourier needs an even m >= 2, got {m}")
    if m > 2 * d:
        raise ValueError(f"m={m} exceeds 2d={2 * d}")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, d, size=m // 2)
    k = np.arange(d)
    F = np.exp(-2j * np.pi * np.outer(rows, k) / d) / np.sqrt(m // 2)
    return rows, F


def partial_fourier(m, d, seed):
    """Real ``m x d`` matrix from ``m/2`` DFT rows drawn with replacement.

    Each drawn row contributes its real part and its imaginary part; rows are
    interleaved as ``[Re r1, Im r1, Re r2, Im r2, ...]``.
    """
    _, F = fourier_rows(m, d, seed)
    out = np.empty((m, d))
    out[0::2] = F.real
    out[1::2] = F.imag
    return out


def pca_scheme(train, m):
    """Top-``m`` right singular vectors of the training matrix; linear decode."""
    X = dense_rows(train)
    return MeasurementScheme("pca", truncated_svd(X, m), f"pca n={X.shape[0]}",
                             decode="linear")


def lbcs_basis(d, basis, seed):
    if basis == "gaussian":
        return gaussian_matrix(d, d, seed)
    if basis == "dct":
        return dct_matrix(d)
    if basis == "identity":
        return np.eye(d)
    raise ValueError(f"unknown LBCS basis {basis!r}")


def lbcs_scores(X, B):
    """Energy ``sum_i (b_j . x_i)^2`` captured by each basis row ``b_j``."""
    Z = dense_rows(X) @ B.T
    return np.einsum("ij,ij->j", Z, Z)


def lbcs_scheme(train, m, basis="gaussian", decode="l1pos", seed=0):
    """Keep the ``m`` basis rows that capture the most training energy."""
    X = dense_rows(train)
    d = X.shape[1]
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in [1, {d}], got {m}")
    B = lbcs_basis(d, basis, seed)
    scores = lbcs_scores(X, B)
    rows = np.sort(np.argsort(-scores, kind="stable")[:m])
    return MeasurementScheme("lbcs", B[rows], f"lbcs basis={basis} seed={seed}",
                             decode=decode, basis=basis)
