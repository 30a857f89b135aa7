"""Readers and writers for the package's file formats.

``L1AE-MAT 1``
    ASCII header ``L1AE-MAT 1 <rows> <cols>\\n`` followed by rows*cols
    little-endian float64 values in row-major order.
``L1AE-MODEL 1``
    Header ``L1AE-MODEL 1 <m> <d> <T>\\n`` followed by the encoder matrix (same
    payload order as L1AE-MAT), beta, and for every block the BN arrays
    gamma, delta, running mean, running variance (all little-endian float64).
``L1AE-DS 1``
    Text: first line ``<d> <n>``, then one line per sample of space
    separated ``index:value`` pairs with 0-based indices.
"""

import csv
import hashlib
import os

import numpy as np

MAT_MAGIC = "L1AE-MAT"
MODEL_MAGIC = "L1AE-MODEL"
_LE_F8 = np.dtype("<f8")


class FormatError(ValueError):
    pass


def _read_header(fh, magic, n_fields):
    line = fh.readline()
    try:
        text = line.decode("ascii").rstrip("\n")
    except UnicodeDecodeError:
        raise FormatError(f"not a {magic} file: undecodable header") from None
    parts = text.split(" ")
    if len(parts) != n_fields + 2 or parts[0] != magic:
        raise FormatError(f"not a {magic} file: bad header {text!r}")
    if parts[1] != "1":
        raise FormatError(f"unsupported {magic} version {parts[1]!r}")
    try:
        fields = [int(p) for p in parts[2:]]
    except ValueError:
        raise FormatError(f"bad {magic} header {text!r}") from None
    if any(f < 0 for f in fields):
        raise FormatError(f"negative size in {magic} header {text!r}")
    return fields


def _read_f8(fh, count, what):
    raw = fh.read(count * 8)
    if len(raw) != count * 8:
        raise FormatError(f"truncated payload while reading {what}")
    return np.frombuffer(raw, dtype=_LE_F8).astype(np.float64)


def write_matrix(path, M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("write_matrix needs a 2-D array")
    with open(path, "wb") as fh:
        fh.write(f"{MAT_MAGIC} 1 {M.shape[0]} {M.shape[1]}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(M, dtype=_LE_F8).tobytes())


def read_matrix(path):
    with open(path, "rb") as fh:
        rows, cols = _read_header(fh, MAT_MAGIC, 2)
        data = _read_f8(fh, rows * cols, "matrix")
        if fh.read(1):
            raise FormatError("trailing bytes after matrix payload")
    return data.reshape(rows, cols)


def matrix_digest(M):
    """Short content hash used in provenance records."""
    M = np.ascontiguousarray(M, dtype=_LE_F8)
    h = hashlib.sha256(f"{M.shape}".encode())
    h.update(M.tobytes())
    return h.hexdigest()[:16]


def write_model(path, model):
    from .model import L1AEModel

    if not isinstance(model, L1AEModel):
        raise TypeError("write_model expects an L1AEModel")
    m, d = model.A.shape
    with open(path, "wb") as fh:
        fh.write(f"{MODEL_MAGIC} 1 {m} {d} {model.T}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(model.A, dtype=_LE_F8).tobytes())
        fh.write(np.array([model.beta], dtype=_LE_F8).tobytes())
        for bn in model.bn:
            for arr in (bn.gamma, bn.delta, bn.running_mean, bn.running_var):
                fh.write(np.ascontiguousarray(arr, dtype=_LE_F8).tobytes())


def read_model(path):
    from .model import BatchNormState, L1AEModel

    with open(path, "rb") as fh:
        m, d, T = _read_header(fh, MODEL_MAGIC, 3)
        A = _read_f8(fh, m * d, "encoder matrix").reshape(m, d)
        beta = float(_read_f8(fh, 1, "beta")[0])
        bn = []
        for t in range(T):
            arrays = [_read_f8(fh, d, f"block {t + 1} batch-norm state") for _ in range(4)]
            bn.append(BatchNormState(*arrays))
        if fh.read(1):
            raise FormatError("trailing bytes after model payload")
    return L1AEModel(A=A, beta=beta, T=T, bn=bn)


def write_history(path, history):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "valid_rmse"])
        for row in history:
            w.writerow([row.epoch, repr(float(row.train_loss)), repr(float(row.valid_rmse))])


def ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
