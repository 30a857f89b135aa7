"""Sparse datasets: synthetic generators, the L1AE-DS text format, splits.

Samples are stored as the rows of a ``scipy.sparse`` CSR matrix.  Every
generator is a pure function of its arguments and seed.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

TRAIN, VALID, TEST = 0, 1, 2
SPLIT_NAMES = ("train", "valid", "test")

# train / valid / test sizes of the synthetic benchmarks
SYNTHETIC_SPLITS = (6000, 2000, 2000)


class SparseFormatError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        shown = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems[:20])
        more = len(self.problems) - 20
        if more > 0:
            shown += f"; ... and {more} more"
        super().__init__(f"malformed sparse dataset: {shown}")


@dataclass(frozen=True)
class SparseVector:
    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D of equal length")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size and (idx[0] < 0 or idx[-1] >= self.dim):
            raise ValueError(f"index out of range for dimension {self.dim}")
        if np.any(np.diff(idx) == 0):
            raise ValueError("duplicate indices")
        if not np.all(np.isfinite(val)):
            raise ValueError("non-finite values")
        keep = val != 0.0
        object.__setattr__(self, "indices", idx[keep])
        object.__setattr__(self, "values", val[keep])

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x)
        return cls(x.shape[0], idx, x[idx])

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    @property
    def nnz(self):
        return int(self.indices.size)


@dataclass(frozen=True)
class SparsityModel:
    """Declarative description of the allowed supports.

    ``kind`` is one of ``block``, ``onehot``, ``powerlaw``, ``unstructured``
    or ``toy``.  Blocks are the aligned runs ``[bJ, (b+1)J)``; one-hot
    groups are half-open ``(start, stop)`` ranges partitioning ``[0, d)``.
    ``K`` counts blocks (or groups) for the structured kinds and ``k``
    counts nonzeros for the unstructured ones.
    """

    kind: str
    d: int
    J: int = 1
    K: int = 1
    k: int = 0
    groups: tuple = ()

    def __post_init__(self):
        if self.kind == "block":
            if self.J < 1 or self.d % self.J:
                raise ValueError(f"block size {self.J} does not divide d={self.d}")
            if not 1 <= self.K <= self.d // self.J:
                raise ValueError(f"K={self.K} blocks out of range for N={self.d // self.J}")
        elif self.kind == "onehot":
            pos = 0
            for start, stop in self.groups:
                if start != pos or stop <= start:
                    raise ValueError("one-hot groups must partition [0, d) in order")
                pos = stop
            if pos != self.d:
                raise ValueError("one-hot groups must cover [0, d)")
        elif self.kind in ("powerlaw", "unstructured", "toy"):
            if not 0 <= self.k <= self.d:
                raise ValueError(f"k={self.k} out of range for d={self.d}")
        else:
            raise ValueError(f"unknown sparsity model {self.kind!r}")

    @classmethod
    def block(cls, d, J, K):
        return cls("block", d, J=J, K=K)

    @classmethod
    def onehot(cls, sizes, K=None):
        bounds = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        groups = tuple((int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]))
        return cls("onehot", int(bounds[-1]), K=len(groups) if K is None else K, groups=groups)

    @classmethod
    def power_law(cls, d, k):
        return cls("powerlaw", d, k=k)

    @classmethod
    def unstructured(cls, d, k):
        return cls("unstructured", d, k=k)

    @classmethod
    def toy(cls):
        return cls("toy", 100, k=5)

    @property
    def N(self):
        return self.d // self.J if self.kind == "block" else None

    @property
    def sparsity(self):
        if self.kind == "block":
            return self.K * self.J
        if self.kind == "onehot":
            return self.K
        return self.k

    def contains_support(self, support):
        """Whether a support (index array) lies in some allowed support set."""
        support = np.unique(np.asarray(support, dtype=np.int64))
        if support.size and (support[0] < 0 or support[-1] >= self.d):
            return False
        if self.kind == "block":
            return np.unique(support // self.J).size <= self.K
        if self.kind == "onehot":
            starts = np.array([g[0] for g in self.groups])
            gid = np.searchsorted(starts, support, side="right") - 1
            return np.unique(gid).size == gid.size and gid.size <= self.K
        if self.kind == "toy":
            return support.size <= self.k and bool(np.all(support < 20))
        return support.size <= self.k


@dataclass
class SparseDataset:
    X: sp.csr_matrix
    split: np.ndarray
    seed: object = None
    model: SparsityModel = None
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = sp.csr_matrix(self.X, dtype=np.float64)
        self.X.sort_indices()
        self.split = np.asarray(self.split, dtype=np.int8)
        if self.split.shape != (self.X.shape[0],):
            raise ValueError("split tags must have one entry per sample")

    @property
    def dim(self):
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def sample(self, i):
        row = self.X.getrow(i)
        return SparseVector(self.dim, row.indices.copy(), row.data.copy())

    def __iter__(self):
        for i in range(len(self)):
            yield self.sample(i)

    def split_sizes(self):
        return tuple(int(np.sum(self.split == s)) for s in (TRAIN, VALID, TEST))

    def subset(self, name):
        code = SPLIT_NAMES.index(name)
        rows = np.flatnonzero(self.split == code)
        return replace(self, X=self.X[rows], split=self.split[rows], report=dict(self.report))

    def dense(self, name=None):
        X = self.X if name is None else self.subset(name).X
        return X.toarray()


def _split_tags(splits):
    if isinstance(splits, (int, np.integer)):
        splits = (int(splits), 0, 0)
    if len(splits) != 3 or any(int(s) < 0 for s in splits):
        raise ValueError(f"splits must be n or (train, valid, test), got {splits!r}")
    return np.repeat(np.arange(3, dtype=np.int8), [int(s) for s in splits])


def _uniform_values(rng, size):
    # (0, 1]: stays inside [0, 1] and never produces an explicit zero
    return 1.0 - rng.random(size)


def _assemble(rows_idx, rows_val, d, splits, seed, model):
    tags = _split_tags(splits)
    n = tags.size
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows_idx])
    indices = np.concatenate(rows_idx) if n else np.zeros(0, dtype=np.int64)
    values = np.concatenate(rows_val) if n else np.zeros(0)
    X = sp.csr_matrix((values, indices, indptr), shape=(n, d))
    return SparseDataset(X, tags, seed=seed, model=model)


def gen_block_sparse(d, J, K, n, seed):
    """K-block-sparse samples: K random aligned width-J blocks, Uniform values."""
    model = SparsityModel.block(d, J, K)
    N = d // J
    rng = np.random.default_rng(seed)
    total = int(_split_tags(n).size)
    offsets = np.arange(J)
    rows_idx, rows_val = [], []
    for _ in range(total):
        blocks = np.sort(rng.choice(N, size=K, replace=False))
        rows_idx.append((blocks[:, None] * J + offsets).ravel())
        rows_val.append(_uniform_values(rng, K * J))
    return _assemble(rows_idx, rows_val, d, n, seed, model)


def power_law_weights(d):
    w = 1.0 / np.arange(1, d + 1)
    return w / w.sum()


def gen_power_law(d, k, n, seed):
    """Support of size k drawn sequentially without replacement, weights 1/i."""
    model = SparsityModel.power_law(d, k)
    rng = np.random.default_rng(seed)
    p = power_law_weights(d)
    total = int(_split_tags(n).size)
    rows_idx, rows_val = [], []
    for _ in range(total):
        support = np.sort(rng.choice(d, size=k, replace=False, p=p))
        rows_idx.append(support)
        rows_val.append(_uniform_values(rng, k))
    return _assemble(rows_idx, rows_val, d, n, seed, model)


def gen_unstructured(d, k, n, seed):
    model = SparsityModel.unstructured(d, k)
    rng = np.random.default_rng(seed)
    total = int(_split_tags(n).size)
    rows_idx, rows_val = [], []
    for _ in range(total):
        rows_idx.append(np.sort(rng.choice(d, size=k, replace=False)))
        rows_val.append(_uniform_values(rng, k))
    return _assemble(rows_idx, rows_val, d, n, seed, model)


def gen_toy(n, seed):
    """d=100 samples with 5 nonzeros placed uniformly in the first 20 coordinates."""
    model = SparsityModel.toy()
    rng = np.random.default_rng(seed)
    total = int(_split_tags(n).size)
    rows_idx, rows_val = [], []
    for _ in range(total):
        rows_idx.append(np.sort(rng.choice(20, size=5, replace=False)))
        rows_val.append(_uniform_values(rng, 5))
    return _assemble(rows_idx, rows_val, 100, n, seed, model)


def normalize_unit_l2(dataset):
    """Scale every sample to unit l2 norm; all-zero samples are dropped and counted."""
    X = dataset.X
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    keep = norms > 0.0
    X = sp.diags(1.0 / norms[keep]) @ X[keep]
    report = dict(dataset.report)
    report["dropped_zero"] = report.get("dropped_zero", 0) + int(np.sum(~keep))
    return replace(dataset, X=sp.csr_matrix(X), split=dataset.split[keep], report=report)


def assign_splits(dataset, sizes, seed=None):
    """Tag samples train/valid/test; a seed shuffles which samples land where."""
    sizes = tuple(int(s) for s in sizes)
    if sum(sizes) != len(dataset):
        raise ValueError(f"split sizes {sizes} do not sum to {len(dataset)}")
    tags = _split_tags(sizes)
    if seed is not None:
        tags = tags[np.random.default_rng(seed).permutation(tags.size)]
    return replace(dataset, split=tags)


def _parse_line(line, d, lineno, problems):
    idx, val = [], []
    for tok in line.split():
        key, sep, value = tok.partition(":")
        if not sep:
            problems.append((lineno, f"token {tok!r} is not index:value"))
            return None
        try:
            i = int(key)
        except ValueError:
            problems.append((lineno, f"non-integer index {key!r}"))
            return None
        try:
            v = float(value)
        except ValueError:
            problems.append((lineno, f"non-numeric value {value!r}"))
            return None
        if not np.isfinite(v):
            problems.append((lineno, f"non-finite value {value!r}"))
            return None
        if not 0 <= i < d:
            problems.append((lineno, f"index {i} outside [0, {d})"))
            return None
        idx.append(i)
        val.append(v)
    if len(set(idx)) != len(idx):
        problems.append((lineno, "duplicate index"))
        return None
    return idx, val


def load_sparse(path):
    """Read an L1AE-DS file; every sample is tagged ``train``.

    ``report["empty_lines"]`` lists the 1-based line numbers of all-zero
    samples; malformed lines raise :class:`SparseFormatError` listing every
    offending line.
    """
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SparseFormatError([(1, "missing '<d> <n>' header")])
    head = lines[0].split()
    try:
        d, n = int(head[0]), int(head[1])
        if len(head) != 2 or d < 1 or n < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise SparseFormatError([(1, f"bad header {lines[0]!r}, expected '<d> <n>'")]) from None
    body = lines[1:]
    if len(body) != n:
        raise SparseFormatError([(1, f"header declares {n} samples but file has {len(body)}")])
    problems, rows_idx, rows_val, empty = [], [], [], []
    for k, line in enumerate(body):
        lineno = k + 2
        parsed = _parse_line(line, d, lineno, problems)
        if parsed is None:
            continue
        if not parsed[0]:
            empty.append(lineno)
        rows_idx.append(np.asarray(parsed[0], dtype=np.int64))
        rows_val.append(np.asarray(parsed[1], dtype=np.float64))
    if problems:
        raise SparseFormatError(problems)
    ds = _assemble(rows_idx, rows_val, d, n, None, None)
    ds.report["empty_lines"] = empty
    ds.report["source"] = str(path)
    return ds


def save_sparse(dataset, path):
    """Write the L1AE-DS text format (values in shortest round-trip repr)."""
    X = dataset.X
    with open(path, "w") as fh:
        fh.write(f"{X.shape[1]} {X.shape[0]}\n")
        for i in range(X.shape[0]):
            lo, hi = X.indptr[i], X.indptr[i + 1]
            fh.write(" ".join(f"{j}:{v!r}" for j, v in zip(X.indices[lo:hi].tolist(), X.data[lo:hi].tolist())))
            fh.write("\n")


def write_split_manifest(dataset, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "split"])
        for i, s in enumerate(dataset.split.tolist()):
            w.writerow([i, SPLIT_NAMES[s]])


def dense_rows(X):
    """Return ``X`` (sparse matrix, SparseVector, or array) as a 2-D float array."""
    if isinstance(X, SparseVector):
        return X.to_dense()[None, :]
    if sp.issparse(X):
        return X.toarray()
    X = np.asarray(X, dtype=np.float64)
    return X[None, :] if X.ndim == 1 else X
