"""Recovery metrics and method x m x seed sweeps written as CSV.

A method name is ``<scheme>+<decoder>``:

schemes
    ``gauss``, ``fourier``, ``pca``, ``lbcs_gauss``, ``lbcs_dct``, ``l1ae``,
    ``simple_ae``
decoders
    ``l1pos`` (LP with positivity), ``l1`` (plain LP), ``cosamp_pos``
    (model-based CoSaMP), ``cosamp`` (same without the positivity clamp),
    ``linear`` (minimum-norm), ``net`` (the trained network's own output;
    only for ``l1ae`` and ``simple_ae``)
"""

import csv
import io
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from . import baselines, data
from .decoders.cosamp import CosampConfig, model_cosamp_pos
from .decoders.lp import OPTIMAL, l1_min, l1_min_pos
from .model import (L1AEModel, SimpleAEModel, TrainConfig, decoder_forward, encode,
                    sgd_train, simple_ae_train)

log = logging.getLogger(__name__)

EXACT_TOL = 1e-10
RESULT_FIELDS = ["dataset", "method", "m", "seed", "exact_fraction", "rmse",
                 "train_seconds", "decode_seconds", "status"]
SCHEMES = ("gauss", "fourier", "pca", "lbcs_gauss", "lbcs_dct", "l1ae", "simple_ae")
DECODERS = ("l1pos", "l1", "cosamp_pos", "cosamp", "linear", "net")
GENERATORS = ("block", "powerlaw", "unstructured", "toy", "file")


class ConfigError(ValueError):
    pass


@dataclass
class Metrics:
    exact_fraction: float
    rmse: float
    n_samples: int


def exact_recovered(x, xhat):
    x = x.to_dense() if hasattr(x, "to_dense") else np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xhat.shape}")
    return bool(np.linalg.norm(x - xhat) <= EXACT_TOL)


def compute_metrics(X, Xhat):
    """Exact-recovery fraction and ``sqrt(mean ||x - xhat||^2)``."""
    X = data.dense_rows(X)
    Xhat = np.atleast_2d(np.asarray(Xhat, dtype=np.float64))
    if X.shape != Xhat.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Xhat.shape}")
    n = X.shape[0]
    if n == 0:
        raise ValueError("no samples")
    err = np.linalg.norm(X - Xhat, axis=1)
    return Metrics(int(np.sum(err <= EXACT_TOL)) / n, float(np.sqrt(np.mean(err ** 2))), n)


@dataclass
class ResultRow:
    dataset: str
    method: str
    m: int
    seed: int
    exact_fraction: float = float("nan")
    rmse: float = float("nan")
    train_seconds: float = 0.0
    decode_seconds: float = 0.0
    status: str = "ok"

    def csv_values(self):
        return [self.dataset, self.method, self.m, self.seed, repr(float(self.exact_fraction)),
                repr(float(self.rmse)), f"{self.train_seconds:.3f}",
                f"{self.decode_seconds:.3f}", self.status]


@dataclass
class ExperimentSpec:
    """One sweep.  ``dataset`` holds the generator name and its parameters.

    ``dataset`` keys: ``name``, ``generator`` (block | powerlaw | unstructured
    | toy | file), generator parameters (``d``, ``J``, ``K``, ``k``),
    ``sizes`` (train, valid, test) or ``path`` for files.  ``training`` keys
    are the :class:`TrainConfig` fields plus ``depth``.  ``max_test`` caps the
    number of test samples decoded per cell.  With ``record_timing`` off the
    timing columns are written as zero so repeated runs give identical bytes.
    """

    dataset: dict
    methods: list
    m_grid: list
    seeds: list = field(default_factory=lambda: [0])
    training: dict = field(default_factory=dict)
    output: str = ""
    max_test: int = 0
    record_timing: bool = True
    model_dir: str = ""

    def __post_init__(self):
        gen = self.dataset.get("generator")
        if gen not in GENERATORS:
            raise ConfigError(f"dataset.generator must be one of {GENERATORS}, got {gen!r}")
        for method in self.methods:
            parse_method(method)
        for m in self.m_grid:
            if int(m) < 1:
                raise ConfigError(f"m must be positive, got {m}")
        unknown = set(self.training) - set(TrainConfig.__dataclass_fields__) - {"depth"}
        if unknown:
            raise ConfigError(f"unknown training keys: {sorted(unknown)}")

    @property
    def name(self):
        return str(self.dataset.get("name", self.dataset["generator"]))

    def train_config(self, seed):
        kw = {k: v for k, v in self.training.items() if k != "depth"}
        kw["seed"] = seed
        try:
            return TrainConfig(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad training block: {exc}") from None

    @property
    def depth(self):
        return int(self.training.get("depth", 10))


def parse_method(name):
    scheme, sep, decoder = str(name).partition("+")
    if not sep or scheme not in SCHEMES or decoder not in DECODERS:
        raise ConfigError(f"bad method {name!r}: expected <scheme>+<decoder> with scheme in "
                          f"{SCHEMES} and decoder in {DECODERS}")
    if decoder == "net" and scheme not in ("l1ae", "simple_ae"):
        raise ConfigError(f"decoder 'net' needs a trained network, not {scheme!r}")
    return scheme, decoder


def load_spec(path):
    """Read an :class:`ExperimentSpec` from a YAML file."""
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    for key in ("dataset", "methods", "m_grid"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
    known = set(ExperimentSpec.__dataclass_fields__)
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    if not isinstance(raw["dataset"], dict):
        raise ConfigError(f"{path}: dataset must be a mapping")
    if raw.get("training") is not None and not isinstance(raw["training"], dict):
        raise ConfigError(f"{path}: training must be a mapping")
    raw["training"] = raw.get("training") or {}
    raw["methods"] = list(raw.get("methods") or [])
    return ExperimentSpec(**raw)


def make_dataset(ds, seed, normalize=True):
    """Generate (or load) and normalize the dataset described by ``ds``."""
    gen = ds["generator"]
    sizes = tuple(ds.get("sizes", data.SYNTHETIC_SPLITS))
    if gen == "block":
        out = data.gen_block_sparse(int(ds["d"]), int(ds["J"]), int(ds["K"]), sizes, seed)
    elif gen == "powerlaw":
        out = data.gen_power_law(int(ds["d"]), int(ds["k"]), sizes, seed)
    elif gen == "unstructured":
        out = data.gen_unstructured(int(ds["d"]), int(ds["k"]), sizes, seed)
    elif gen == "toy":
        out = data.gen_toy(sizes, seed)
    else:
        out = data.assign_splits(data.load_sparse(ds["path"]), sizes, seed)
    return data.normalize_unit_l2(out) if normalize else out


def _model_path(spec, scheme, m, seed):
    if not spec.model_dir:
        return ""
    return os.path.join(spec.model_dir, f"{spec.name}_{scheme}_m{m}_T{spec.depth}_s{seed}.model")


def _train_l1ae(spec, dataset, m, seed):
    from .io import read_model, write_model

    path = _model_path(spec, "l1ae", m, seed)
    if path and os.path.exists(path):
        return read_model(path), 0.0
    model = L1AEModel.init(m, dataset.dim, spec.depth, seed=seed)
    t0 = time.perf_counter()
    model, _ = sgd_train(model, dataset, spec.train_config(seed))
    seconds = time.perf_counter() - t0
    if path:
        os.makedirs(spec.model_dir, exist_ok=True)
        write_model(path, model)
    return model, seconds


def _build_scheme(scheme, spec, dataset, m, seed, cache):
    """Return ``(matrix, network_or_None, train_seconds)``."""
    d = dataset.dim
    if scheme == "gauss":
        return baselines.gaussian_matrix(m, d, seed), None, 0.0
    if scheme == "fourier":
        return baselines.partial_fourier(m, d, seed), None, 0.0
    train = dataset.dense("train")
    if scheme == "pca":
        return baselines.pca_scheme(train, m).matrix, None, 0.0
    if scheme in ("lbcs_gauss", "lbcs_dct"):
        basis = "gaussian" if scheme == "lbcs_gauss" else "dct"
        return baselines.lbcs_scheme(train, m, basis, seed=seed).matrix, None, 0.0
    key = (scheme, m, seed)
    if key not in cache:
        if scheme == "l1ae":
            cache[key] = _train_l1ae(spec, dataset, m, seed)
        else:
            t0 = time.perf_counter()
            net, _ = simple_ae_train(dataset, m, spec.train_config(seed))
            cache[key] = net, time.perf_counter() - t0
    net, seconds = cache[key]
    return net.A, net, seconds


def _sparsity_model(ds, dim):
    gen = ds["generator"]
    if gen == "block":
        return data.SparsityModel.block(dim, int(ds["J"]), int(ds["K"]))
    if gen in ("unstructured", "powerlaw"):
        return data.SparsityModel.block(dim, 1, int(ds["k"]))
    if gen == "toy":
        return data.SparsityModel.block(dim, 1, 5)
    raise ConfigError("CoSaMP needs a generated dataset with a known sparsity model")


def decode_set(A, X, decoder, net=None, cosamp_model=None):
    """Decode every row of ``X`` from ``y = A x``; returns ``(Xhat, n_failed)``."""
    Y = X @ A.T
    if decoder == "net":
        if isinstance(net, SimpleAEModel):
            return net.forward(X)[0], 0
        return decoder_forward(net, encode(net, X), mode="inference")[0], 0
    if decoder == "linear":
        return baselines.MeasurementScheme("gaussian", A).linear_decode(Y), 0
    out = np.zeros_like(X)
    failed = 0
    for i, y in enumerate(Y):
        if decoder in ("l1pos", "l1"):
            sol = (l1_min_pos if decoder == "l1pos" else l1_min)(A, y)
            failed += sol.status != OPTIMAL
            out[i] = sol.x
        else:
            cfg = CosampConfig(cosamp_model, positive=decoder == "cosamp_pos")
            out[i] = model_cosamp_pos(A, y, cfg)
    return out, failed


def run_cell(spec, dataset, method, m, seed, cache):
    scheme, decoder = parse_method(method)
    row = ResultRow(spec.name, method, int(m), int(seed))
    try:
        if m >= dataset.dim:
            raise ConfigError(f"m={m} must be below d={dataset.dim}")
        A, net, row.train_seconds = _build_scheme(scheme, spec, dataset, m, seed, cache)
        X = dataset.dense("test")
        if spec.max_test:
            X = X[:spec.max_test]
        cosamp_model = (_sparsity_model(spec.dataset, dataset.dim)
                        if decoder.startswith("cosamp") else None)
        t0 = time.perf_counter()
        Xhat, failed = decode_set(A, X, decoder, net, cosamp_model)
        row.decode_seconds = time.perf_counter() - t0
        metrics = compute_metrics(X, Xhat)
        row.exact_fraction, row.rmse = metrics.exact_fraction, metrics.rmse
        if failed:
            row.status = f"lp_failures={failed}"
    except Exception as exc:  # recorded, the sweep goes on
        log.exception("cell %s m=%s seed=%s failed", method, m, seed)
        row.status = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    if not spec.record_timing:
        row.train_seconds = row.decode_seconds = 0.0
    return row


def run_experiment(spec):
    rows = []
    for seed in spec.seeds:
        if not spec.methods:
            break
        dataset = make_dataset(spec.dataset, int(seed))
        cache = {}
        for m in spec.m_grid:
            for method in spec.methods:
                rows.append(run_cell(spec, dataset, method, int(m), int(seed), cache))
                log.info("%s m=%s seed=%s rmse=%s", method, m, seed, rows[-1].rmse)
    rows.sort(key=lambda r: (r.dataset, r.method, r.m, r.seed))
    if spec.output:
        write_results(spec.output, rows)
    return rows


def write_results(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for row in rows:
            w.writerow(row.csv_values())


def read_results(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RESULT_FIELDS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for rec in reader:
            rows.append(ResultRow(rec["dataset"], rec["method"], int(rec["m"]), int(rec["seed"]),
                                  float(rec["exact_fraction"]), float(rec["rmse"]),
                                  float(rec["train_seconds"]), float(rec["decode_seconds"]),
                                  rec["status"]))
    return rows


@dataclass
class SummaryRow:
    dataset: str
    method: str
    m: int
    n_seeds: int
    exact_mean: float
    exact_std: float
    rmse_mean: float
    rmse_std: float


def summarize(rows):
    """Mean and population std across seeds per (dataset, method, m)."""
    groups = {}
    for r in rows:
        groups.setdefault((r.dataset, r.method, r.m), []).append(r)
    out = []
    for (ds, method, m), grp in sorted(groups.items()):
        ex = np.array([r.exact_fraction for r in grp])
        rm = np.array([r.rmse for r in grp])
        out.append(SummaryRow(ds, method, m, len(grp), float(ex.mean()), float(ex.std()),
                              float(rm.mean()), float(rm.std())))
    return out


def monotone_in_m(summary, dataset, method, allowed_violations=1, tol=0.0):
    """Whether mean exact fraction is non-decreasing in m for one method.

    Up to ``allowed_violations`` grid points may drop below their
    predecessor by more than ``tol``.
    """
    means = [s.exact_mean for s in sorted(summary, key=lambda s: s.m)
             if s.dataset == dataset and s.method == method]
    drops = sum(b < a - tol for a, b in zip(means, means[1:]))
    return drops <= allowed_violations


def report(path, out_csv=None):
    """Aggregate a results CSV; returns ``(summary rows, text table)``."""
    summary = summarize(read_results(path))
    if out_csv:
        with open(out_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            names = list(SummaryRow.__dataclass_fields__)
            w.writerow(names)
            for s in summary:
                w.writerow([asdict(s)[k] for k in names])
    buf = io.StringIO()
    buf.write(f"{'dataset':<14}{'method':<22}{'m':>5}{'seeds':>7}"
              f"{'exact':>18}{'rmse':>24}\n")
    for s in summary:
        buf.write(f"{s.dataset:<14}{s.method:<22}{s.m:>5}{s.n_seeds:>7}"
                  f"{s.exact_mean:>10.3f} ± {s.exact_std:<5.3f}"
                  f"{s.rmse_mean:>13.3e} ± {s.rmse_std:.2e}\n")
    return summary, buf.getvalue()


@dataclass
class DepthTrial:
    depth: int
    valid_rmse: float


def select_depth(dataset, m, config, t_max=30, step=5, threshold=0.01, seed=0):
    """Train with T = step, 2*step, ... and stop once the gain is small.

    The sweep stops when the best validation RMSE improves by less than
    ``threshold`` (relative) over the previous depth, or at ``t_max``.
    Returns ``(chosen depth, trials)``; the chosen depth is the last one
    that still gave a large enough improvement.
    """
    if step < 1 or t_max < step:
        raise ValueError("need 1 <= step <= t_max")
    trials = []
    chosen = step
    for depth in range(step, t_max + 1, step):
        model = L1AEModel.init(m, dataset.dim, depth, seed=seed)
        _, history = sgd_train(model, dataset, config)
        val = min((h.valid_rmse for h in history), default=float("inf"))
        trials.append(DepthTrial(depth, val))
        log.info("depth %d valid_rmse %.6g", depth, val)
        if len(trials) > 1:
            prev = trials[-2].valid_rmse
            if prev - val < threshold * prev:
                break
        chosen = depth
    return chosen, trials
