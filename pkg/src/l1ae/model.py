"""The l1 autoencoder and the simple linear-ReLU autoencoder baseline.

Samples are processed in batches stored as the rows of an ``(n, d)`` array.
For the l1-AE with encoder ``A`` (m x d) the forward pass is::

    x1      = A^T A x
    u_t     = BN_t(x_t)
    x_{t+1} = u_t - (beta / t) * (s_t - A^T A s_t),   s_t = sign(u_t)
    x_hat   = ReLU(x_{T+1})

``(I - A^T A) v`` is always formed as ``v - (v A^T) A``; the d x d matrix is
never built.  Gradients are derived by hand: ``sign`` has zero derivative
everywhere and ReLU has zero derivative at and below zero.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .data import dense_rows

log = logging.getLogger(__name__)

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


class StaleTapeError(RuntimeError):
    pass


class EmptyValidationError(ValueError):
    pass


@dataclass
class BatchNormState:
    gamma: np.ndarray
    delta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = BN_EPS
    momentum: float = BN_MOMENTUM

    @classmethod
    def fresh(cls, d):
        return cls(np.ones(d), np.zeros(d), np.zeros(d), np.ones(d))

    def copy(self):
        return BatchNormState(self.gamma.copy(), self.delta.copy(),
                              self.running_mean.copy(), self.running_var.copy(),
                              self.eps, self.momentum)


@dataclass
class TrainConfig:
    """Minibatch SGD settings with validation-based early stopping."""

    batch_size: int = 128
    learning_rate: float = 0.01
    n_max_epochs: int = 20000
    n_validation: int = 10
    n_no_improve: int = 5
    seed: int = 0
    # None means learning_rate / d: the beta gradient sums over all d output
    # coordinates and diverges at the shared rate
    beta_learning_rate: float = None
    # wall-clock cap in seconds; the best checkpoint so far is returned
    max_seconds: float = None

    def __post_init__(self):
        for name in ("batch_size", "n_validation", "n_no_improve"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.n_max_epochs < 0:
            raise ValueError("n_max_epochs must be non-negative")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.beta_learning_rate is not None and self.beta_learning_rate < 0:
            raise ValueError("beta_learning_rate must be non-negative")

    def beta_rate(self, d):
        if self.beta_learning_rate is None:
            return self.learning_rate / d
        return self.beta_learning_rate


# Training parameters per dataset (depth, batch size, learning rate, N_max,
# N_validation, N_no_improve).
TRAINING_PRESETS = {
    "toy": (10, 128, 0.01, 20000, 10, 5),
    "synthetic1": (10, 128, 0.01, 20000, 10, 5),
    "synthetic2": (5, 128, 0.01, 20000, 10, 1),
    "synthetic3": (5, 128, 0.01, 20000, 10, 1),
    "amazon": (60, 256, 0.01, 20000, 1, 1),
    "wiki10-31k": (10, 256, 0.001, 5000, 10, 1),
    "rcv1": (10, 256, 0.001, 1000, 1, 50),
}


def preset_config(name, seed=0):
    """Return ``(depth, TrainConfig)`` for one of the tabulated datasets."""
    depth, bs, lr, n_max, n_val, n_no = TRAINING_PRESETS[name.lower()]
    return depth, TrainConfig(bs, lr, n_max, n_val, n_no, seed)


@dataclass
class HistoryRow:
    epoch: int
    train_loss: float
    valid_rmse: float


@dataclass
class ForwardTape:
    """Activations cached by the forward pass for :func:`backward`."""

    version: int
    Y: np.ndarray
    xhat: list = field(default_factory=list)   # normalized BN inputs per block
    inv_std: list = field(default_factory=list)
    signs: list = field(default_factory=list)
    sAt: list = field(default_factory=list)     # s_t A^T, shape (n, m)
    x_last: np.ndarray = None                   # x_{T+1} before the ReLU
    mode: str = "train"


@dataclass
class Gradients:
    dA: np.ndarray
    dbeta: float
    dgamma: list
    ddelta: list


class L1AEModel:
    """Linear encoder plus T unrolled projected-subgradient decoder blocks."""

    def __init__(self, A, beta=1.0, T=10, bn=None, use_bn=True, use_relu=True):
        self.A = np.array(A, dtype=np.float64)
        m, d = self.A.shape
        if m >= d:
            raise ValueError(f"encoder must compress: m={m} >= d={d}")
        if T < 1:
            raise ValueError("decoder depth T must be at least 1")
        self.beta = float(beta)
        self.T = int(T)
        self.bn = [BatchNormState.fresh(d) for _ in range(T)] if bn is None else list(bn)
        if len(self.bn) != self.T:
            raise ValueError("need one batch-norm state per block")
        self.use_bn = use_bn
        self.use_relu = use_relu
        self.version = 0

    @classmethod
    def init(cls, m, d, T, seed=0, **kwargs):
        """Gaussian encoder with standard deviation 1/sqrt(d), beta = 1."""
        rng = np.random.default_rng(seed)
        A = rng.normal(0.0, 1.0 / np.sqrt(d), size=(m, d))
        return cls(A, beta=1.0, T=T, **kwargs)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    def copy(self):
        out = L1AEModel(self.A.copy(), self.beta, self.T,
                        [b.copy() for b in self.bn], self.use_bn, self.use_relu)
        out.version = self.version
        return out

    def encode(self, X):
        return encode(self, X)

    def predict(self, X):
        """Encode then decode in inference mode."""
        return decoder_forward(self, encode(self, X), mode="inference")[0]

    def apply_gradients(self, grads, lr, beta_lr=None):
        self.A -= lr * grads.dA
        self.beta -= (lr if beta_lr is None else beta_lr) * grads.dbeta
        if self.use_bn:
            for bn, dg, dd in zip(self.bn, grads.dgamma, grads.ddelta):
                bn.gamma -= lr * dg
                bn.delta -= lr * dd
        self.version += 1

    # uniform hooks used by the generic trainer
    def _train_step(self, X, config):
        out, tape = decoder_forward(self, encode(self, X), mode="train")
        batch_loss = _mean_sq(X, out)
        self.apply_gradients(backward(self, X, tape, out), config.learning_rate,
                             config.beta_rate(self.d))
        return batch_loss


def encode(model, x):
    """``y = A x`` for a SparseVector, dense vector, or batch of rows."""
    A = model.A
    if hasattr(x, "indices") and hasattr(x, "dim") and not hasattr(x, "shape"):
        if x.dim != A.shape[1]:
            raise ValueError(f"sample dimension {x.dim} != encoder width {A.shape[1]}")
        return A[:, x.indices] @ x.values
    if hasattr(x, "tocsr"):
        if x.shape[1] != A.shape[1]:
            raise ValueError(f"sample dimension {x.shape[1]} != encoder width {A.shape[1]}")
        return np.asarray((x @ A.T))
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != A.shape[1]:
        raise ValueError(f"sample dimension {x.shape[-1]} != encoder width {A.shape[1]}")
    return x @ A.T


def decoder_forward(model, Y, mode="train", update_running=True):
    """Run the T decoder blocks on measurements ``Y`` (shape (n, m) or (m,)).

    In ``train`` mode batch statistics drive the normalization and, unless
    ``update_running`` is false, the running averages are updated.
    ``inference`` mode uses the running averages.
    Returns ``(x_hat, tape)``.
    """
    if mode not in ("train", "inference"):
        raise ValueError(f"mode must be 'train' or 'inference', got {mode!r}")
    A = model.A
    single = np.ndim(Y) == 1
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if Y.shape[1] != A.shape[0]:
        raise ValueError(f"measurement dimension {Y.shape[1]} != m={A.shape[0]}")
    tape = ForwardTape(version=model.version, Y=Y, mode=mode)
    x = Y @ A
    for t in range(1, model.T + 1):
        if model.use_bn:
            bn = model.bn[t - 1]
            if mode == "train":
                mu = x.mean(axis=0)
                xc = x - mu
                var = np.mean(xc * xc, axis=0)
                if update_running:
                    bn.running_mean *= bn.momentum
                    bn.running_mean += (1.0 - bn.momentum) * mu
                    bn.running_var *= bn.momentum
                    bn.running_var += (1.0 - bn.momentum) * var
            else:
                xc = x - bn.running_mean
                var = bn.running_var
            inv_std = 1.0 / np.sqrt(var + bn.eps)
            xn = xc * inv_std
            u = xn * bn.gamma + bn.delta
            tape.xhat.append(xn)
            tape.inv_std.append(inv_std)
        else:
            u = x
        s = np.sign(u)
        sAt = s @ A.T
        x = u - (model.beta / t) * (s - sAt @ A)
        tape.signs.append(s)
        tape.sAt.append(sAt)
    tape.x_last = x
    out = np.maximum(x, 0.0) if model.use_relu else x
    return (out[0] if single else out), tape


def _mean_sq(X, out):
    diff = out - X
    return float(np.einsum("ij,ij->", diff, diff) / X.shape[0])


def loss(model, batch, update_running=False):
    """Mean squared l2 reconstruction error of a batch (train-mode forward)."""
    X = dense_rows(batch)
    if X.shape[0] == 0:
        raise ValueError("loss needs a nonempty batch")
    out, _ = decoder_forward(model, encode(model, X), mode="train",
                             update_running=update_running)
    return _mean_sq(X, out)


def backward(model, batch, tape, out=None):
    """Exact reverse-mode gradients of :func:`loss` for the taped forward pass."""
    if tape.version != model.version:
        raise StaleTapeError("tape was recorded before the last parameter update")
    if tape.mode != "train":
        raise ValueError("backward needs a train-mode tape")
    X = dense_rows(batch)
    A = model.A
    n = X.shape[0]
    x_last = tape.x_last
    if out is None:
        out = np.maximum(x_last, 0.0) if model.use_relu else x_last
    G = (2.0 / n) * (out - X)
    if model.use_relu:
        G = G * (x_last > 0.0)

    dA = np.zeros_like(A)
    dbeta = 0.0
    dgamma = [None] * model.T
    ddelta = [None] * model.T
    for t in range(model.T, 0, -1):
        alpha = model.beta / t
        s = tape.signs[t - 1]
        sAt = tape.sAt[t - 1]
        GAt = G @ A.T
        # d/d alpha of -alpha * (s - s A^T A)
        dalpha = -(np.einsum("ij,ij->", G, s) - np.einsum("ij,ij->", GAt, sAt))
        dbeta += dalpha / t
        # + alpha * s A^T A contributes alpha * ((s A^T)^T G + (G A^T)^T s)
        dA += alpha * (sAt.T @ G + GAt.T @ s)
        if model.use_bn:
            bn = model.bn[t - 1]
            xn = tape.xhat[t - 1]
            g_sum = G.sum(axis=0)
            gx_sum = np.einsum("ij,ij->j", G, xn)
            dgamma[t - 1] = gx_sum
            ddelta[t - 1] = g_sum
            G = (bn.gamma * tape.inv_std[t - 1] / n) * (n * G - g_sum - xn * gx_sum)
    # x1 = (X A^T) A
    dA += tape.Y.T @ G + (G @ A.T).T @ X
    return Gradients(dA, float(dbeta), dgamma, ddelta)


def rmse(model, X, mode="inference"):
    X = dense_rows(X)
    if isinstance(model, SimpleAEModel):
        out = model.predict(X)
    else:
        out = decoder_forward(model, encode(model, X), mode=mode)[0]
    return float(np.sqrt(_mean_sq(X, out)))


def _fit(model, dataset, config, on_checkpoint=None):
    Xtr = dataset.dense("train")
    Xva = dataset.dense("valid")
    if Xva.shape[0] == 0:
        raise EmptyValidationError("training needs a nonempty validation split")
    if Xtr.shape[0] == 0:
        raise ValueError("training split is empty")
    history = []
    best_model = model.copy()
    if config.n_max_epochs == 0:
        return best_model, history
    rng = np.random.default_rng(config.seed)
    best = np.inf
    bad = 0
    n = Xtr.shape[0]
    bs = config.batch_size
    start = time.perf_counter()
    for epoch in range(1, config.n_max_epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, bs):
            idx = perm[lo:lo + bs]
            total += model._train_step(Xtr[idx], config) * idx.size
        train_loss = total / n
        if epoch % config.n_validation == 0 or epoch == config.n_max_epochs:
            val = rmse(model, Xva)
            history.append(HistoryRow(epoch, train_loss, val))
            log.info("epoch %d train_loss %.6g valid_rmse %.6g", epoch, train_loss, val)
            if on_checkpoint is not None:
                on_checkpoint(epoch, train_loss, val)
            if not np.isfinite(train_loss):
                log.warning("training diverged at epoch %d", epoch)
                break
            if val < best:
                best = val
                best_model = model.copy()
                bad = 0
            else:
                bad += 1
                if bad >= config.n_no_improve:
                    break
        if config.max_seconds is not None and time.perf_counter() - start > config.max_seconds:
            log.info("time limit reached at epoch %d", epoch)
            if not history or history[-1].epoch != epoch:
                val = rmse(model, Xva)
                history.append(HistoryRow(epoch, train_loss, val))
                if val < best:
                    best_model = model.copy()
            break
    return best_model, history


def sgd_train(model, dataset, config, on_checkpoint=None):
    """Plain minibatch SGD with validation-based early stopping.

    Validation RMSE (inference mode) is evaluated every ``n_validation``
    epochs; training stops after ``n_no_improve`` evaluations without
    improvement.  Returns ``(best_model, history)``; the input model is left
    untouched.
    """
    return _fit(model.copy(), dataset, config, on_checkpoint)


class SimpleAEModel:
    """``x_hat = ReLU(B^T A x)`` with both ``A`` and ``B`` learned (m x d)."""

    def __init__(self, A, B):
        self.A = np.array(A, dtype=np.float64)
        self.B = np.array(B, dtype=np.float64)
        if self.A.shape != self.B.shape:
            raise ValueError("A and B must have the same shape")
        self.version = 0

    @classmethod
    def init(cls, m, d, seed=0):
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(d)
        return cls(rng.normal(0.0, scale, (m, d)), rng.normal(0.0, scale, (m, d)))

    def copy(self):
        out = SimpleAEModel(self.A.copy(), self.B.copy())
        out.version = self.version
        return out

    def encode(self, X):
        return dense_rows(X) @ self.A.T

    def forward(self, X):
        X = dense_rows(X)
        Y = X @ self.A.T
        Z = Y @ self.B
        return np.maximum(Z, 0.0), (Y, Z)

    def predict(self, X):
        single = not hasattr(X, "shape") or (np.ndim(X) == 1)
        out = self.forward(X)[0]
        return out[0] if single and out.shape[0] == 1 else out

    def gradients(self, X, cache):
        X = dense_rows(X)
        Y, Z = cache
        out = np.maximum(Z, 0.0)
        G = (2.0 / X.shape[0]) * (out - X) * (Z > 0.0)
        dB = Y.T @ G
        dA = (G @ self.B.T).T @ X
        return dA, dB

    def _train_step(self, X, config):
        out, cache = self.forward(X)
        batch_loss = _mean_sq(X, out)
        dA, dB = self.gradients(X, cache)
        self.A -= config.learning_rate * dA
        self.B -= config.learning_rate * dB
        self.version += 1
        return batch_loss


def simple_ae_forward(model, x):
    return model.predict(x)


def simple_ae_train(dataset, m, config, seed=None, on_checkpoint=None):
    model = SimpleAEModel.init(m, dataset.dim, config.seed if seed is None else seed)
    return _fit(model, dataset, config, on_checkpoint)
