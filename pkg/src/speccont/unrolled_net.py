"""Unrolled fixed-depth soft-thresholding networks and dense baselines.

Two variants share the layer recurrence z^n = W_t^n a_n + W_e^n g:

  * plain:    a_{n+1} = S_{theta_n}(z^n)
  * relaxed:  a_{n+1} = (1 - eta) a_n + eta S_{theta_n}(z^n),  0 < eta < 1

with a_1 = 0. At initialization every layer carries the proximal-gradient
weights W_t = I - tau K^T K, W_e = tau K^T, theta = tau*lambda, so the
untrained depth-L network reproduces exactly L ISTA steps.

Backpropagation is hand-derived (no autodiff); the soft threshold uses its
almost-everywhere derivative. Training is mini-batch Adam with a fixed-seed
shuffle and global-norm gradient clipping, fully deterministic for a given
seed in single-threaded execution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .errors import ConfigError, FormatError, NumericError, ShapeError
from .kernel import KernelMatrix, spectral_norm
from .prox_solver import soft_threshold

CHECKPOINT_MAGIC = "SPECCKPT"
CHECKPOINT_VERSION = 1

LISTA = "lista"
RLISTA = "rlista"
FCN2 = "fcn2"
FCN3 = "fcn3"


@dataclass
class UnrolledNetParams:
    variant: str                     # "lista" or "rlista"
    W_t: np.ndarray                  # (L, N_omega, N_omega)
    W_e: np.ndarray                  # (L, N_omega, N_tau)
    theta: np.ndarray                # (L,)
    eta: float | None = None         # relaxation factor, rlista only
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in (LISTA, RLISTA):
            raise ConfigError(f"unknown variant {self.variant!r}")
        self.W_t = np.asarray(self.W_t, dtype=float)
        self.W_e = np.asarray(self.W_e, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        L = self.W_t.shape[0]
        if L < 1 or self.W_e.shape[0] != L or self.theta.shape != (L,):
            raise ShapeError("per-layer arrays disagree on depth")
        if self.W_t.shape[1] != self.W_t.shape[2] or self.W_e.shape[1] != self.W_t.shape[1]:
            raise ShapeError("W_t must be square and match W_e rows")
        if np.any(self.theta < 0):
            raise ConfigError("thresholds must be nonnegative")
        if self.variant == RLISTA:
            if self.eta is None or not (0.0 < self.eta < 1.0):
                raise ConfigError(f"relaxation factor must lie in (0, 1), got {self.eta}")
        else:
            self.eta = None

    @property
    def depth(self) -> int:
        return self.W_t.shape[0]

    @property
    def n_omega(self) -> int:
        return self.W_t.shape[1]

    @property
    def n_tau(self) -> int:
        return self.W_e.shape[2]

    def copy(self) -> "UnrolledNetParams":
        return UnrolledNetParams(self.variant, self.W_t.copy(), self.W_e.copy(),
                                 self.theta.copy(), self.eta, dict(self.meta))


@dataclass
class ForwardTrace:
    pre_activations: np.ndarray      # (L, ..., N_omega)
    activations: np.ndarray          # (L+1, ..., N_omega), activations[0] = a_1 = 0
    greens: np.ndarray               # the input g, kept for weight gradients

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


@dataclass
class Gradients:
    W_t: np.ndarray
    W_e: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    lr_decay: float = 1.0            # per-epoch multiplicative schedule
    batch_size: int = 64
    epochs: int = 200
    seed: int = 0
    clip_norm: float = 10.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("learning rate, batch size and epochs must be positive")
        if not (0.0 < self.lr_decay <= 1.0):
            raise ConfigError("lr_decay must lie in (0, 1]")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")


def forward(params: UnrolledNetParams, g: np.ndarray) -> ForwardTrace:
    """Run the network on one Green's vector (or a batch of rows)."""
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != params.n_tau:
        raise ShapeError(f"g has length {g.shape[-1]}, network expects {params.n_tau}")
    batch_shape = g.shape[:-1]
    a = np.zeros(batch_shape + (params.n_omega,))
    pre = np.empty((params.depth,) + a.shape)
    acts = np.empty((params.depth + 1,) + a.shape)
    acts[0] = a
    for n in range(params.depth):
        z = a @ params.W_t[n].T + g @ params.W_e[n].T
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite pre-activation at layer {n + 1}")
        s = soft_threshold(z, params.theta[n])
        a = s if params.variant == LISTA else (1.0 - params.eta) * a + params.eta * s
        pre[n] = z
        acts[n + 1] = a
    return ForwardTrace(pre, acts, g)


def loss_mse(output: np.ndarray, a_true: np.ndarray) -> float:
    """||output - a_true||^2 / N_omega, averaged over any batch dimension."""
    diff = output - a_true
    per_sample = np.sum(diff * diff, axis=-1) / a_true.shape[-1]
    return float(np.mean(per_sample))


def backward(params: UnrolledNetParams, trace: ForwardTrace, a_true: np.ndarray) -> Gradients:
    """Gradients of the mean squared spectrum loss for every learnable scalar.

    eta is a fixed hyperparameter and receives no gradient.
    """
    a_true = np.asarray(a_true, dtype=float)
    out = trace.output
    if out.shape != a_true.shape:
        raise ShapeError(f"output {out.shape} vs target {a_true.shape}")
    single = out.ndim == 1
    G = np.atleast_2d(trace.greens)
    A = trace.activations if not single else trace.activations[:, None, :]
    Z = trace.pre_activations if not single else trace.pre_activations[:, None, :]
    T = np.atleast_2d(a_true)
    nb, nw = T.shape
    gW_t = np.zeros_like(params.W_t)
    gW_e = np.zeros_like(params.W_e)
    gtheta = np.zeros_like(params.theta)
    # batch-mean loss: each sample contributes 2*diff/(N_omega * batch)
    d = 2.0 * (A[-1] - T) / (nw * nb)
    eta = params.eta if params.variant == RLISTA else 1.0
    for n in reversed(range(params.depth)):
        z = Z[n]
        mask = np.abs(z) > params.theta[n]
        ds = eta * d
        dz = ds * mask
        gtheta[n] = -np.sum(dz * np.sign(z))
        gW_t[n] = dz.T @ A[n]
        gW_e[n] = dz.T @ G
        d_prev = dz @ params.W_t[n]
        if params.variant == RLISTA:
            d_prev = d_prev + (1.0 - eta) * d
        d = d_prev
    return Gradients(gW_t, gW_e, gtheta)


def init_params(kernel: KernelMatrix, lam: float, variant: str, depth: int,
                eta: float | None = None) -> UnrolledNetParams:
    """Every layer starts at the proximal-gradient weights of the kernel."""
    if depth < 1:
        raise ConfigError("depth must be at least 1")
    K = kernel.entries
    tau = 1.0 / spectral_norm(kernel) ** 2
    nt, nw = K.shape
    W_t1 = np.eye(nw) - tau * (K.T @ K)
    W_e1 = tau * K.T
    meta = {
        "beta": kernel.time_grid.beta,
        "n_tau": nt,
        "omega_min": float(kernel.freq_grid.points[0]),
        "omega_max": float(kernel.freq_grid.points[-1]),
        "n_omega": nw,
        "lambda": lam,
        "tau": tau,
    }
    return UnrolledNetParams(
        variant,
        np.repeat(W_t1[None], depth, axis=0),
        np.repeat(W_e1[None], depth, axis=0),
        np.full(depth, tau * lam),
        eta if variant == RLISTA else None,
        meta,
    )


def parameter_count(params) -> int:
    """Exact number of learnable scalars."""
    if isinstance(params, UnrolledNetParams):
        L, nw, nt = params.depth, params.n_omega, params.n_tau
        return L * (nw * nw + nw * nt + 1)
    if isinstance(params, FcnParams):
        return sum(w.size + b.size for w, b in zip(params.weights, params.biases))
    raise ConfigError(f"unknown parameter object {type(params).__name__}")


# ---------------------------------------------------------------------------
# dense feed-forward baselines


@dataclass
class FcnParams:
    weights: list                    # [(h1, N_tau), (h2, h1), ..., (N_omega, h_last)]
    biases: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeError("weights and biases must pair up")
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[0],):
                raise ShapeError(f"layer {i}: bias {b.shape} vs weight {w.shape}")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ShapeError(f"layer {i}: input size does not chain")

    @property
    def n_tau(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_omega(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def variant(self) -> str:
        return FCN2 if len(self.weights) == 2 else FCN3

    def copy(self) -> "FcnParams":
        return FcnParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases], dict(self.meta))


def init_fcn(n_tau: int, n_omega: int, hidden_width: int, n_hidden: int,
             seed: int = 0) -> FcnParams:
    """He-initialized rectifier network: n_hidden hidden layers of equal width."""
    if hidden_width < 1 or n_hidden < 1:
        raise ConfigError("need positive hidden width and at least one hidden layer")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    sizes = [n_tau] + [hidden_width] * n_hidden + [n_omega]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return FcnParams(weights, biases, {"n_tau": n_tau, "n_omega": n_omega,
                                       "hidden_width": hidden_width, "seed": seed})


def fcn_forward(params: FcnParams, g: np.ndarray, return_trace: bool = False):
    """Rectifier hidden layers and a rectified output (nonnegative spectra)."""
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != params.n_tau:
        raise ShapeError(f"g has length {g.shape[-1]}, network expects {params.n_tau}")
    pre = []
    h = g
    for w, b in zip(params.weights, params.biases):
        z = h @ w.T + b
        pre.append(z)
        h = np.maximum(z, 0.0)
    return (h, pre) if return_trace else h


def fcn_backward(params: FcnParams, g: np.ndarray, a_true: np.ndarray):
    """Gradients of the batch-mean squared spectrum loss; returns (W grads, b grads)."""
    g = np.atleast_2d(np.asarray(g, dtype=float))
    a_true = np.atleast_2d(np.asarray(a_true, dtype=float))
    out, pre = fcn_forward(params, g, return_trace=True)
    nb, nw = a_true.shape
    d = 2.0 * (out - a_true) / (nw * nb)
    gW = [None] * len(params.weights)
    gb = [None] * len(params.biases)
    for i in reversed(range(len(params.weights))):
        dz = d * (pre[i] > 0)
        inp = g if i == 0 else np.maximum(pre[i - 1], 0.0)
        gW[i] = dz.T @ inp
        gb[i] = dz.sum(axis=0)
        d = dz @ params.weights[i]
    return gW, gb


# ---------------------------------------------------------------------------
# shared Adam trainer


def _param_arrays(params):
    if isinstance(params, UnrolledNetParams):
        return [params.W_t, params.W_e, params.theta]
    return list(params.weights) + list(params.biases)


def _grad_arrays(params, G, A):
    if isinstance(params, UnrolledNetParams):
        trace = forward(params, G)
        loss = loss_mse(trace.output, A)
        grads = backward(params, trace, A)
        return loss, [grads.W_t, grads.W_e, grads.theta]
    loss = loss_mse(fcn_forward(params, G), A)
    gW, gb = fcn_backward(params, G, A)
    return loss, gW + gb


def predict(params, g: np.ndarray) -> np.ndarray:
    """Network output for either architecture."""
    if isinstance(params, UnrolledNetParams):
        return forward(params, g).output
    return fcn_forward(params, g)


@dataclass
class TrainResult:
    params: object
    epochs: np.ndarray
    train_loss: np.ndarray
    test_rse: np.ndarray
    init_test_rse: float
    improved: bool


def _mean_rse(params, G, A) -> float:
    diff = predict(params, G) - A
    return float(np.mean(np.sqrt(np.sum(diff * diff, axis=-1))))


def train(params, train_g, train_a, config: TrainConfig,
          test_g=None, test_a=None):
    """Mini-batch Adam on the mean squared spectrum loss.

    Mutates a copy of ``params`` and returns a :class:`TrainResult` whose
    ``improved`` flag reports whether the final test RSE beats the
    initialization's (a training-failure diagnostic, not an exception).
    """
    params = params.copy()
    G = np.asarray(train_g, dtype=float)
    A = np.asarray(train_a, dtype=float)
    if G.shape[0] != A.shape[0]:
        raise ShapeError("train inputs and targets disagree on sample count")
    if test_g is None:
        test_g, test_a = G, A
    arrays = _param_arrays(params)
    m = [np.zeros_like(p) for p in arrays]
    v = [np.zeros_like(p) for p in arrays]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed)))
    init_rse = _mean_rse(params, test_g, test_a)
    step = 0
    epoch_loss = np.empty(config.epochs)
    epoch_rse = np.empty(config.epochs)
    for epoch in range(config.epochs):
        lr = config.learning_rate * config.lr_decay**epoch
        order = rng.permutation(G.shape[0])
        losses = []
        for start in range(0, G.shape[0], config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = _grad_arrays(params, G[idx], A[idx])
            if not np.isfinite(loss):
                raise NumericError(f"training loss became non-finite at epoch {epoch}")
            gnorm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
            if gnorm > config.clip_norm:
                grads = [g * (config.clip_norm / gnorm) for g in grads]
            step += 1
            bc1 = 1.0 - config.beta1 ** step
            bc2 = 1.0 - config.beta2 ** step
            for p, g_, mi, vi in zip(arrays, grads, m, v):
                mi *= config.beta1
                mi += (1.0 - config.beta1) * g_
                vi *= config.beta2
                vi += (1.0 - config.beta2) * g_ * g_
                p -= lr * (mi / bc1) / (np.sqrt(vi / bc2) + config.eps)
            if isinstance(params, UnrolledNetParams):
                np.maximum(params.theta, 0.0, out=params.theta)  # keep thresholds valid
            losses.append(loss)
        epoch_loss[epoch] = float(np.mean(losses))
        epoch_rse[epoch] = _mean_rse(params, test_g, test_a)
    final_rse = epoch_rse[-1]
    return TrainResult(params, np.arange(1, config.epochs + 1), epoch_loss,
                       epoch_rse, init_rse, bool(final_rse < init_rse))


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(params, path, extra_meta: dict | None = None) -> None:
    meta = {f"meta_{k}": v for k, v in params.meta.items()}
    if extra_meta:
        meta.update({f"meta_{k}": v for k, v in extra_meta.items()})
    if isinstance(params, UnrolledNetParams):
        meta.update(variant=params.variant, depth=params.depth,
                    eta="" if params.eta is None else repr(params.eta))
        arrays = {"W_t": params.W_t, "W_e": params.W_e, "theta": params.theta}
    elif isinstance(params, FcnParams):
        meta.update(variant=params.variant, depth=len(params.weights), eta="")
        arrays = {}
        for i, (w, b) in enumerate(zip(params.weights, params.biases)):
            arrays[f"W{i}"] = w
            arrays[f"b{i}"] = b
    else:
        raise ConfigError(f"cannot checkpoint {type(params).__name__}")
    write_container(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, meta, arrays)


def load_checkpoint(path, kernel: KernelMatrix | None = None):
    """Load a checkpoint; if ``kernel`` is given, its grids must match."""
    meta, arrays = read_container(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)
    variant = meta.get("variant")
    net_meta = {k[5:]: v for k, v in meta.items() if k.startswith("meta_")}
    if variant in (LISTA, RLISTA):
        eta = float(meta["eta"]) if meta.get("eta") else None
        params = UnrolledNetParams(variant, arrays["W_t"], arrays["W_e"],
                                   arrays["theta"], eta, net_meta)
    elif variant in (FCN2, FCN3):
        depth = int(meta["depth"])
        try:
            weights = [arrays[f"W{i}"] for i in range(depth)]
            biases = [arrays[f"b{i}"] for i in range(depth)]
        except KeyError as exc:
            raise FormatError(f"{path}: missing layer array {exc}") from exc
        params = FcnParams(weights, biases, net_meta)
    else:
        raise FormatError(f"{path}: unknown variant {variant!r}")
    if kernel is not None:
        nt, nw = kernel.shape
        if params.n_tau != nt or params.n_omega != nw:
            raise ShapeError(
                f"checkpoint is for ({params.n_tau}, {params.n_omega}) grids, "
                f"kernel is ({nt}, {nw})"
            )
    return params


__all__ = [
    "LISTA", "RLISTA", "FCN2", "FCN3",
    "UnrolledNetParams", "ForwardTrace", "Gradients", "TrainConfig", "TrainResult",
    "FcnParams",
    "forward", "backward", "init_params", "parameter_count",
    "init_fcn", "fcn_forward", "fcn_backward",
    "predict", "train", "loss_mse",
    "save_checkpoint", "load_checkpoint",
]
