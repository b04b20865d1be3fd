"""Trainable layer-anchored classifier.

Architecture: frozen per-layer features -> per-layer linear projection with
ReLU -> attention-weighted pooling over layers (softmax over learnable
scores) -> four fully connected layers (ReLU between, softmax output).
Training objective: cross-entropy on labeled source plus ``gamma`` times a
correlation-alignment penalty between source and target covariances of the
projected activations at the configured anchor layers.

The backward pass is derived analytically and checked against central
finite differences in the test suite.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CacheMismatch,
    DegenerateBatch,
    FormatError,
    InvalidAnchor,
    NotLadf,
    ShapeError,
    TruncatedFile,
    UnsupportedVersion,
)
from .numkit import covariance, frobenius_sq, softmax

CHECKPOINT_MAGIC = b"LAMP"
CHECKPOINT_VERSION = 1

CORAL_VARIANTS = ("normalized_squared", "plain_frobenius")


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int
    input_dim: int
    projection_dim: int = 64
    fc_dims: tuple = (64, 32, 16, 4)
    gamma: float = 0.5
    coral_variant: str = "normalized_squared"

    def __post_init__(self):
        object.__setattr__(self, "fc_dims", tuple(int(d) for d in self.fc_dims))
        if len(self.fc_dims) != 4:
            raise FormatError("fc_dims must list exactly four layer widths")
        if self.gamma < 0:
            raise FormatError("gamma must be >= 0")
        if self.coral_variant not in CORAL_VARIANTS:
            raise FormatError(f"unknown coral_variant {self.coral_variant!r}")
        if min(self.num_layers, self.input_dim, self.projection_dim) < 1:
            raise FormatError("num_layers, input_dim, projection_dim must be >= 1")

    @property
    def num_classes(self) -> int:
        return self.fc_dims[-1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "num_layers": self.num_layers,
                "input_dim": self.input_dim,
                "projection_dim": self.projection_dim,
                "fc_dims": list(self.fc_dims),
                "gamma": self.gamma,
                "coral_variant": self.coral_variant,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        raw = json.loads(text)
        return cls(
            num_layers=int(raw["num_layers"]),
            input_dim=int(raw["input_dim"]),
            projection_dim=int(raw["projection_dim"]),
            fc_dims=tuple(raw["fc_dims"]),
            gamma=float(raw["gamma"]),
            coral_variant=raw["coral_variant"],
        )


@dataclass
class ModelParams:
    proj_w: list  # L arrays (H, D)
    proj_b: list  # L arrays (H,)
    attn: np.ndarray  # (L,)
    fc_w: list  # 4 arrays (out, in)
    fc_b: list  # 4 arrays (out,)

    def tensors(self):
        """(name, array) pairs in checkpoint declaration order."""
        for i, w in enumerate(self.proj_w):
            yield f"proj_w[{i}]", w
        for i, b in enumerate(self.proj_b):
            yield f"proj_b[{i}]", b
        yield "attn", self.attn
        for i, w in enumerate(self.fc_w):
            yield f"fc_w[{i}]", w
        for i, b in enumerate(self.fc_b):
            yield f"fc_b[{i}]", b

    def copy(self) -> "ModelParams":
        return ModelParams(
            proj_w=[w.copy() for w in self.proj_w],
            proj_b=[b.copy() for b in self.proj_b],
            attn=self.attn.copy(),
            fc_w=[w.copy() for w in self.fc_w],
            fc_b=[b.copy() for b in self.fc_b],
        )

    def zeros_like(self) -> "ModelParams":
        return ModelParams(
            proj_w=[np.zeros_like(w) for w in self.proj_w],
            proj_b=[np.zeros_like(b) for b in self.proj_b],
            attn=np.zeros_like(self.attn),
            fc_w=[np.zeros_like(w) for w in self.fc_w],
            fc_b=[np.zeros_like(b) for b in self.fc_b],
        )


# gradients share the parameter layout
Gradients = ModelParams


def _glorot(gen, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return gen.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, zero attention scores
    (uniform attention at the start). Deterministic per seed."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    L, D, H = config.num_layers, config.input_dim, config.projection_dim
    proj_w = [_glorot(gen, H, D) for _ in range(L)]
    proj_b = [np.zeros(H) for _ in range(L)]
    attn = np.zeros(L)
    fc_w, fc_b = [], []
    fan_in = H
    for width in config.fc_dims:
        fc_w.append(_glorot(gen, width, fan_in))
        fc_b.append(np.zeros(width))
        fan_in = width
    return ModelParams(proj_w, proj_b, attn, fc_w, fc_b)


@dataclass
class Losses:
    er: float
    coral: float
    total: float


@dataclass
class ForwardCache:
    source_batch: np.ndarray  # (L, n, D)
    target_batch: np.ndarray | None  # (L, m, D) or None
    labels: np.ndarray
    anchor_layers: tuple
    gamma: float
    coral_variant: str
    src_pre: list = field(default_factory=list)  # per-layer (n, H)
    src_act: list = field(default_factory=list)
    tar_pre: dict = field(default_factory=dict)  # anchor layer -> (m, H)
    tar_act: dict = field(default_factory=dict)
    alpha: np.ndarray | None = None
    pooled: np.ndarray | None = None
    fc_pre: list = field(default_factory=list)
    fc_act: list = field(default_factory=list)  # inputs to each fc layer
    probs: np.ndarray | None = None
    coral_diffs: dict = field(default_factory=dict)  # anchor layer -> cov diff


def _check_batch(config: ModelConfig, batch, what: str) -> np.ndarray:
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != config.num_layers or arr.shape[2] != config.input_dim:
        raise ShapeError(
            f"{what} must have shape (L={config.num_layers}, n, D={config.input_dim}), "
            f"got {arr.shape}"
        )
    return arr


def _anchor_layers(config: ModelConfig, anchor) -> tuple:
    if anchor is None:
        return ()
    layers = tuple(anchor.layers) if hasattr(anchor, "layers") else tuple(anchor)
    for layer in layers:
        if not 1 <= layer <= config.num_layers:
            raise InvalidAnchor(
                f"anchor layer {layer} outside [1, {config.num_layers}]"
            )
    return layers


def _coral_term(diff: np.ndarray, variant: str, h: int) -> float:
    if variant == "normalized_squared":
        return frobenius_sq(diff) / (4.0 * h * h)
    return float(np.sqrt(frobenius_sq(diff)))


def forward(params: ModelParams, config: ModelConfig, source_batch, labels,
            target_batch=None, anchor=None, gamma=None):
    """Run the two-branch forward pass.

    Returns (ForwardCache, Losses). ``target_batch`` may be None, in which
    case the anchoring loss is zero.
    """
    gamma = config.gamma if gamma is None else float(gamma)
    src = _check_batch(config, source_batch, "source_batch")
    labels = np.asarray(labels, dtype=np.int64)
    n = src.shape[1]
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} != ({n},)")
    anchors = _anchor_layers(config, anchor)
    tar = None
    if target_batch is not None:
        tar = _check_batch(config, target_batch, "target_batch")
        if anchors and (n < 2 or tar.shape[1] < 2):
            raise DegenerateBatch(
                "covariance anchoring needs at least 2 samples per batch"
            )

    H = config.projection_dim
    cache = ForwardCache(
        source_batch=src, target_batch=tar, labels=labels,
        anchor_layers=anchors, gamma=gamma, coral_variant=config.coral_variant,
    )

    for i in range(config.num_layers):
        z = src[i] @ params.proj_w[i].T + params.proj_b[i]
        cache.src_pre.append(z)
        cache.src_act.append(np.maximum(z, 0.0))

    cache.alpha = softmax(params.attn)
    pooled = np.zeros((n, H))
    for i in range(config.num_layers):
        pooled += cache.alpha[i] * cache.src_act[i]
    cache.pooled = pooled

    h = pooled
    for j in range(4):
        cache.fc_act.append(h)
        z = h @ params.fc_w[j].T + params.fc_b[j]
        cache.fc_pre.append(z)
        h = np.maximum(z, 0.0) if j < 3 else z
    logits = cache.fc_pre[3]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    cache.probs = probs
    loss_er = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))

    loss_coral = 0.0
    if tar is not None and anchors:
        for layer in anchors:
            i = layer - 1
            zt = tar[i] @ params.proj_w[i].T + params.proj_b[i]
            cache.tar_pre[layer] = zt
            cache.tar_act[layer] = np.maximum(zt, 0.0)
            diff = covariance(cache.src_act[i]) - covariance(cache.tar_act[layer])
            cache.coral_diffs[layer] = diff
            loss_coral += _coral_term(diff, config.coral_variant, H)

    total = loss_er + gamma * loss_coral
    return cache, Losses(er=loss_er, coral=loss_coral, total=total)


def backward(params: ModelParams, config: ModelConfig, cache: ForwardCache) -> Gradients:
    """Exact gradient of the total loss with respect to every parameter."""
    if cache.probs is None or cache.pooled is None:
        raise CacheMismatch("cache does not come from a completed forward pass")
    src = cache.source_batch
    n = src.shape[1]
    L, H = config.num_layers, config.projection_dim
    if len(cache.src_act) != L or cache.pooled.shape != (n, H):
        raise CacheMismatch("cache shapes do not match the config")

    grads = params.zeros_like()

    # cross-entropy + softmax
    dlogits = cache.probs.copy()
    dlogits[np.arange(n), cache.labels] -= 1.0
    dlogits /= n

    # fully connected stack
    dz = dlogits
    for j in range(3, -1, -1):
        grads.fc_w[j] = dz.T @ cache.fc_act[j]
        grads.fc_b[j] = dz.sum(axis=0)
        dh = dz @ params.fc_w[j]
        if j > 0:
            dz = dh * (cache.fc_pre[j - 1] > 0)
    g_pool = dh  # gradient wrt pooled representation

    # pooling: dP_i from attention weights, and attention-score gradient
    alpha = cache.alpha
    dalpha = np.array([np.sum(g_pool * cache.src_act[i]) for i in range(L)])
    grads.attn = alpha * (dalpha - float(alpha @ dalpha))

    d_src_act = [alpha[i] * g_pool for i in range(L)]

    # anchoring loss: d/dX of ||Cov(Xs)-Cov(Xt)||-type terms
    if cache.target_batch is not None and cache.anchor_layers:
        for layer in cache.anchor_layers:
            i = layer - 1
            diff = cache.coral_diffs[layer]
            if cache.coral_variant == "normalized_squared":
                g_cov = diff / (2.0 * H * H)
            else:
                norm = np.sqrt(frobenius_sq(diff))
                g_cov = diff / norm if norm > 0 else np.zeros_like(diff)
            g_cov = cache.gamma * g_cov

            ps = cache.src_act[i]
            pt = cache.tar_act[layer]
            m = pt.shape[0]
            d_src_act[i] = d_src_act[i] + (2.0 / (n - 1)) * (
                (ps - ps.mean(axis=0)) @ g_cov
            )
            d_tar_act = (2.0 / (m - 1)) * ((pt - pt.mean(axis=0)) @ (-g_cov))
            dzt = d_tar_act * (cache.tar_pre[layer] > 0)
            grads.proj_w[i] += dzt.T @ cache.target_batch[i]
            grads.proj_b[i] += dzt.sum(axis=0)

    # projections (source branch)
    for i in range(L):
        dzs = d_src_act[i] * (cache.src_pre[i] > 0)
        grads.proj_w[i] += dzs.T @ src[i]
        grads.proj_b[i] += dzs.sum(axis=0)

    return grads


def predict(params: ModelParams, config: ModelConfig, batch):
    """Class indices and per-sample probabilities for a (L, n, D) batch."""
    arr = _check_batch(config, batch, "batch")
    alpha = softmax(params.attn)
    n = arr.shape[1]
    pooled = np.zeros((n, config.projection_dim))
    for i in range(config.num_layers):
        act = np.maximum(arr[i] @ params.proj_w[i].T + params.proj_b[i], 0.0)
        pooled += alpha[i] * act
    h = pooled
    for j in range(4):
        z = h @ params.fc_w[j].T + params.fc_b[j]
        h = np.maximum(z, 0.0) if j < 3 else z
    shifted = h - h.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return probs.argmax(axis=1), probs


def save_params(destination, config: ModelConfig, params: ModelParams) -> None:
    """Versioned binary checkpoint: magic, version, config JSON, then all
    tensors as float64 little-endian in declaration order."""
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<H", CHECKPOINT_VERSION))
    cfg = config.to_json().encode("utf-8")
    buf.write(struct.pack("<I", len(cfg)))
    buf.write(cfg)
    for _, tensor in params.tensors():
        buf.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    data = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as f:
            f.write(data)


def load_params(source):
    """Inverse of save_params. Returns (config, params)."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as f:
            data = f.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise NotLadf("bad magic; not a LAMP checkpoint")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != CHECKPOINT_VERSION:
        raise UnsupportedVersion(f"checkpoint version {version} not supported")
    (cfg_len,) = struct.unpack_from("<I", data, 6)
    config = ModelConfig.from_json(data[10 : 10 + cfg_len].decode("utf-8"))
    pos = 10 + cfg_len

    template = init_params(config, seed=0)
    loaded = template.zeros_like()
    for _, tensor in loaded.tensors():
        nbytes = tensor.size * 8
        if pos + nbytes > len(data):
            raise TruncatedFile("checkpoint ends mid-tensor")
        tensor[...] = np.frombuffer(data[pos : pos + nbytes], dtype="<f8").reshape(
            tensor.shape
        )
        pos += nbytes
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes in checkpoint")
    return config, loaded
