"""Siamese matching network over two encoded issues.

A shared 1-D convolution encoder (strided sliding dot product, written out
from first principles) feeds per-filter global max pooling; the two feature
vectors merge symmetrically as [u + v ; |u - v|], pass a dense layer, and a
2-way softmax head emits the link probability.  Optional C2/CU time-gap
scalars are z-scored with training statistics and appended to the head
input.  Training is plain mini-batch gradient descent on the MSE between
the softmax output and one-hot labels; embedding vectors stay frozen.

The merge keeps the exact information of the unordered feature-vector pair
(u and v are recoverable up to order), so scores are symmetric in the two
inputs whenever the scalar features are.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import features as feats
from .corpus import IssueSet, LabeledPair, time_gap_cc, time_gap_cu
from .embeddings import EmbeddingTable, EncodedSeq, encode
from .textprep import concat_fields

CHECKPOINT_VERSION = 1
ACTIVATIONS = ("relu", "leaky_relu", "sigmoid")
_LEAKY_SLOPE = 0.01


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


def conv1d(x: np.ndarray, h: np.ndarray, s: int = 1) -> np.ndarray:
    """Strided sliding dot product of input x with kernel h.

    y[j] = sum_i x[j*s + i] . h[i] for j in 0..p-1 with
    p = (n - z) // s + 1.  For 2-D inputs of shape (n, dim) the kernel is
    (z, dim) and the product also runs over the second axis.
    """
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if s < 1:
        raise ValueError("stride must be >= 1")
    if x.ndim != h.ndim or x.ndim not in (1, 2):
        raise ValueError("x and h must both be 1-D or both (length, dim)")
    n, z = x.shape[0], h.shape[0]
    if n < z:
        raise ValueError("input shorter than kernel")
    if x.ndim == 2 and x.shape[1] != h.shape[1]:
        raise ValueError("x and h disagree on the feature dimension")
    p = (n - z) // s + 1
    out = np.empty(p, dtype=np.float64)
    for j in range(p):
        out[j] = np.sum(x[j * s : j * s + z] * h)
    return out


@dataclass(frozen=True)
class SiameseConfig:
    features: str = "TDS"  # canonical feature string, e.g. "TDSC2CU"
    filters: int = 256
    kernel_size: int = 3
    stride: int = 1
    dense_units: int = 256
    activation: str = "relu"
    max_len: int = 128
    learning_rate: float = 0.001
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        feat = feats.parse_features(self.features)
        feats.validate_features(feat)
        object.__setattr__(self, "features", feats.format_features(feat))
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation: {self.activation!r}")
        if self.max_len < self.kernel_size:
            raise ValueError("max_len must be >= kernel_size")
        for name in ("filters", "kernel_size", "stride", "dense_units",
                     "batch_size", "epochs"):
            if getattr(self, name) < (0 if name == "epochs" else 1):
                raise ValueError(f"{name} must be positive")

    @property
    def scalar_names(self) -> tuple[str, ...]:
        return feats.scalar_members(feats.parse_features(self.features))

    @property
    def text_feature_set(self):
        return frozenset(feats.text_members(feats.parse_features(self.features)))


@dataclass
class PairBatch:
    """One mini-batch of encoded pairs; ``a`` precedes ``b`` in time."""

    a: np.ndarray  # (B, max_len, dim)
    b: np.ndarray
    scalars: np.ndarray | None  # (B, n_scalars) raw, unnormalized
    labels: np.ndarray  # (B,) in {0, 1}


def _activate(name: str, pre: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(pre, 0.0)
    if name == "leaky_relu":
        return np.where(pre > 0.0, pre, _LEAKY_SLOPE * pre)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-pre))
    raise ValueError(f"unknown activation: {name!r}")


def _activate_grad(name: str, pre: np.ndarray, post: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (pre > 0.0).astype(np.float64)
    if name == "leaky_relu":
        return np.where(pre > 0.0, 1.0, _LEAKY_SLOPE)
    if name == "sigmoid":
        return post * (1.0 - post)
    raise ValueError(f"unknown activation: {name!r}")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class CnnEncoder:
    """Strided 1-D convolution bank with per-filter global max pooling."""

    def __init__(self, dim: int, filters: int, kernel_size: int, stride: int,
                 rng: np.random.Generator):
        self.dim = dim
        self.filters = filters
        self.kernel_size = kernel_size
        self.stride = stride
        scale = 1.0 / np.sqrt(kernel_size * dim)
        self.w = rng.normal(0.0, scale, size=(filters, kernel_size, dim))
        self.b = np.zeros(filters, dtype=np.float64)

    @property
    def output_dim(self) -> int:
        return self.filters

    def _windows(self, x: np.ndarray) -> np.ndarray:
        bsz, n, _ = x.shape
        z, s = self.kernel_size, self.stride
        p = (n - z) // s + 1
        stacked = np.stack([x[:, j * s : j * s + z, :] for j in range(p)], axis=1)
        return stacked.reshape(bsz, p, z * self.dim)

    def forward(self, x: np.ndarray):
        """x: (B, n, dim) -> pooled features (B, filters) plus a cache."""
        flat = self._windows(x)
        w2 = self.w.reshape(self.filters, -1)
        conv = flat @ w2.T + self.b
        amax = conv.argmax(axis=1)
        pooled = np.take_along_axis(conv, amax[:, None, :], axis=1)[:, 0, :]
        return pooled, (flat, amax)

    def backward(self, d_pooled: np.ndarray, cache):
        flat, amax = cache
        bsz, p, _ = flat.shape
        dconv = np.zeros((bsz, p, self.filters), dtype=np.float64)
        np.put_along_axis(dconv, amax[:, None, :], d_pooled[:, None, :], axis=1)
        dw = np.einsum("bpf,bpd->fd", dconv, flat).reshape(self.w.shape)
        db = dconv.sum(axis=(0, 1))
        return dw, db

    def encode_features(self, seq: EncodedSeq) -> np.ndarray:
        """Single-sequence convenience: EncodedSeq -> feature vector."""
        pooled, _ = self.forward(seq.matrix[None, :, :])
        return pooled[0]


def make_encoder(kind: str, *, dim: int, filters: int = 256, kernel_size: int = 3,
                 stride: int = 1, seed: int = 0) -> CnnEncoder:
    """Build a sequence encoder.  This build ships the CNN encoder only;
    requesting a recurrent kind reports what is available."""
    if kind != "cnn":
        raise ValueError(f"unsupported encoder kind {kind!r}; available kinds: cnn")
    rng = np.random.default_rng([seed, 0])
    return CnnEncoder(dim=dim, filters=filters, kernel_size=kernel_size,
                      stride=stride, rng=rng)


class SiameseModel:
    """Trainable matcher; see the module docstring for the architecture."""

    def __init__(self, embedding: EmbeddingTable, config: SiameseConfig):
        self.embedding = embedding
        self.config = config
        rng = np.random.default_rng([config.seed, 0])
        self.encoder = CnnEncoder(
            dim=embedding.dim,
            filters=config.filters,
            kernel_size=config.kernel_size,
            stride=config.stride,
            rng=rng,
        )
        merge_dim = 2 * config.filters
        n_s = len(config.scalar_names)
        self.dense_w = rng.normal(0.0, 1.0 / np.sqrt(merge_dim),
                                  size=(config.dense_units, merge_dim))
        self.dense_b = np.zeros(config.dense_units, dtype=np.float64)
        self.head_w = rng.normal(0.0, 1.0 / np.sqrt(config.dense_units + n_s),
                                 size=(2, config.dense_units + n_s))
        self.head_b = np.zeros(2, dtype=np.float64)
        self.scalar_mean = np.zeros(n_s, dtype=np.float64)
        self.scalar_std = np.ones(n_s, dtype=np.float64)

    @property
    def n_scalars(self) -> int:
        return len(self.config.scalar_names)

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            "conv_w": self.encoder.w,
            "conv_b": self.encoder.b,
            "dense_w": self.dense_w,
            "dense_b": self.dense_b,
            "head_w": self.head_w,
            "head_b": self.head_b,
        }

    def clone(self) -> "SiameseModel":
        other = SiameseModel.__new__(SiameseModel)
        other.embedding = self.embedding
        other.config = self.config
        other.encoder = CnnEncoder.__new__(CnnEncoder)
        other.encoder.dim = self.encoder.dim
        other.encoder.filters = self.encoder.filters
        other.encoder.kernel_size = self.encoder.kernel_size
        other.encoder.stride = self.encoder.stride
        other.encoder.w = self.encoder.w.copy()
        other.encoder.b = self.encoder.b.copy()
        other.dense_w = self.dense_w.copy()
        other.dense_b = self.dense_b.copy()
        other.head_w = self.head_w.copy()
        other.head_b = self.head_b.copy()
        other.scalar_mean = self.scalar_mean.copy()
        other.scalar_std = self.scalar_std.copy()
        return other

    def _check_scalars(self, scalars: np.ndarray | None, batch: int) -> np.ndarray:
        n_s = self.n_scalars
        if n_s == 0:
            if scalars is not None and np.size(scalars):
                raise ValueError(
                    "scalar features supplied but the model was configured without them"
                )
            return np.zeros((batch, 0), dtype=np.float64)
        if scalars is None:
            raise ValueError(
                f"model expects scalar features {self.config.scalar_names}"
            )
        scalars = np.asarray(scalars, dtype=np.float64)
        if scalars.shape != (batch, n_s):
            raise ValueError(
                f"scalars must have shape ({batch}, {n_s}), got {scalars.shape}"
            )
        return scalars

    def head_probs(self, ua: np.ndarray, ub: np.ndarray,
                   scalars: np.ndarray | None):
        """Class probabilities from two batches of encoder features and
        raw (unnormalized) scalar features."""
        bsz = ua.shape[0]
        scalars = self._check_scalars(scalars, bsz)
        merge = np.concatenate([ua + ub, np.abs(ua - ub)], axis=1)
        pre = merge @ self.dense_w.T + self.dense_b
        hidden = _activate(self.config.activation, pre)
        std = np.where(self.scalar_std == 0.0, 1.0, self.scalar_std)
        normed = (scalars - self.scalar_mean) / std
        head_in = np.concatenate([hidden, normed], axis=1)
        logits = head_in @ self.head_w.T + self.head_b
        probs = _softmax(logits)
        cache = {
            "ua": ua, "ub": ub, "merge": merge, "pre": pre,
            "hidden": hidden, "head_in": head_in, "probs": probs,
        }
        return probs, cache

    def _forward_core(self, a: np.ndarray, b: np.ndarray,
                      scalars: np.ndarray | None):
        ua, cache_a = self.encoder.forward(a)
        ub, cache_b = self.encoder.forward(b)
        probs, cache = self.head_probs(ua, ub, scalars)
        cache["cache_a"] = cache_a
        cache["cache_b"] = cache_b
        return probs, cache

    def forward_batch(self, a: np.ndarray, b: np.ndarray,
                      scalars: np.ndarray | None = None) -> np.ndarray:
        """Link probabilities for a batch of encoded pairs."""
        probs, _ = self._forward_core(a, b, scalars)
        return probs[:, 1]

    def forward(self, a: EncodedSeq, b: EncodedSeq,
                scalars: Sequence[float] | None = None) -> float:
        """Probability that the two encoded issues are linked."""
        s = None if scalars is None else np.asarray(scalars, dtype=np.float64)[None, :]
        return float(self.forward_batch(a.matrix[None], b.matrix[None], s)[0])

    def loss(self, batch: PairBatch) -> float:
        probs, _ = self._forward_core(batch.a, batch.b, batch.scalars)
        targets = np.stack([1.0 - batch.labels, batch.labels], axis=1)
        return float(np.mean(np.sum((probs - targets) ** 2, axis=1) / 2.0))

    def loss_and_grads(self, batch: PairBatch):
        probs, cache = self._forward_core(batch.a, batch.b, batch.scalars)
        bsz = batch.a.shape[0]
        targets = np.stack([1.0 - batch.labels, batch.labels], axis=1)
        loss = float(np.mean(np.sum((probs - targets) ** 2, axis=1) / 2.0))

        dprobs = (probs - targets) / bsz
        dlogits = probs * (dprobs - np.sum(dprobs * probs, axis=1, keepdims=True))
        head_in = cache["head_in"]
        d_head_w = dlogits.T @ head_in
        d_head_b = dlogits.sum(axis=0)
        d_head_in = dlogits @ self.head_w
        units = self.config.dense_units
        d_hidden = d_head_in[:, :units]
        d_pre = d_hidden * _activate_grad(
            self.config.activation, cache["pre"], cache["hidden"]
        )
        d_dense_w = d_pre.T @ cache["merge"]
        d_dense_b = d_pre.sum(axis=0)
        d_merge = d_pre @ self.dense_w
        f = self.config.filters
        d_sum = d_merge[:, :f]
        d_diff = d_merge[:, f:]
        sign = np.sign(cache["ua"] - cache["ub"])
        d_ua = d_sum + d_diff * sign
        d_ub = d_sum - d_diff * sign
        dw_a, db_a = self.encoder.backward(d_ua, cache["cache_a"])
        dw_b, db_b = self.encoder.backward(d_ub, cache["cache_b"])
        grads = {
            "conv_w": dw_a + dw_b,
            "conv_b": db_a + db_b,
            "dense_w": d_dense_w,
            "dense_b": d_dense_b,
            "head_w": d_head_w,
            "head_b": d_head_b,
        }
        return loss, grads

    def save(self, path) -> None:
        """Checkpoint: config plus weight tensors, bit-exact round trip."""
        meta = {
            "checkpoint_version": CHECKPOINT_VERSION,
            "config": {
                "features": self.config.features,
                "filters": self.config.filters,
                "kernel_size": self.config.kernel_size,
                "stride": self.config.stride,
                "dense_units": self.config.dense_units,
                "activation": self.config.activation,
                "max_len": self.config.max_len,
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "batch_size": self.config.batch_size,
                "seed": self.config.seed,
            },
            "embedding_dim": self.embedding.dim,
        }
        np.savez(
            path,
            meta=np.array(json.dumps(meta, sort_keys=True)),
            conv_w=self.encoder.w,
            conv_b=self.encoder.b,
            dense_w=self.dense_w,
            dense_b=self.dense_b,
            head_w=self.head_w,
            head_b=self.head_b,
            scalar_mean=self.scalar_mean,
            scalar_std=self.scalar_std,
        )

    @classmethod
    def load(cls, path, embedding: EmbeddingTable) -> "SiameseModel":
        with np.load(path, allow_pickle=False) as blob:
            meta = json.loads(str(blob["meta"]))
            if meta.get("checkpoint_version") != CHECKPOINT_VERSION:
                raise ValueError(
                    f"unsupported checkpoint version: {meta.get('checkpoint_version')}"
                )
            if meta["embedding_dim"] != embedding.dim:
                raise ValueError(
                    f"checkpoint built for dim {meta['embedding_dim']}, "
                    f"table has dim {embedding.dim}"
                )
            model = cls(embedding, SiameseConfig(**meta["config"]))
            model.encoder.w = blob["conv_w"].copy()
            model.encoder.b = blob["conv_b"].copy()
            model.dense_w = blob["dense_w"].copy()
            model.dense_b = blob["dense_b"].copy()
            model.head_w = blob["head_w"].copy()
            model.head_b = blob["head_b"].copy()
            model.scalar_mean = blob["scalar_mean"].copy()
            model.scalar_std = blob["scalar_std"].copy()
        return model


def pair_scalars(query, candidate, scalar_names: Sequence[str]) -> np.ndarray:
    """Raw C2/CU gaps (days) between a query issue and a candidate."""
    vals = []
    for name in scalar_names:
        if name == "C2":
            vals.append(time_gap_cc(query, candidate))
        elif name == "CU":
            vals.append(time_gap_cu(query, candidate))
        else:
            raise ValueError(f"unknown scalar feature: {name!r}")
    return np.array(vals, dtype=np.float64)


def encode_issue(model: SiameseModel, issue) -> EncodedSeq:
    tokens = concat_fields(issue, model.config.text_feature_set)
    return encode(tokens, model.embedding, model.config.max_len)


def train(model: SiameseModel, pairs: Sequence[LabeledPair],
          corpus: IssueSet) -> tuple[SiameseModel, list[float]]:
    """Mini-batch gradient descent on MSE; returns a trained copy of the
    model and the per-epoch mean training loss."""
    if not pairs:
        raise ValueError("no training pairs")
    for pair in pairs:
        if pair.a not in corpus or pair.b not in corpus:
            raise ValueError(f"pair key not in corpus: {pair.a!r}/{pair.b!r}")

    out = model.clone()
    cfg = out.config
    encoded: dict[str, np.ndarray] = {}
    for pair in pairs:
        for key in (pair.a, pair.b):
            if key not in encoded:
                encoded[key] = encode_issue(out, corpus.by_key(key)).matrix

    scalar_names = cfg.scalar_names
    if scalar_names:
        raw = np.stack([
            pair_scalars(corpus.by_key(p.b), corpus.by_key(p.a), scalar_names)
            for p in pairs
        ])
        out.scalar_mean = raw.mean(axis=0)
        std = raw.std(axis=0)
        out.scalar_std = np.where(std == 0.0, 1.0, std)
    else:
        raw = None

    labels = np.array([p.label for p in pairs], dtype=np.float64)
    a_all = np.stack([encoded[p.a] for p in pairs])
    b_all = np.stack([encoded[p.b] for p in pairs])

    rng = np.random.default_rng([cfg.seed, 1])
    losses: list[float] = []
    params = out.parameters()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pairs))
        total = 0.0
        for start in range(0, len(pairs), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = PairBatch(
                a=a_all[idx],
                b=b_all[idx],
                scalars=None if raw is None else raw[idx],
                labels=labels[idx],
            )
            loss, grads = out.loss_and_grads(batch)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, "
                    f"learning rate {cfg.learning_rate}"
                )
            for name, arr in params.items():
                arr -= cfg.learning_rate * grads[name]
            total += loss * len(idx)
        losses.append(total / len(pairs))
    return out, losses


def gradient_check(model: SiameseModel, batch: PairBatch,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central finite
    differences over every trainable weight group.

    The denominator is floored at 1e-6 so that components whose gradient is
    essentially zero are compared on absolute finite-difference noise
    instead of blowing up the ratio.
    """
    if not 0.0 < epsilon <= 1e-2:
        raise ValueError("epsilon must be in (0, 1e-2]")
    _, grads = model.loss_and_grads(batch)
    worst = 0.0
    for name, arr in model.parameters().items():
        flat = arr.reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = model.loss(batch)
            flat[i] = orig - epsilon
            down = model.loss(batch)
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(abs(gflat[i]) + abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
