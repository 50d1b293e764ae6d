"""Hop-ladder model: per-hop linear encoders with geometrically decaying
output dimensions, concatenated (or zero-pad added) into a linear-before-
softmax classifier.  Gradients are derived analytically; no autograd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class HopDimProfile:
    """Per-hop output dimensions C_o,1..K.

    Built either from the relation dims[k] = max(1, round(d^max(k-l, 0) * c_in))
    (see make_profile) or from an explicit dimension list (profile_from_dims,
    in which case l and d are None).
    """

    c_in: int
    k_max: int
    dims: tuple[int, ...]
    l: int | None = None
    d: float | None = None

    def __post_init__(self):
        if self.k_max < 1 or len(self.dims) != self.k_max:
            raise ValueError("dims must have one entry per hop")
        if any(dim < 1 for dim in self.dims):
            raise ValueError("hop dimensions must be positive")

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def column_offsets(self) -> np.ndarray:
        """Start offset of each hop's block in the concatenated embedding."""
        return np.concatenate([[0], np.cumsum(self.dims)])


def make_profile(c_in: int, k: int, l: int, d: float) -> HopDimProfile:
    """Hop-dimension relation: full input dimension for the first l hops,
    then a geometric decay by factor d per additional hop.

    Fractional dimensions are rounded half away from zero and clamped to 1.
    """
    if c_in < 1:
        raise ValueError("c_in must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= l <= k:
        raise ValueError("l must satisfy 0 <= l <= k")
    if d <= 0:
        raise ValueError("compression ratio must be positive")
    dims = tuple(max(1, _round_half_away(d ** max(hop - l, 0) * c_in))
                 for hop in range(1, k + 1))
    return HopDimProfile(c_in=c_in, k_max=k, dims=dims, l=l, d=d)


def profile_from_dims(c_in: int, dims) -> HopDimProfile:
    """Profile with explicitly chosen per-hop dimensions (e.g. searched)."""
    return HopDimProfile(c_in=c_in, k_max=len(dims), dims=tuple(int(x) for x in dims))


@dataclass
class LadderModel:
    """Per-hop weights w_hops[k] (c_in x dims[k]) and the classifier weight.

    With concat aggregation w_out has sum(dims) rows; with add aggregation
    (zero-padded sum of hop embeddings) it has max(dims) rows.  ``relu``
    enables an optional rectifier between the hop embedding and the
    classifier (off by default: the base model is purely linear).
    """

    profile: HopDimProfile
    w_hops: list[np.ndarray]
    w_out: np.ndarray
    num_classes: int
    aggregation: str = "concat"
    relu: bool = False

    def weights(self) -> list[np.ndarray]:
        return [*self.w_hops, self.w_out]

    def copy(self) -> "LadderModel":
        return LadderModel(self.profile, [w.copy() for w in self.w_hops],
                           self.w_out.copy(), self.num_classes,
                           self.aggregation, self.relu)


def classifier_rows(profile: HopDimProfile, aggregation: str) -> int:
    if aggregation == "concat":
        return profile.total_dim
    if aggregation == "add":
        return max(profile.dims)
    raise ValueError(f"unknown aggregation {aggregation!r}")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   dtype=np.float64) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def init_model(profile: HopDimProfile, num_classes: int, seed: int, *,
               aggregation: str = "concat", dtype=np.float64,
               identity_hops: bool = False, relu: bool = False) -> LadderModel:
    """Glorot-uniform initialization, drawn hop weights first (hop order),
    classifier weight last.  With identity_hops the hop weights are fixed
    identity matrices (requires dims[k] == c_in) and consume no randomness.
    """
    rng = np.random.default_rng(seed)
    if identity_hops:
        if any(dim != profile.c_in for dim in profile.dims):
            raise ValueError("identity hop weights require dims == c_in")
        w_hops = [np.eye(profile.c_in, dtype=dtype) for _ in range(profile.k_max)]
    else:
        w_hops = [glorot_uniform(rng, profile.c_in, dim, dtype)
                  for dim in profile.dims]
    rows = classifier_rows(profile, aggregation)
    w_out = glorot_uniform(rng, rows, num_classes, dtype)
    return LadderModel(profile, w_hops, w_out, num_classes, aggregation, relu)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check_inputs(model: LadderModel, propagated) -> None:
    if len(propagated) != model.profile.k_max:
        raise ValueError(f"expected {model.profile.k_max} propagated matrices, "
                         f"got {len(propagated)}")
    for k, p in enumerate(propagated):
        if p.ndim != 2 or p.shape[1] != model.profile.c_in:
            raise ValueError(f"hop {k + 1}: features must be N x {model.profile.c_in}")


def forward(model: LadderModel, propagated):
    """Concatenated forward pass.

    Returns (h, logits, probs): h is the hop-wise concatenation of
    propagated[k] @ w_hops[k] in hop order, logits = h @ w_out, probs the
    row-wise softmax.
    """
    if model.aggregation != "concat":
        raise ValueError("forward requires a concat-aggregation model")
    _check_inputs(model, propagated)
    h = np.concatenate([p @ w for p, w in zip(propagated, model.w_hops)], axis=1)
    z = np.maximum(h, 0.0) if model.relu else h
    logits = z @ model.w_out
    return h, logits, softmax_rows(logits)


def _addition_embedding(model: LadderModel, propagated) -> np.ndarray:
    """Zero-pad each hop embedding on the right to max(dims) and sum."""
    width = max(model.profile.dims)
    n = propagated[0].shape[0]
    s = np.zeros((n, width), dtype=propagated[0].dtype)
    for p, w in zip(propagated, model.w_hops):
        s[:, :w.shape[1]] += p @ w
    return s


def forward_addition_variant(model: LadderModel, propagated) -> np.ndarray:
    """Forward pass of the addition ablation: hop embeddings are zero-padded
    to a common width and summed instead of concatenated.  Returns probs.
    """
    if model.aggregation != "add":
        raise ValueError("forward_addition_variant requires an add-aggregation model")
    _check_inputs(model, propagated)
    s = _addition_embedding(model, propagated)
    z = np.maximum(s, 0.0) if model.relu else s
    return softmax_rows(z @ model.w_out)


def normalize_mask(mask, n: int) -> np.ndarray:
    """Index-set view of a mask (bool array or index list), deduplicated."""
    mask = np.asarray(mask)
    if mask.dtype == bool:
        if len(mask) != n:
            raise ValueError("boolean mask length must equal node count")
        return np.flatnonzero(mask)
    idx = np.unique(mask.astype(np.int64))
    if len(idx) and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError("mask index out of range")
    return idx


def loss_and_gradients(model: LadderModel, propagated, labels, train_mask,
                       weight_decay: float = 0.0):
    """Mean masked cross-entropy plus (weight_decay/2) * sum of squared
    weights, with analytically derived gradients.

    Returns (loss, grads_hops, grad_out)."""
    labels = np.asarray(labels)
    n = propagated[0].shape[0]
    idx = normalize_mask(train_mask, n)
    if len(idx) == 0:
        raise ValueError("train mask selects no nodes")

    if model.aggregation == "concat":
        emb, logits, probs = forward(model, propagated)
    else:
        _check_inputs(model, propagated)
        emb = _addition_embedding(model, propagated)
        z = np.maximum(emb, 0.0) if model.relu else emb
        probs = softmax_rows(z @ model.w_out)

    y = labels[idx]
    loss = float(np.mean(-np.log(probs[idx, y])))
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float(np.sum(w * w))
                                         for w in model.weights())

    g = probs[idx].copy()
    g[np.arange(len(idx)), y] -= 1.0
    g /= len(idx)

    pre_classifier = np.maximum(emb[idx], 0.0) if model.relu else emb[idx]
    grad_out = pre_classifier.T @ g
    g_emb = g @ model.w_out.T  # gradient w.r.t. the (masked) embedding rows
    if model.relu:
        g_emb = g_emb * (emb[idx] > 0)
    offsets = model.profile.column_offsets()
    grads_hops = []
    for k, (p, w) in enumerate(zip(propagated, model.w_hops)):
        if model.aggregation == "concat":
            block = g_emb[:, offsets[k]:offsets[k + 1]]
        else:
            block = g_emb[:, :model.profile.dims[k]]
        gw = p[idx].T @ block
        if weight_decay:
            gw += weight_decay * w
        grads_hops.append(gw)
    if weight_decay:
        grad_out = grad_out + weight_decay * model.w_out
    return loss, grads_hops, grad_out


def predict(probs: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties resolve to the lowest class index."""
    return np.argmax(probs, axis=1)


def accuracy(probs: np.ndarray, labels, mask) -> float:
    idx = normalize_mask(mask, probs.shape[0])
    return float(np.mean(predict(probs[idx]) == np.asarray(labels)[idx]))


@dataclass
class BucketAccuracy:
    lo: float
    hi: float
    count: int
    accuracy: float


def bucket_accuracies(correct: np.ndarray, ratios: np.ndarray,
                      bucket_width: float) -> list[BucketAccuracy]:
    n_buckets = int(np.ceil(round(1.0 / bucket_width, 9)))
    idx = np.minimum((ratios / bucket_width).astype(np.int64), n_buckets - 1)
    out = []
    for b in range(n_buckets):
        sel = idx == b
        if not np.any(sel):
            continue  # empty buckets are absent, not zero
        out.append(BucketAccuracy(lo=b * bucket_width,
                                  hi=min((b + 1) * bucket_width, 1.0),
                                  count=int(sel.sum()),
                                  accuracy=float(np.mean(correct[sel]))))
    return out


def evaluate_by_homophily(model: LadderModel, propagated, labels, mask,
                          homophily_ratios, *,
                          bucket_width: float = 0.1) -> list[BucketAccuracy]:
    """Classification accuracy of masked nodes grouped by homophily ratio.

    Nodes whose ratio is undefined (NaN) are excluded; empty buckets are
    omitted from the result.
    """
    labels = np.asarray(labels)
    ratios = np.asarray(homophily_ratios, dtype=np.float64)
    idx = normalize_mask(mask, propagated[0].shape[0])
    if model.aggregation == "concat":
        _, _, probs = forward(model, propagated)
    else:
        probs = forward_addition_variant(model, propagated)
    defined = ~np.isnan(ratios[idx])
    idx = idx[defined]
    correct = predict(probs[idx]) == labels[idx]
    return bucket_accuracies(correct, ratios[idx], bucket_width)
