"""Full-batch training of the hop-ladder model.

The loss only involves labeled/metric rows, so after one propagation pass
the trainer works on the train/val/test row subset.  For the default purely
linear model the per-epoch cost factors through c_in x num_classes products
(hop weight and classifier collapse via associativity); the concatenated
embedding is never materialized.  The optional relu path materializes the
masked embedding instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CsrMatrix, propagate
from .model import (
    LadderModel,
    HopDimProfile,
    classifier_rows,
    init_model,
    normalize_mask,
    softmax_rows,
)
from .optim import AdamParams, AdamState


class TrainingDiverged(RuntimeError):
    """Raised when the training loss becomes non-finite."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 200
    weight_decay: float = 0.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dtype: str = "float64"  # "float32" trades precision for speed/memory
    aggregation: str = "concat"
    identity_hops: bool = False  # freeze hop weights to identity (requires dims == c_in)
    relu: bool = False
    keep_best_weights: bool = True  # snapshot the best-validation epoch

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.dtype not in ("float64", "float32"):
            raise ValueError("dtype must be float64 or float32")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


@dataclass
class Metrics:
    """Per-epoch curves; entry e is the state after e+1 optimizer steps."""

    train_loss: np.ndarray
    train_acc: np.ndarray
    val_acc: np.ndarray
    test_acc: np.ndarray
    best_epoch: int = 0  # index of the best validation accuracy (earliest tie)
    bucket_accuracy: list | None = None

    @property
    def final_train_loss(self) -> float:
        return float(self.train_loss[-1])

    @property
    def best_val_acc(self) -> float:
        return float(self.val_acc[self.best_epoch])

    @property
    def test_acc_at_best(self) -> float:
        return float(self.test_acc[self.best_epoch])

    def summary(self) -> dict:
        return {
            "best_epoch": int(self.best_epoch),
            "best_val_acc": self.best_val_acc,
            "test_acc_at_best": self.test_acc_at_best,
            "final_train_loss": self.final_train_loss,
            "final_train_acc": float(self.train_acc[-1]),
            "final_val_acc": float(self.val_acc[-1]),
            "final_test_acc": float(self.test_acc[-1]),
        }


class _EpochState:
    __slots__ = ("logits", "probs_train")

    def __init__(self, logits, probs_train):
        self.logits = logits
        self.probs_train = probs_train


class _Trainer:
    """Training loop over the masked row subset of the propagated features."""

    def __init__(self, model: LadderModel, propagated, labels, masks,
                 config: TrainConfig):
        n = propagated[0].shape[0]
        dt = config.np_dtype
        self.model = model
        self.config = config
        tr = normalize_mask(masks.train, n)
        va = normalize_mask(masks.val, n)
        te = normalize_mask(masks.test, n)
        if len(tr) == 0:
            raise ValueError("train mask selects no nodes")
        rows = np.unique(np.concatenate([tr, va, te]))
        pos = {int(r): i for i, r in enumerate(rows)}
        self.tr = np.array([pos[int(i)] for i in tr], dtype=np.int64)
        self.va = np.array([pos[int(i)] for i in va], dtype=np.int64)
        self.te = np.array([pos[int(i)] for i in te], dtype=np.int64)
        self.p_rows = [np.ascontiguousarray(p[rows], dtype=dt) for p in propagated]
        self.p_train = [np.ascontiguousarray(p[self.tr]) for p in self.p_rows]
        labels = np.asarray(labels)
        self.y = labels[rows]
        self.y_train = self.y[self.tr]
        self.onehot = np.zeros((len(tr), model.num_classes), dtype=dt)
        self.onehot[np.arange(len(tr)), self.y_train] = 1.0
        # the factored path relies on the model being purely linear
        self.factored = not model.relu
        self.adam = AdamParams(config.learning_rate, config.beta1,
                               config.beta2, config.eps)
        self.states: dict[int, AdamState] = {}
        if not config.identity_hops:
            for k, w in enumerate(model.w_hops):
                self.states[k] = AdamState(w.shape, dt)
        self.states[-1] = AdamState(model.w_out.shape, dt)

    # -- classifier row blocks ------------------------------------------
    def _u_slice(self, k: int) -> slice:
        if self.model.aggregation == "concat":
            off = self.model.profile.column_offsets()
            return slice(int(off[k]), int(off[k + 1]))
        return slice(0, self.model.profile.dims[k])

    def forward_state(self) -> _EpochState:
        m = self.model
        if self.factored:
            logits = None
            for k, p in enumerate(self.p_rows):
                u = m.w_out[self._u_slice(k)]
                folded = u if self.config.identity_hops else m.w_hops[k] @ u
                contrib = p @ folded
                logits = contrib if logits is None else logits + contrib
        else:
            emb = self._embedding(self.p_rows)
            z = np.maximum(emb, 0.0) if m.relu else emb
            logits = z @ m.w_out
        return _EpochState(logits, softmax_rows(logits[self.tr]))

    def _embedding(self, p_list):
        m = self.model
        if m.aggregation == "concat":
            return np.concatenate([p @ w for p, w in zip(p_list, m.w_hops)], axis=1)
        width = classifier_rows(m.profile, "add")
        s = np.zeros((p_list[0].shape[0], width), dtype=p_list[0].dtype)
        for p, w in zip(p_list, m.w_hops):
            s[:, :w.shape[1]] += p @ w
        return s

    def loss(self, state: _EpochState) -> float:
        nll = float(np.mean(-np.log(state.probs_train[np.arange(len(self.tr)),
                                                      self.y_train])))
        wd = self.config.weight_decay
        if wd:
            nll += 0.5 * wd * sum(float(np.sum(w.astype(np.float64) ** 2))
                                  for w in self.model.weights())
        return nll

    def step(self, state: _EpochState) -> None:
        """One Adam update from the gradients at the current weights."""
        m = self.model
        wd = self.config.weight_decay
        g = (state.probs_train - self.onehot) / len(self.tr)
        grad_out = np.zeros_like(m.w_out)
        if self.factored:
            for k, p_tr in enumerate(self.p_train):
                a = p_tr.T @ g  # (c_in, classes)
                u = m.w_out[self._u_slice(k)]
                if self.config.identity_hops:
                    grad_out[self._u_slice(k)] += a
                else:
                    grad_out[self._u_slice(k)] += m.w_hops[k].T @ a
                    gw = a @ u.T
                    if wd:
                        gw += wd * m.w_hops[k]
                    self.states[k].step(m.w_hops[k], gw, self.adam)
        else:
            emb_tr = self._embedding(self.p_train)
            z_tr = np.maximum(emb_tr, 0.0) if m.relu else emb_tr
            grad_out += z_tr.T @ g
            g_emb = g @ m.w_out.T
            if m.relu:
                g_emb = g_emb * (emb_tr > 0)
            for k, p_tr in enumerate(self.p_train):
                gw = p_tr.T @ g_emb[:, self._u_slice(k)]
                if wd:
                    gw += wd * m.w_hops[k]
                if not self.config.identity_hops:
                    self.states[k].step(m.w_hops[k], gw, self.adam)
        if wd:
            grad_out += wd * m.w_out
        self.states[-1].step(m.w_out, grad_out, self.adam)

    def accuracies(self, state: _EpochState) -> tuple[float, float, float]:
        pred = np.argmax(state.logits, axis=1)
        out = []
        for idx in (self.tr, self.va, self.te):
            out.append(float(np.mean(pred[idx] == self.y[idx])) if len(idx) else float("nan"))
        return tuple(out)


def train(adj: CsrMatrix, x: np.ndarray, labels, masks,
          profile: HopDimProfile, config: TrainConfig, *,
          num_classes: int | None = None,
          propagated=None) -> tuple[LadderModel, Metrics]:
    """Train a hop-ladder model; returns the model from the epoch with the
    best validation accuracy (earlier epoch on ties) and per-epoch metrics.

    Propagation runs once up front; pass ``propagated`` to reuse it across
    runs (e.g. seed sweeps).  Deterministic given the config seed.
    """
    labels = np.asarray(labels)
    if num_classes is None:
        num_classes = int(labels[labels >= 0].max()) + 1
    if propagated is None:
        propagated = propagate(adj, np.asarray(x, dtype=config.np_dtype),
                               profile.k_max)
    if len(propagated) < profile.k_max:
        raise ValueError("propagated features cover fewer hops than the profile")
    propagated = propagated[:profile.k_max]

    model = init_model(profile, num_classes, config.seed,
                       aggregation=config.aggregation, dtype=config.np_dtype,
                       identity_hops=config.identity_hops, relu=config.relu)
    trainer = _Trainer(model, propagated, labels, masks, config)

    epochs = config.epochs
    metrics = Metrics(train_loss=np.zeros(epochs), train_acc=np.zeros(epochs),
                      val_acc=np.zeros(epochs), test_acc=np.zeros(epochs))
    best_val = -1.0
    best_weights = None

    state = trainer.forward_state()
    for epoch in range(epochs):
        trainer.step(state)
        state = trainer.forward_state()
        loss = trainer.loss(state)
        if not np.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch + 1}")
        tr_acc, va_acc, te_acc = trainer.accuracies(state)
        metrics.train_loss[epoch] = loss
        metrics.train_acc[epoch] = tr_acc
        metrics.val_acc[epoch] = va_acc
        metrics.test_acc[epoch] = te_acc
        if va_acc > best_val:
            best_val = va_acc
            metrics.best_epoch = epoch
            if config.keep_best_weights:
                best_weights = ([w.copy() for w in model.w_hops], model.w_out.copy())

    if best_weights is not None:
        model.w_hops, model.w_out = best_weights
    return model, metrics
