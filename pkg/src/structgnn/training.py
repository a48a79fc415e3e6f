"""Datasets, splits, losses and the optimization loop."""

from __future__ import annotations

import copy
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .encoders import StructGNN, collate
from .errors import DatasetTooSmall, EmptyBatch, NoLabels, NonFiniteValue, ZeroVariance
from .featurize import Standardizer


@dataclass(frozen=True)
class Sample:
    smiles: str
    logp: float | None = None
    logd: float | None = None

    def __post_init__(self) -> None:
        if self.logp is None and self.logd is None:
            raise NoLabels(f"sample {self.smiles!r} has neither logP nor logD")

    def label(self, task: str) -> float | None:
        return getattr(self, task)


@dataclass
class Dataset:
    samples: list[Sample]
    provenance: str = ""

    def __post_init__(self) -> None:
        seen = set()
        for s in self.samples:
            if s.smiles in seen:
                raise ValueError(f"duplicate canonical SMILES {s.smiles!r}")
            seen.add(s.smiles)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def subset(self, indices: Sequence[int], provenance: str | None = None) -> Dataset:
        return Dataset([self.samples[i] for i in indices], provenance or self.provenance)

    @property
    def smiles(self) -> list[str]:
        return [s.smiles for s in self.samples]

    def targets(self, tasks: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """(values, mask) arrays of shape (n, len(tasks)); absent labels are 0 with mask 0."""
        y = np.zeros((len(self.samples), len(tasks)))
        mask = np.zeros_like(y)
        for i, s in enumerate(self.samples):
            for j, t in enumerate(tasks):
                v = s.label(t)
                if v is not None:
                    y[i, j] = v
                    mask[i, j] = 1.0
        return y, mask


@dataclass
class SplitPlan:
    test_fraction: float = 0.20
    val_fraction: float = 0.25
    folds: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.test_fraction < 1 and 0 < self.val_fraction < 1):
            raise ValueError("fractions must lie in (0, 1)")
        if self.folds < 1:
            raise ValueError("folds must be >= 1")
        if self.folds * self.val_fraction > 1 + 1e-12:
            raise ValueError("validation blocks would overlap: folds * val_fraction > 1")


@dataclass
class Split:
    test: Dataset
    folds: list[tuple[Dataset, Dataset]]


def split_dataset(data: Dataset, plan: SplitPlan) -> Split:
    """Hold out a test set, then carve disjoint validation blocks from the rest."""
    n = len(data)
    if n < 10:
        raise DatasetTooSmall(f"need at least 10 samples to split, got {n}")
    perm = np.random.default_rng(plan.seed).permutation(n)
    n_test = int(round(plan.test_fraction * n))
    test_idx, rest = perm[:n_test], perm[n_test:]
    # rounded cumulative boundaries keep every block within one of its target size
    edges = [int(round(k * plan.val_fraction * len(rest))) for k in range(plan.folds + 1)]
    folds = []
    for k in range(plan.folds):
        lo, hi = edges[k], edges[k + 1]
        val_idx = rest[lo:hi]
        train_idx = np.concatenate([rest[:lo], rest[hi:]])
        folds.append(
            (data.subset(train_idx, f"train[{k}]"), data.subset(val_idx, f"validation[{k}]"))
        )
    return Split(data.subset(test_idx, "test"), folds)


# -- losses -------------------------------------------------------------------


def rmse_loss(preds, targets) -> Tensor:
    """sqrt(mean((preds - targets)^2)) as a differentiable scalar."""
    preds = ad.as_tensor(preds)
    targets = np.asarray(targets, dtype=float)
    if preds.data.size == 0 or targets.size == 0:
        raise EmptyBatch("rmse_loss on an empty batch")
    if preds.data.size != targets.size:
        raise ValueError("preds and targets differ in length")
    diff = ad.sub(preds, targets.reshape(preds.shape))
    return ad.sqrt(ad.mean_all(ad.square(diff)))


def masked_multitask_loss(preds, targets, mask) -> Tensor:
    """Mean over tasks of the per-task RMSE, using only labelled entries.

    Tasks without any label in the batch are left out of the mean; with a
    single column this is plain RMSE.
    """
    preds = ad.as_tensor(preds)
    targets = np.asarray(targets, dtype=float).reshape(preds.shape)
    mask = np.asarray(mask, dtype=float).reshape(preds.shape)
    if preds.data.size == 0:
        raise EmptyBatch("masked_multitask_loss on an empty batch")
    counts = mask.sum(axis=0)
    present = np.flatnonzero(counts > 0)
    if present.size == 0:
        raise NoLabels("no labels present in batch")
    sq = ad.mul(ad.square(ad.sub(preds, targets)), mask)
    # (1, T) per-task mean squared errors; absent tasks get a dummy divisor
    mse = ad.mul(ad.sum_rows(sq), 1.0 / np.where(counts > 0, counts, 1.0))
    select = np.zeros((preds.shape[1], present.size))
    select[present, np.arange(present.size)] = 1.0
    return ad.mean_all(ad.sqrt(ad.matmul(mse, select)))


def per_task_rmse(preds: np.ndarray, targets: np.ndarray, mask: np.ndarray) -> list[float | None]:
    out = []
    for j in range(preds.shape[1]):
        m = mask[:, j] > 0
        out.append(float(np.sqrt(np.mean((preds[m, j] - targets[m, j]) ** 2))) if m.any() else None)
    return out


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("pearson correlation is undefined for a constant vector")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


# -- training -----------------------------------------------------------------


@dataclass
class TrainResult:
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = math.inf


def fit_descriptor_scaler(model: StructGNN, train: Dataset) -> None:
    feats = [model.featurize(s) for s in train.smiles]
    model.scaler = Standardizer.fit(np.stack([f.descriptors for f in feats]))


def evaluate_loss(model: StructGNN, data: Dataset) -> tuple[float, list[float | None]]:
    tasks = model.config.tasks
    preds = model.predict_features([model.featurize(s) for s in data.smiles])
    y, mask = data.targets(tasks)
    with ad.no_grad():
        loss = masked_multitask_loss(preds, y, mask).item()
    return loss, per_task_rmse(preds, y, mask)


def train(
    model: StructGNN,
    train_set: Dataset,
    val_set: Dataset,
    *,
    epochs: int | None = None,
    patience: int | None = -1,
    log: Callable[[dict], None] | None = None,
) -> TrainResult:
    """Mini-batch Adam with early stopping on validation loss.

    The model ends up holding the parameters from the best validation epoch.
    ``patience=None`` disables early stopping; the default (-1) uses the
    config value.
    """
    cfg = model.config
    epochs = cfg.epochs if epochs is None else epochs
    if patience == -1:
        patience = cfg.patience
    tasks = cfg.tasks

    fit_descriptor_scaler(model, train_set)
    feats = [model.featurize(s) for s in train_set.smiles]
    y, mask = train_set.targets(tasks)
    labelled = mask.sum(axis=1) > 0
    if not labelled.any():
        raise NoLabels(f"training set has no labels for tasks {tasks}")
    index = np.flatnonzero(labelled)

    rng = np.random.default_rng([cfg.seed, 1])
    opt = ad.Adam(model.parameters(), lr=cfg.learning_rate)
    result = TrainResult()
    best_params = copy.deepcopy({k: v.data for k, v in model.params.items()})
    since_best = 0

    for epoch in range(1, epochs + 1):
        order = rng.permutation(index)
        losses = []
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            try:
                opt.zero_grad()
                out = model.forward(collate([feats[i] for i in idx]), rng if cfg.dropout else None)
                loss = masked_multitask_loss(out, y[idx], mask[idx])
                loss.backward()
                opt.step()
            except NonFiniteValue as exc:
                raise NonFiniteValue(f"training diverged at epoch {epoch}, batch {b}: {exc}") from exc
            losses.append(loss.item())

        val_loss, val_rmse = evaluate_loss(model, val_set)
        record = {
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_loss": val_loss,
            "val_rmse": dict(zip(tasks, val_rmse)),
        }
        result.history.append(record)
        if log is not None:
            log(record)

        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            best_params = copy.deepcopy({k: v.data for k, v in model.params.items()})
            since_best = 0
        else:
            since_best += 1
            if patience is not None and since_best >= patience:
                break

    for k, v in model.params.items():
        v.data[...] = best_params[k]
    return result
