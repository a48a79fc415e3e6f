"""Test-set metrics with a symmetric/asymmetric breakdown."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import StructGNN
from .errors import ZeroVariance
from .molparse import is_symmetric, parse_smiles
from .training import Dataset, pearson

__all__ = ["EvalReport", "pearson", "r2", "rmse", "stratified_eval", "write_predictions_csv"]

STRATA = ("symmetric", "asymmetric")


def rmse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape or preds.size == 0:
        raise ValueError("rmse needs two non-empty arrays of equal shape")
    return float(np.sqrt(np.mean((preds - targets) ** 2)))


def r2(preds, targets) -> float:
    """1 - SS_res / SS_tot, with SS_tot taken about the targets' own mean."""
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape or preds.size < 2:
        raise ValueError("r2 needs two equal-length arrays of length >= 2")
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("r2 is undefined for constant targets")
    return 1.0 - float(np.sum((preds - targets) ** 2)) / ss_tot


@dataclass
class EvalReport:
    tasks: dict[str, dict] = field(default_factory=dict)
    stratified: dict[str, dict] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    smiles: list[str] = field(default_factory=list)
    symmetric: list[bool] = field(default_factory=list)
    y_true: np.ndarray | None = None
    y_pred: np.ndarray | None = None
    mask: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"tasks": self.tasks, "stratified": self.stratified, "metadata": self.metadata}


def _metrics(pred: np.ndarray, true: np.ndarray) -> dict:
    n = int(true.size)
    out: dict = {"n": n, "rmse": None, "r2": None}
    if n == 0:
        return out
    out["rmse"] = rmse(pred, true)
    try:
        out["r2"] = r2(pred, true)
    except (ValueError, ZeroVariance):
        pass
    return out


def stratified_eval(model: StructGNN, test: Dataset, metadata: dict | None = None) -> EvalReport:
    """Predict every test molecule and report metrics per task, overall and per stratum.

    A molecule is "symmetric" when its canonical ranking has a tie. Absent
    labels are skipped task by task; an empty stratum is reported with n=0
    and null metrics.
    """
    tasks = model.config.tasks
    smiles = test.smiles
    preds = model.predict_smiles(smiles)
    y, mask = test.targets(tasks)
    sym = np.array([is_symmetric(parse_smiles(s)) for s in smiles], dtype=bool)

    report = EvalReport(
        metadata={"seed": model.config.seed, "config_digest": model.config.digest(), **(metadata or {})},
        smiles=list(smiles),
        symmetric=sym.tolist(),
        y_true=y,
        y_pred=preds,
        mask=mask,
    )
    for j, task in enumerate(tasks):
        present = mask[:, j] > 0
        overall = _metrics(preds[present, j], y[present, j])
        try:
            overall["pearson"] = pearson(preds[present, j], y[present, j])
        except (ValueError, ZeroVariance):
            overall["pearson"] = None
        report.tasks[task] = overall
        strata = {}
        for name, flag in zip(STRATA, (sym, ~sym)):
            sel = present & flag
            strata[name] = _metrics(preds[sel, j], y[sel, j])
        report.stratified[task] = strata
    return report


def pooled_mse(strata: dict) -> float:
    """n-weighted mean of the strata's squared RMSEs."""
    total = sum(s["n"] for s in strata.values())
    if total == 0:
        return math.nan
    return sum(s["n"] * s["rmse"] ** 2 for s in strata.values() if s["n"]) / total


def write_predictions_csv(report: EvalReport, path: str | Path) -> None:
    tasks = list(report.tasks)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["smiles", "y_true_logp", "y_pred_logp", "y_true_logd", "y_pred_logd", "symmetric"])
        for i, smi in enumerate(report.smiles):
            row = [smi]
            for task in ("logp", "logd"):
                if task in tasks:
                    j = tasks.index(task)
                    true = repr(float(report.y_true[i, j])) if report.mask[i, j] else ""
                    row += [true, repr(float(report.y_pred[i, j]))]
                else:
                    row += ["", ""]
            row.append(int(report.symmetric[i]))
            w.writerow(row)
