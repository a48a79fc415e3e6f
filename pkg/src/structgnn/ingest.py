"""CSV ingestion: parse, canonicalize and merge duplicate molecules."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .errors import AllRowsRejected, FileUnreadable, MissingColumn, SmilesError
from .molparse import canonical_smiles, parse_smiles
from .training import Dataset, Sample


@dataclass
class Rejection:
    source: str
    row: int
    smiles: str
    reason: str
    message: str = ""


@dataclass
class IngestReport:
    rows_read: int = 0
    rejected: list[Rejection] = field(default_factory=list)
    unique: int = 0
    dual_labeled: int = 0
    conflicting_duplicates: int = 0

    @property
    def accepted(self) -> int:
        return self.rows_read - len(self.rejected)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_accepted": self.accepted,
            "rows_rejected": len(self.rejected),
            "rejections": [
                {"source": r.source, "row": r.row, "smiles": r.smiles, "reason": r.reason, "message": r.message}
                for r in self.rejected
            ],
            "unique_smiles": self.unique,
            "dual_labeled": self.dual_labeled,
            "conflicting_duplicates": self.conflicting_duplicates,
        }


def _label(raw: str | None) -> float | None:
    if raw is None:
        return None
    raw = raw.strip()
    if not raw:
        return None
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("non-finite label")
    return value


def ingest_csv(
    paths: str | Path | Sequence[str | Path],
    smiles_col: str = "smiles",
    logp_col: str = "logp",
    logd_col: str = "logd",
) -> tuple[Dataset, IngestReport]:
    """Read one or more CSV files into a deduplicated :class:`Dataset`.

    Molecules are keyed by canonical SMILES; repeated labels for the same task
    are averaged, and a logP row and a logD row for the same molecule merge
    into one dual-labelled sample. Rows that fail to parse are rejected with
    the error's reason code.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    report = IngestReport()
    values: dict[str, dict[str, list[float]]] = {}

    for path in paths:
        path = Path(path)
        try:
            fh = path.open(newline="", encoding="utf-8")
        except OSError as exc:
            raise FileUnreadable(f"cannot read {path}: {exc}") from exc
        with fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            if smiles_col not in header:
                raise MissingColumn(f"{path}: missing SMILES column {smiles_col!r}")
            label_cols = [c for c in (logp_col, logd_col) if c in header]
            if not label_cols:
                raise MissingColumn(f"{path}: needs at least one of {logp_col!r}, {logd_col!r}")
            for rowno, row in enumerate(reader, start=2):
                report.rows_read += 1
                _ingest_row(path, rowno, row, smiles_col, logp_col, logd_col, values, report)

    if not values:
        raise AllRowsRejected(f"all {report.rows_read} rows were rejected")

    samples = []
    for smi, labels in values.items():
        merged = {}
        for task, vals in labels.items():
            if len(vals) > 1 and len(set(vals)) > 1:
                report.conflicting_duplicates += 1
            merged[task] = sum(vals) / len(vals) if vals else None
        samples.append(Sample(smi, merged.get("logp"), merged.get("logd")))
    report.unique = len(samples)
    report.dual_labeled = sum(1 for s in samples if s.logp is not None and s.logd is not None)
    provenance = ",".join(Path(p).name for p in paths)
    return Dataset(samples, provenance), report


def _ingest_row(path, rowno, row, smiles_col, logp_col, logd_col, values, report) -> None:
    raw = (row.get(smiles_col) or "").strip()
    try:
        logp = _label(row.get(logp_col))
        logd = _label(row.get(logd_col))
    except ValueError as exc:
        report.rejected.append(Rejection(str(path), rowno, raw, "BadLabel", str(exc)))
        return
    if logp is None and logd is None:
        report.rejected.append(Rejection(str(path), rowno, raw, "NoLabels", "row has no label"))
        return
    try:
        smi = canonical_smiles(parse_smiles(raw))
    except SmilesError as exc:
        report.rejected.append(Rejection(str(path), rowno, raw, exc.code, str(exc)))
        return
    entry = values.setdefault(smi, {"logp": [], "logd": []})
    if logp is not None:
        entry["logp"].append(logp)
    if logd is not None:
        entry["logd"].append(logd)


def write_dataset_csv(data: Iterable[Sample], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["smiles", "logp", "logd"])
        for s in data:
            w.writerow([s.smiles, "" if s.logp is None else repr(s.logp), "" if s.logd is None else repr(s.logd)])


def desk_sample_path() -> Path:
    """Path of the bundled 500-molecule sample (synthetic labels, see README)."""
    return Path(str(files("structgnn") / "data" / "desk_sample.csv"))
