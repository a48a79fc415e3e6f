"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .encoders import TASKS, Config, StructGNN, featurize_molecule
from .errors import DataError, FileUnreadable, NumericError, SmilesError
from .evaluation import stratified_eval, write_predictions_csv
from .featurize import (
    ATOM_FEATURE_NAMES,
    BOND_FEATURE_NAMES,
    GLOBAL_FEATURE_NAMES,
    atom_feature_matrix,
    bond_feature_matrix,
    global_descriptors,
)
from .ingest import ingest_csv, write_dataset_csv
from .molparse import canonical_smiles, is_symmetric, parse_smiles
from .persistence import ModelArtifact, load_model, save_model
from .substruct import extract_substructures
from .training import Dataset, SplitPlan, split_dataset, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

class UsageError(Exception):
    pass

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

def _emit_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)

def _read_smiles(args) -> list[str]:
    if args.smiles:
        return list(args.smiles)
    if args.smiles_file:
        try:
            text = Path(args.smiles_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise FileUnreadable(f"cannot read {args.smiles_file}: {exc}") from exc
    else:
        text = sys.stdin.read()
    # first whitespace-separated field of each non-blank line
    return [line.split()[0] for line in text.splitlines() if line.strip()]

def _load_data(args) -> Dataset:
    data, report = ingest_csv(args.data, args.smiles_col, args.logp_col, args.logd_col)
    if report.rejected:
        print(f"ingest: {len(report.rejected)} of {report.rows_read} rows rejected", file=sys.stderr)
    return data

def _config(args) -> Config:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
    overrides = {
        "tasks": tuple(t.strip() for t in args.tasks.split(",")) if args.tasks else None,
        "seed": args.seed,
        "epochs": args.epochs,
        "hidden_dim": args.hidden,
        "learning_rate": args.lr,
        "batch_size": args.batch_size,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_struct_encoder:
        base["use_struct_encoder"] = False
    if args.no_global_descriptors:
        base["use_global_descriptors"] = False
    if args.baseline == "morgan":
        base["model_type"] = "morgan"
    try:
        return Config.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc

# -- subcommands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    data, report = ingest_csv(args.data, args.smiles_col, args.logp_col, args.logd_col)
    write_dataset_csv(data, args.out)
    _emit_json(report.to_dict(), args.report)
    return EXIT_OK

def cmd_split(args) -> int:
    data = _load_data(args)
    plan = SplitPlan(args.test_fraction, args.val_fraction, args.folds, args.seed or 0)
    split = split_dataset(data, plan)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(split.test, out / "test.csv")
    for k, (tr, va) in enumerate(split.folds):
        write_dataset_csv(tr, out / f"fold{k}_train.csv")
        write_dataset_csv(va, out / f"fold{k}_val.csv")
    summary = {"test": len(split.test), "folds": [{"train": len(t), "validation": len(v)} for t, v in split.folds]}
    _emit_json(summary, None)
    return EXIT_OK

def cmd_train(args) -> int:
    config = _config(args)
    data = _load_data(args)
    history_fh = open(args.history, "w", encoding="utf-8") if args.history else sys.stdout

    def log(record, fold=None):
        if fold is not None:
            record = {"fold": fold, **record}
        history_fh.write(json.dumps(record) + "\n")
        history_fh.flush()

    try:
        if args.val:
            val_data, _ = ingest_csv(args.val, args.smiles_col, args.logp_col, args.logd_col)
            plan_folds = [(data, val_data)]
            test = None
        else:
            plan = SplitPlan(args.test_fraction, args.val_fraction, args.folds, config.seed)
            split = split_dataset(data, plan)
            test = split.test
            fold_ids = range(plan.folds) if args.cross_validate else [args.fold]
            if args.fold >= plan.folds:
                raise UsageError(f"--fold {args.fold} out of range for {plan.folds} folds")
            plan_folds = [split.folds[k] for k in fold_ids]

        fold_reports = []
        for k, (tr, va) in enumerate(plan_folds):
            fold = k if args.cross_validate else None
            model = StructGNN(config)
            result = train(model, tr, va, log=lambda r, f=fold: log(r, f))
            meta = {
                "seed": config.seed,
                "best_epoch": result.best_epoch,
                "best_val_loss": result.best_val_loss,
                "train_size": len(tr),
                "val_size": len(va),
                "data": [Path(p).name for p in args.data],
            }
            out = args.out if fold is None else f"{args.out}.fold{k}"
            save_model(ModelArtifact(model, meta), out)
            if test is not None and len(test):
                rep = stratified_eval(model, test).to_dict()
                rep["fold"] = k if fold is not None else args.fold
                fold_reports.append(rep)
        if args.test_report and fold_reports:
            _emit_json(fold_reports if args.cross_validate else fold_reports[0], args.test_report)
    finally:
        if history_fh is not sys.stdout:
            history_fh.close()
    return EXIT_OK

def cmd_predict(args) -> int:
    model = load_model(args.model).model
    tasks = model.config.tasks
    out_fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out_fh)
        w.writerow(["smiles", *[f"pred_{t}" for t in tasks], "error"])
        for smi in _read_smiles(args):
            try:
                mol = parse_smiles(smi)
                feats = featurize_molecule(mol, smi, model.config)
                pred = model.predict_features([feats])[0]
                w.writerow([smi, *[repr(float(v)) for v in pred], ""])
            except SmilesError as exc:
                w.writerow([smi, *[""] * len(tasks), f"{exc.code}: {exc}"])
    finally:
        if out_fh is not sys.stdout:
            out_fh.close()
    return EXIT_OK

def cmd_evaluate(args) -> int:
    model = load_model(args.model).model
    data = _load_data(args)
    report = stratified_eval(model, data)
    payload = report.to_dict()
    if not args.stratify_symmetry:
        payload.pop("stratified")
    _emit_json(payload, args.out)
    if args.predictions:
        write_predictions_csv(report, args.predictions)
    return EXIT_OK

def _emit_lines(records, path: str | None) -> None:
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_featurize(args) -> int:
    """One JSON object per molecule; feature columns follow the fixed layouts."""
    records = []
    for smi in _read_smiles(args):
        mol = parse_smiles(smi)
        records.append(
            {
                "smiles": smi,
                "canonical": canonical_smiles(mol),
                "atom_features": atom_feature_matrix(mol).tolist(),
                "bond_features": bond_feature_matrix(mol).tolist(),
                "descriptors": dict(zip(GLOBAL_FEATURE_NAMES, global_descriptors(mol).tolist())),
            }
        )
    if args.names:
        records.insert(
            0, {"atom_feature_names": list(ATOM_FEATURE_NAMES), "bond_feature_names": list(BOND_FEATURE_NAMES)}
        )
    _emit_lines(records, args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    records = []
    for smi in _read_smiles(args):
        mol = parse_smiles(smi)
        subs = extract_substructures(mol)
        records.append(
            {
                "smiles": smi,
                "symmetric": is_symmetric(mol),
                "substructures": subs.as_records(),
                "plain_atoms": subs.plain_atoms,
            }
        )
    _emit_lines(records, args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _data_flags(p, required=True) -> None:
    p.add_argument("--data", nargs="+", required=required, help="input CSV file(s)")
    p.add_argument("--smiles-col", default="smiles")
    p.add_argument("--logp-col", default="logp")
    p.add_argument("--logd-col", default="logd")

def _smiles_flags(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--smiles", nargs="+", help="SMILES given on the command line")
    g.add_argument("--smiles-file", help="one SMILES per line (default: standard input)")

def _split_flags(p) -> None:
    p.add_argument("--test-fraction", type=float, default=0.20)
    p.add_argument("--val-fraction", type=float, default=0.25)
    p.add_argument("--folds", type=int, default=4)

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="structgnn", description="Lipophilicity prediction with two-encoder graph networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="canonicalize and merge CSV files")
    _data_flags(p)
    p.add_argument("--out", required=True, help="merged dataset CSV")
    p.add_argument("--report", help="write the ingest report JSON here (default: stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="write test and fold CSVs")
    _data_flags(p)
    _split_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a model")
    _data_flags(p)
    _split_flags(p)
    p.add_argument("--val", nargs="+", help="explicit validation CSV(s); skips the internal split")
    p.add_argument("--fold", type=int, default=0, help="which validation fold to train on")
    p.add_argument("--cross-validate", action="store_true", help="train one model per fold")
    p.add_argument("--tasks", help=f"comma-separated subset of {','.join(TASKS)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--hidden", type=int, help="message passing hidden width")
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--config", help="JSON file of Config fields")
    p.add_argument("--no-struct-encoder", action="store_true")
    p.add_argument("--no-global-descriptors", action="store_true")
    p.add_argument("--baseline", choices=["morgan"])
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--history", help="JSON-lines history file (default: stdout)")
    p.add_argument("--test-report", help="write test-set EvalReport JSON here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict from SMILES")
    p.add_argument("--model", required=True)
    _smiles_flags(p)
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics on a labelled CSV")
    p.add_argument("--model", required=True)
    _data_flags(p)
    p.add_argument("--stratify-symmetry", action="store_true")
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.add_argument("--predictions", help="per-molecule predictions CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("featurize", help="dump atom, bond and global features as JSON lines")
    _smiles_flags(p)
    p.add_argument("--names", action="store_true", help="first line lists the feature column names")
    p.add_argument("--out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("extract-substructs", help="dump hyper-atom partitions as JSON lines")
    _smiles_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)
    return parser

def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
