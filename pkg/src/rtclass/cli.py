"""Command-line entry point: ``rtclass simulate|evaluate|importance|export``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codegen import DIALECTS, ExportError, export_model, run_c99
from .features import FEATURE_NAMES, FeatureError, featurize_dataset
from .ingestion import DatasetError, TraceFileError, load_dataset, read_manifest
from .learn import (
    FAMILIES,
    ForestConfig,
    IntegrityError,
    MlpConfig,
    SvmConfig,
    canonical_family,
    format_table,
    load_model,
    rank_parameters,
    save_model,
    subcarrier_group_accuracy,
    train_model,
)
from .learn.importance import evaluate_parameter, forest_feature_importance
from .preprocess import FILTER_GRID, ParameterError, canonical_parameter
from .seeding import child_seed
from .synth import generate_dataset
from .trace_model import Label, Tech

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
SEED_ENV = "RTCLASS_SEED"

DEFAULT_PARAMETERS = {
    Tech.WLAN_CSI: ("RSSI", "RXP", "L_AMP_G4", "H_AMP_G4", "S_AMP_G4"),
    Tech.UWB: ("FC", "FPP", "CIR_POWER", "RXP", "A_ALL", "A_15"),
}
TECH_NAMES = {"csi": Tech.WLAN_CSI, "wlan_csi": Tech.WLAN_CSI, "wlan": Tech.WLAN_CSI,
              "uwb": Tech.UWB}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return _seed(raw.strip())
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _add_model_options(p):
    p.add_argument("--trees", type=_positive_int, default=100, help="RF trees")
    p.add_argument("--max-depth", type=_positive_int, default=None, help="RF depth cap")
    p.add_argument("--svm-lambda", type=float, default=SvmConfig().lam)
    p.add_argument("--svm-epochs", type=_positive_int, default=SvmConfig().epochs)
    p.add_argument("--mlp-epochs", type=int, default=MlpConfig().epochs)
    p.add_argument("--mlp-lr", type=float, default=MlpConfig().learning_rate)
    p.add_argument("--hidden", type=_positive_int, default=None, help="MLP hidden units")


def _configs(args) -> dict:
    return {
        "rf": ForestConfig(n_trees=args.trees, max_depth=args.max_depth),
        "svm": SvmConfig(lam=args.svm_lambda, epochs=args.svm_epochs),
        "ann": MlpConfig(hidden=args.hidden, learning_rate=args.mlp_lr, epochs=args.mlp_epochs),
    }


def build_parser() -> _Parser:
    parser = _Parser(prog="rtclass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rtclass {__version__}")
    parser.add_argument("--config", help="flat key=value file overriding option defaults")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic labeled trace set")
    p.add_argument("--classes", default="idle,bicycle,car_like",
                   help="comma-separated labels (idle, bicycle, car_like)")
    p.add_argument("--per-class", type=_positive_int, default=200)
    p.add_argument("--tech", default="uwb", choices=sorted(TECH_NAMES))
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", default="synthetic", help="output directory")
    p.add_argument("--duration", type=float, default=None, help="trace length in seconds")
    p.add_argument("--noise", type=float, default=None, help="relative noise sigma")

    p = sub.add_parser("evaluate", help="10-fold CV of ANN/RF/SVM on one or more parameters")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", default="ann,rf,svm", help="comma list of ann, rf, svm")
    p.add_argument("--task", default="binary", choices=["binary", "multi"])
    p.add_argument("--parameter", default=None, help="comma list; default depends on tech")
    p.add_argument("--filter", default=",".join(FILTER_GRID), help="comma list of f0..f5")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", default=None, help="directory for report.json / report.txt")
    p.add_argument("--save-model", default=None,
                   help="train on the full set and save the model (single model/parameter/filter)")
    _add_model_options(p)

    p = sub.add_parser("importance", help="plot-ready CSV of importances or rankings")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", required=True, choices=["features", "parameters", "subcarrier-groups"])
    p.add_argument("--task", default="binary", choices=["binary", "multi"])
    p.add_argument("--model", default=None, help="comma list (default: rf, or all for groups)")
    p.add_argument("--parameter", default=None)
    p.add_argument("--filter", default=None)
    p.add_argument("--field", default="H", choices=["L", "H", "S"],
                   help="CSI training field for subcarrier groups")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    _add_model_options(p)

    p = sub.add_parser("export", help="emit standalone source for a saved model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--dialect", default="c99", choices=list(DIALECTS))
    p.add_argument("--out", default=None, help="source path (default: next to the model)")
    p.add_argument("--verify", action="store_true",
                   help="compile and compare against the in-memory model on a fuzz corpus")
    p.add_argument("--fuzz", type=_positive_int, default=10000)
    p.add_argument("--seed", type=_seed, default=0)
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config {path}: {exc.strerror or exc}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{n}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        overrides = _read_config(known.config)
        args_probe = parser.parse_args(argv)
        if args_probe.command is None:
            raise UsageError("rtclass: a command is required")
        sub = parser._subparsers._group_actions[0].choices[args_probe.command]
        dests = {a.dest: a for a in sub._actions}
        for key, raw in overrides.items():
            if key not in dests or key in ("help", "config"):
                raise UsageError(f"--config: unknown option {key!r} for {args_probe.command}")
            action = dests[key]
            if isinstance(action, argparse._StoreTrueAction):
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                conv = action.type or str
                try:
                    value = conv(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"--config: {key}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"--config: {key}: {value!r} not in {sorted(action.choices)}")
            sub.set_defaults(**{key: value})
            action.required = False
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("rtclass: a command is required (simulate, evaluate, importance, export)")
    return args


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is None:
        raise UsageError(f"simulate: a --seed (or {SEED_ENV}) is required for deterministic output")
    try:
        labels = [Label.parse(s) for s in _csv_list(args.classes)]
    except ValueError as exc:
        raise UsageError(f"simulate: --classes: {exc}") from None
    if not labels or len(set(labels)) != len(labels):
        raise UsageError("simulate: --classes needs distinct labels")
    overrides = {}
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    if args.noise is not None:
        overrides["noise_sigma"] = args.noise
    tech = TECH_NAMES[args.tech]
    ds, manifest = generate_dataset({lab: args.per_class for lab in labels}, tech, seed,
                                    overrides, args.out)
    counts = ", ".join(f"{lab.value}={n}" for lab, n in ds.class_counts.items())
    print(f"wrote {len(ds)} {tech.value} traces ({counts}) and "
          f"{Path(args.out) / 'manifest.csv'}")
    return EXIT_OK


def _load(args):
    manifest = read_manifest(args.manifest)
    seed = args.seed
    if seed is None:
        seed = _env_seed()
    if seed is None:
        seed = manifest.seed
    ds = load_dataset(manifest).for_task(args.task)
    return ds, seed


def _families(text: str | None, default) -> list[str]:
    names = _csv_list(text) if text else list(default)
    try:
        return [canonical_family(n) for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _filters(text: str) -> list[str]:
    names = _csv_list(text)
    bad = [f for f in names if f not in FILTER_GRID]
    if bad or not names:
        raise UsageError(f"unknown filter(s) {bad}; expected {', '.join(FILTER_GRID)}")
    return names


def _check_k(k: int) -> None:
    if k < 2:
        raise UsageError(f"--k must be >= 2, got {k}")


def cmd_evaluate(args) -> int:
    _check_k(args.k)
    families = _families(args.model, FAMILIES)
    filters = _filters(args.filter)
    ds, seed = _load(args)
    params = ([canonical_parameter(p) for p in _csv_list(args.parameter)]
              if args.parameter else list(DEFAULT_PARAMETERS[ds.tech]))
    if args.save_model and (len(families) != 1 or len(params) != 1 or len(filters) != 1):
        raise UsageError("--save-model needs exactly one --model, --parameter and --filter")
    configs = _configs(args)
    reports = {}
    for fam in families:
        reports[fam] = [evaluate_parameter(ds, fam, p, f, configs[fam], args.k, seed)
                        for p in params for f in filters]
    title = (f"{'WLAN CSI' if ds.tech is Tech.WLAN_CSI else 'UWB'} - {args.task} task, "
             f"{args.k}-fold CV, seed {seed}")
    table = format_table(reports, title)
    doc = {
        "task": args.task, "tech": ds.tech.value, "k": args.k, "seed": seed,
        "class_counts": {lab.value: n for lab, n in ds.class_counts.items()},
        "reports": [r.to_dict() for fam in families for r in reports[fam]],
    }
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        _write(out / "report.txt", table)
        _write(out / "report.json", json.dumps(doc, indent=2) + "\n")
    if args.save_model:
        fm = featurize_dataset(ds, params[0], filters[0])
        model = train_model(families[0], fm.X, fm.y, configs[families[0]],
                            child_seed(seed, "final"), len(fm.classes))
        digest = save_model(model, args.save_model)
        print(f"saved {families[0]} model to {args.save_model} (sha256 {digest[:16]}…)")
    return EXIT_OK


def _csv(rows, header) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def cmd_importance(args) -> int:
    _check_k(args.k)
    ds, seed = _load(args)
    configs = _configs(args)
    if args.mode == "features":
        param = canonical_parameter(args.parameter or DEFAULT_PARAMETERS[ds.tech][0])
        filt = _filters(args.filter or "f0")[0]
        imp = forest_feature_importance(ds, param, filt, configs["rf"], seed)
        rows = sorted(imp.items(), key=lambda kv: (-kv[1], FEATURE_NAMES.index(kv[0])))
        text = _csv([(n, repr(v), "rf") for n, v in rows], ["name", "value", "model"])
    elif args.mode == "parameters":
        params = (_csv_list(args.parameter) if args.parameter
                  else list(DEFAULT_PARAMETERS[ds.tech]))
        filters = _filters(args.filter or ",".join(FILTER_GRID))
        rows = []
        for fam in _families(args.model, ["rf"]):
            ranking = rank_parameters(ds, fam, params, filters, configs[fam], args.k, seed)
            rows += [(s.parameter, repr(s.accuracy), fam, s.filter_name) for s in ranking]
        text = _csv(rows, ["name", "value", "model", "filter"])
    else:
        filt = _filters(args.filter or "f0")[0]
        try:
            table = subcarrier_group_accuracy(ds, _families(args.model, FAMILIES), args.field,
                                              filt, configs, args.k, seed)
        except ValueError as exc:
            raise DatasetError(str(exc)) from None
        rows = [(g, repr(acc), fam) for g, row in table.items() for fam, acc in row.items()]
        text = _csv(rows, ["name", "value", "model"])
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export(args) -> int:
    model_path = Path(args.model_file)
    if not model_path.exists():
        raise DatasetError(f"{model_path}: file not found")
    model = load_model(model_path)
    try:
        bundle = export_model(model, args.dialect)
    except ExportError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out) if args.out else model_path.with_suffix(bundle.suffix)
    _write(out, bundle.source)
    src_digest = hashlib.sha256(bundle.source.encode()).hexdigest()
    _write(out.with_name(out.name + ".sha256"),
           f"{src_digest}  {out.name}\nmodel {bundle.digest}\n")
    print(f"wrote {out} ({bundle.dialect}, entry {bundle.entry}, model sha256 {bundle.digest[:16]}…)")
    if args.verify:
        if bundle.dialect != "c99":
            raise UsageError("--verify needs --dialect c99")
        rng = np.random.default_rng(child_seed(args.seed, "fuzz"))
        X = rng.uniform(-0.5, 1.5, size=(args.fuzz, len(bundle.feature_names)))
        X = X.astype(np.float32).astype(np.float64)
        got = run_c99(bundle, X)
        want = model.predict(X)
        agree = float(np.mean(got == want))
        print(f"differential check: {agree * 100:.2f}% agreement on {args.fuzz} fuzz vectors")
        if agree < 1.0:
            return EXIT_INTERNAL
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "evaluate": cmd_evaluate,
            "importance": cmd_importance, "export": cmd_export}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, TraceFileError, FeatureError, ParameterError,
            IntegrityError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
