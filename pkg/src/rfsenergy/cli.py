"""Command-line surface: fit, score, eval, fewshot, synth.

Exit codes: 0 success, 1 domain error (diagnostic on stderr), 2 usage error.
All file outputs are written atomically. Scores are printed with 17
significant digits so printed values round-trip to the exact 64-bit result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import RfsEnergyError
from .estimation import fit_model, load_model, save_model
from .evaluation import (
    evaluate_category,
    few_shot_experiment,
    write_few_shot_csv,
    write_report_json,
    write_roc_csv,
)
from .ppf import load_sets, read_manifest, read_ppf
from .scoring import METHODS, ScoringConfig, score_set
from .synthetic import SyntheticConfig, generate_dataset


def _add_method_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=METHODS, default="energy",
                        help="scoring method (default: energy)")
    parser.add_argument("--topk", type=float, default=100.0, metavar="PCT",
                        help="percent of largest squared distances kept in the "
                             "energy's feature term (default: 100)")
    parser.add_argument("--as-squared", action="store_true",
                        help="use squared distances in the 'as' method")


def _scoring_config(args: argparse.Namespace) -> ScoringConfig:
    return ScoringConfig(method=args.method, top_k_percent=args.topk,
                         as_squared=args.as_squared)


def _cmd_fit(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    train = manifest.train_items()
    if not train:
        raise RfsEnergyError(f"manifest {args.manifest} has no train items")
    model = fit_model(load_sets(train))
    save_model(model, args.out)
    print(f"fit: {len(train)} sets, {model.n_train_points} points, dim {model.dim}, "
          f"rho {model.rho:.17g}, alpha {model.alpha:.17g} -> {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    pattern = read_ppf(args.input)
    value = score_set(pattern, model, _scoring_config(args))
    print(f"{value:.17g}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    manifest = read_manifest(args.manifest)
    config = _scoring_config(args)
    report = evaluate_category(model, manifest.test_items(), config,
                               category=manifest.category, jobs=args.jobs)
    write_report_json(report, args.report)
    if args.roc:
        write_roc_csv(report, args.roc)
    if args.plot:
        from .plotting import plot_roc

        plot_roc(report, args.plot)
    print(f"eval: {report.category or 'category'} method={report.method} "
          f"auc={report.auc:.17g} "
          f"({report.n_normal} normal / {report.n_anomalous} anomalous)")
    return 0


def _cmd_fewshot(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    train = manifest.train_items()
    if not train:
        raise RfsEnergyError(f"manifest {args.manifest} has no train items")
    shots = [int(tok) for tok in args.shots.split(",") if tok.strip()]
    if not shots:
        raise RfsEnergyError("--shots must list at least one count")
    pool = load_sets(train)
    test = [(read_ppf(item.path), item.label) for item in manifest.test_items()]
    results = few_shot_experiment(pool, test, shots, args.repeats, args.seed,
                                  _scoring_config(args), jobs=args.jobs)
    write_few_shot_csv(results, args.out)
    if args.plot:
        from .plotting import plot_few_shot

        plot_few_shot(results, args.plot)
    for r in results:
        print(f"fewshot: shots={r.shots} repeats={r.repeats} mean_auc={r.mean_auc:.17g}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = SyntheticConfig.from_json(doc)
    n_train = args.n_train if args.n_train is not None else int(doc.get("n_train", 0))
    n_test_normal = (args.n_test_normal if args.n_test_normal is not None
                     else int(doc.get("n_test_normal", 0)))
    n_test_anomalous = (args.n_test_anomalous if args.n_test_anomalous is not None
                        else int(doc.get("n_test_anomalous", 0)))
    manifest = generate_dataset(cfg, n_train, n_test_normal, n_test_anomalous,
                                args.out, category=str(doc.get("category", "synthetic")))
    print(f"synth: wrote {len(manifest.items)} sets + manifest under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfsenergy",
        description="Fit, score, and evaluate set-energy anomaly models "
                    "over descriptor-set (PPF) files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model from a manifest's train split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output model JSON path")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("score", help="score one descriptor-set file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="PPF file to score")
    _add_method_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", help="evaluate a model on a manifest's test split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    _add_method_flags(p)
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--roc", default=None, help="optional ROC CSV path")
    p.add_argument("--plot", default=None, help="optional ROC figure path (png/pdf)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("fewshot", help="repeated small-sample fit/eval experiment")
    p.add_argument("--manifest", required=True)
    p.add_argument("--shots", required=True, help="comma-separated shot counts, e.g. 1,5,10,16")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    _add_method_flags(p)
    p.add_argument("--out", required=True, help="output CSV path (shots,repeat,auc)")
    p.add_argument("--plot", default=None, help="optional AUC-vs-shots figure path")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_fewshot)

    p = sub.add_parser("synth", help="generate a synthetic descriptor-set corpus")
    p.add_argument("--config", required=True, help="synthetic config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--n-train", type=int, default=None)
    p.add_argument("--n-test-normal", type=int, default=None)
    p.add_argument("--n-test-anomalous", type=int, default=None)
    p.set_defaults(func=_cmd_synth)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (RfsEnergyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
