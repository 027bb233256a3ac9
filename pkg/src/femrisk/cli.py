"""Command-line entry point for the fracture-risk pipeline.

Subcommands
-----------
synth         spec JSON -> cohort CSV
fe            voxel grid + material JSON -> FE parameter JSON + curve CSVs
fit           cohort CSV -> PCA + logistic risk-model JSON
evaluate      cohort CSV -> evaluation report JSON + ROC CSVs
compare-frax  cohort CSV + fitted model JSON -> DeLong JSON + both ROC CSVs
report        evaluation report JSON -> human-readable table

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 numerical failure.  All errors print one line `error: <reason>` to
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .classifiers import (ClassifierSpec, model_from_json, model_to_json,
                          predict_scores, train)
from .datamodel import (FeatureSet, build_feature_matrix, load_cohort,
                        save_cohort)
from .errors import DataError, FemriskError, NumericalError
from .evaluate import (CvConfig, ResampleConfig, build_report, cell_name,
                       compare_with_frax, fe9_matrix, fit_and_score, mix_seed,
                       run_lgocv, run_resample_comparison, stratified_split,
                       write_roc_csv)
from .femodel import (SolveControl, MaterialModel, compute_fe_parameters,
                      extract_result, load_grid, material_from_file,
                      solve_load_case, LOAD_CASES)
from .stats.pca import (fit_pca, pc_scores, pca_from_json, pca_to_json,
                        risk_index, select_significant_pcs)
from .synth import default_spec, generate_cohort, load_spec

STRATA = ("all", "male", "female")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0,
                   help="base seed (64-bit unsigned)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--stratum", choices=STRATA, default="all")
    p.add_argument("--paper-mode", action="store_true",
                   help="fit PCA once on the whole sample before evaluation "
                        "(leaky; kept for comparability) instead of refitting "
                        "inside every training fold")


def build_parser() -> _Parser:
    parser = _Parser(prog="femrisk",
                     description="Hip fracture risk pipeline: synthetic cohorts, "
                                 "FE strength surrogate, PCA risk index, evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    p.add_argument("--spec", help="cohort spec JSON (default: built-in)")
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("fe", help="run the FE surrogate on a voxel grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--material", help="material + solver control JSON "
                                      "(default: built-in constants)")
    p.add_argument("--out", required=True, help="FE parameter JSON path")
    p.add_argument("--curves-dir", help="write per-load-case force-displacement CSVs here")
    p.add_argument("--yield-policy", choices=("error", "ultimate"), default="error")
    _add_common(p)

    p = sub.add_parser("fit", help="fit the PCA risk index and logistic model")
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", help="model JSON path")
    p.add_argument("--features", default="PC1_ABMD_COV",
                   help="feature set name (default PC1_ABMD_COV)")
    _add_common(p)

    p = sub.add_parser("evaluate", help="cross-validated model comparison")
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--roc-dir", help="write model/FRAX ROC CSVs here")
    p.add_argument("--features", nargs="+", default=["PC1_ABMD_COV", "ABMD_COV"])
    p.add_argument("--classifiers", nargs="+", default=["logistic", "pls"],
                   choices=("logistic", "lda", "qda", "pls", "knn"))
    p.add_argument("--repeats", type=int, default=25)
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--cv-fraction", type=float, default=0.75)
    p.add_argument("--resample-fraction", type=float, default=0.8)
    p.add_argument("--holdout-fraction", type=float, default=0.8,
                   help="train share of the initial train/test split")
    p.add_argument("--skip-frax", action="store_true")
    _add_common(p)

    p = sub.add_parser("compare-frax", help="DeLong test of a fitted model vs FRAX")
    p.add_argument("--cohort", required=True)
    p.add_argument("--model", required=True, help="model JSON from `fit`")
    p.add_argument("--out", required=True, help="DeLong result JSON path")
    p.add_argument("--roc-dir")
    _add_common(p)

    p = sub.add_parser("report", help="render an evaluation report as a table")
    p.add_argument("--input", required=True, help="report JSON from `evaluate`")
    _add_common(p)
    return parser


def _write_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_synth(args) -> int:
    spec = load_spec(args.spec) if args.spec else default_spec()
    cohort = generate_cohort(spec, args.seed)
    save_cohort(cohort, args.out)
    print(f"wrote {len(cohort.records)} subjects to {args.out}")
    return 0


def cmd_fe(args) -> int:
    grid = load_grid(args.grid)
    if args.material:
        material, control = material_from_file(args.material)
    else:
        material, control = MaterialModel(), SolveControl()
    if args.curves_dir:
        curves_dir = Path(args.curves_dir)
        curves_dir.mkdir(parents=True, exist_ok=True)
        values = {}
        prefix = {"stance": "S", "posterior": "P",
                  "posterolateral": "PL", "lateral": "L"}
        for case in LOAD_CASES:
            curve = solve_load_case(grid, material, case, control)
            res = extract_result(curve, args.yield_policy)
            values[prefix[case.name] + "y"] = res.yield_load
            values[prefix[case.name] + "u"] = res.ultimate_load
            values[prefix[case.name] + "energy"] = res.energy
            out = curves_dir / f"{case.name}.csv"
            with open(out, "w", encoding="utf-8") as fh:
                fh.write("displacement_mm,force_n\n")
                for d, f in zip(curve.displacement, curve.force):
                    fh.write(f"{d:.10g},{f:.10g}\n")
        from .datamodel import FeParameterSet
        fe = FeParameterSet(**values)
    else:
        fe = compute_fe_parameters(grid, material, control, args.yield_policy)
    doc = {name: getattr(fe, name) for name in
           ("Sy", "Su", "Senergy", "Py", "Pu", "Penergy",
            "PLy", "PLu", "PLenergy", "Ly", "Lu", "Lenergy")}
    _write_json(doc, args.out)
    print(f"wrote FE parameters to {args.out}")
    return 0


def cmd_fit(args) -> int:
    cohort = load_cohort(args.cohort).stratum(args.stratum)
    feature_set = FeatureSet.parse(args.features)
    pca = fit_pca(fe9_matrix(cohort))
    scores = pc_scores(pca, fe9_matrix(cohort))
    n_check = min(4, scores.shape[1])
    retained, pvals = select_significant_pcs(scores[:, :n_check], cohort.labels())
    pc1 = risk_index(pca, fe9_matrix(cohort))
    x, y, cols = build_feature_matrix(cohort, feature_set, args.stratum, pc1)
    model = train(ClassifierSpec("logistic"), x, y, cols)
    doc = {
        "stratum": args.stratum,
        "feature_set": feature_set.name,
        "pc1_variance_share": float(pca.variance_shares[0]),
        "pc_p_values": [float(p) for p in pvals],
        "retained_pcs": [i + 1 for i in retained],
        "pca": pca_to_json(pca),
        "classifier": model_to_json(model),
    }
    if args.out:
        _write_json(doc, args.out)
    print(f"pc1_variance_share {pca.variance_shares[0]:.4f}")
    for j, p in enumerate(pvals):
        mark = " (retained)" if j in retained else ""
        print(f"pc{j + 1} p {p:.4g}{mark}")
    if args.out:
        print(f"wrote model to {args.out}")
    return 0


def _score_with_model(doc, cohort, stratum):
    pca = pca_from_json(doc["pca"])
    model = model_from_json(doc["classifier"])
    feature_set = FeatureSet.parse(doc["feature_set"])
    pc1 = risk_index(pca, fe9_matrix(cohort))
    x, y, _ = build_feature_matrix(cohort, feature_set, stratum, pc1)
    return predict_scores(model, x), y


def cmd_evaluate(args) -> int:
    cohort = load_cohort(args.cohort).stratum(args.stratum)
    feature_sets = [FeatureSet.parse(n) for n in args.features]
    specs = [ClassifierSpec(k) for k in args.classifiers]
    mode = "paper (whole-sample PCA)" if args.paper_mode else "fold-internal PCA refit"
    print(f"mode: {mode}")

    pca_full = fit_pca(fe9_matrix(cohort)) if args.paper_mode else None
    train_c, test_c = stratified_split(cohort, args.holdout_fraction,
                                       mix_seed(args.seed, 0, 0))
    cv_cfg = CvConfig(train_fraction=args.cv_fraction, repeats=args.repeats,
                      seed=mix_seed(args.seed, 1, 0))
    rs_cfg = ResampleConfig(resamples=args.resamples,
                            train_fraction=args.resample_fraction,
                            seed=mix_seed(args.seed, 2, 0))

    lgocv = {}
    for fs in feature_sets:
        for sp in specs:
            lgocv[cell_name(fs, sp)] = run_lgocv(
                train_c, fs, sp, cv_cfg, args.stratum, pca_full)
    resamp = run_resample_comparison(train_c, feature_sets, specs, rs_cfg,
                                     args.stratum, pca_full, threads=args.threads)

    extra = {
        "lgocv": {name: {"auc_mean": float(np.mean(v)),
                         "auc_sd": float(np.std(v, ddof=1)),
                         "aucs": v}
                  for name, v in lgocv.items()},
        "mode": "paper" if args.paper_mode else "fold_internal",
        "stratum": args.stratum,
    }
    if not args.skip_frax and all(r.frax_prob is not None for r in cohort):
        fs0, sp0 = feature_sets[0], specs[0]
        scores_all, _, _ = fit_and_score(train_c, cohort, fs0, sp0,
                                         args.stratum, pca_full)
        dl, roc_m, roc_f = compare_with_frax(cohort, scores_all)
        extra["frax"] = {
            "cell": cell_name(fs0, sp0),
            "auc_model": dl.auc_a, "auc_frax": dl.auc_b,
            "delta": dl.auc_a - dl.auc_b, "z": dl.z, "p": dl.p,
        }
        if args.roc_dir:
            roc_dir = Path(args.roc_dir)
            roc_dir.mkdir(parents=True, exist_ok=True)
            write_roc_csv(roc_m, roc_dir / "model_roc.csv")
            write_roc_csv(roc_f, roc_dir / "frax_roc.csv")

    configs = {
        "features": [fs.name for fs in feature_sets],
        "classifiers": [sp.kind for sp in specs],
        "cv": {"repeats": cv_cfg.repeats, "train_fraction": cv_cfg.train_fraction},
        "resample": {"resamples": rs_cfg.resamples,
                     "train_fraction": rs_cfg.train_fraction},
        "holdout_fraction": args.holdout_fraction,
    }
    text = build_report({"cells": resamp.cells, "comparisons": resamp.comparisons},
                        configs, args.seed, extra)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote report to {args.out}")
    return 0


def cmd_compare_frax(args) -> int:
    cohort = load_cohort(args.cohort).stratum(args.stratum)
    try:
        with open(args.model, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"model file not found: {args.model}")
    except json.JSONDecodeError as exc:
        raise DataError(f"bad model JSON: {exc}")
    scores, _ = _score_with_model(doc, cohort, args.stratum)
    dl, roc_m, roc_f = compare_with_frax(cohort, scores)
    _write_json({"auc_model": dl.auc_a, "auc_frax": dl.auc_b,
                 "delta": dl.auc_a - dl.auc_b, "z": dl.z, "p": dl.p,
                 "direction": dl.direction}, args.out)
    if args.roc_dir:
        roc_dir = Path(args.roc_dir)
        roc_dir.mkdir(parents=True, exist_ok=True)
        write_roc_csv(roc_m, roc_dir / "model_roc.csv")
        write_roc_csv(roc_f, roc_dir / "frax_roc.csv")
    print(f"auc_model {dl.auc_a:.3f} auc_frax {dl.auc_b:.3f} p {dl.p:.4g}")
    return 0


def cmd_report(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"report file not found: {args.input}")
    except json.JSONDecodeError as exc:
        raise DataError(f"bad report JSON: {exc}")
    cells = doc.get("cells", {})
    lgocv = doc.get("lgocv", {})
    print(f"stratum: {doc.get('stratum', '?')}   mode: {doc.get('mode', '?')}"
          f"   seed: {doc.get('seed', '?')}")
    width = max([len(n) for n in cells] + [10])
    print(f"{'cell':<{width}}  {'resam AUC':>9}  {'SD':>6}  {'cv AUC':>7}  {'cv SD':>6}")
    for name in sorted(cells):
        c = cells[name]
        l = lgocv.get(name, {})
        cv_m = f"{l['auc_mean']:.3f}" if l else "   -  "
        cv_s = f"{l['auc_sd']:.3f}" if l else "  -  "
        print(f"{name:<{width}}  {c['auc_mean']:>9.3f}  {c['auc_sd']:>6.3f}"
              f"  {cv_m:>7}  {cv_s:>6}")
    comps = doc.get("comparisons", {})
    if comps:
        print("paired one-sided tests:")
        for name in sorted(comps):
            print(f"  {name}: t {comps[name]['t']:.3f}  p {comps[name]['p']:.3g}")
    frax = doc.get("frax")
    if frax:
        print(f"FRAX comparison ({frax['cell']}): model AUC {frax['auc_model']:.3f}"
              f" vs FRAX {frax['auc_frax']:.3f}, DeLong p {frax['p']:.3g}")
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "fe": cmd_fe,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "compare-frax": cmd_compare_frax,
    "report": cmd_report,
}


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned value")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FemriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
