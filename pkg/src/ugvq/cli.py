"""Command-line front end.

Every command reads files, writes JSON/CSV into ``--out-dir`` and leaves a
``manifest_<command>.json`` describing how the outputs were produced; feeding
that manifest to ``ugvq replay`` re-runs the command.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import DEFAULT_GRID, cluster_graph, sweep_restart
from .errors import InputError, LengthMismatch, NumericError
from .hodge import edges_csv, hodge_decompose, report as hodge_report
from .metafeat import align, derive_metrics, ingest_metadata, rank_metrics_by_srocc, write_metadata_csv
from .pairdata import adjacency_matrix, read_comparisons_csv, write_comparisons_csv
from .regress import fit_model, incremental_feature_eval, model_to_dict, predict
from .stats import one_way_anova, rank_differences, srocc, srocc_significance
from .synth import SynthConfig, generate, random_scores, synthetic_metadata

log = logging.getLogger("ugvq")

EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_scores(path) -> tuple[list[str], np.ndarray]:
    """Read ``{"items": [...], "scores": [...]}`` or a plain ``{item: score}`` mapping."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict) and "items" in data and "scores" in data:
        items, scores = [str(i) for i in data["items"]], data["scores"]
    elif isinstance(data, dict):
        items, scores = [str(k) for k in data], list(data.values())
    else:
        raise InputError(f"{path}: expected an object with 'items' and 'scores'")
    if len(items) != len(scores):
        raise LengthMismatch(f"{path}: {len(items)} items but {len(scores)} scores")
    try:
        return items, np.array(scores, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{path}: scores must be numeric") from None


def _scores_json(items, scores) -> dict:
    return {"items": list(items), "scores": [float(s) for s in scores]}


# -- commands ------------------------------------------------------------------


def cmd_synth(args, out: Path) -> list[str]:
    if args.true_scores:
        _, truth = load_scores(args.true_scores)
    else:
        truth = random_scores(args.n_items, args.seed, args.scale)
    config = SynthConfig(true_scores=tuple(truth), comparisons_per_pair=args.comparisons_per_pair,
                         pair_coverage=args.coverage, noise_model=args.noise, seed=args.seed)
    records = generate(config)
    write_comparisons_csv(records, out / "comparisons.csv")
    items = config.item_names
    _dump_json(_scores_json(items, truth), out / "truth.json")
    written = ["comparisons.csv", "truth.json"]
    if args.emit_metadata:
        meta = synthetic_metadata(items, truth, args.seed)
        write_metadata_csv(meta, out / "metadata.csv", extra_columns=("nr_score",))
        written.append("metadata.csv")
    return written


def cmd_hodge(args, out: Path) -> list[str]:
    g = read_comparisons_csv(args.comparisons)
    d = hodge_decompose(g)
    rep = hodge_report(d, g.items)
    _dump_json(_scores_json(g.items, d.scores), out / "scores.json")
    _dump_json(rep, out / "hodge_report.json")
    written = ["scores.json", "hodge_report.json"]
    if args.format == "csv" or args.edges:
        (out / "hodge_edges.csv").write_text(edges_csv(d, g.items), encoding="utf-8")
        written.append("hodge_edges.csv")
    log.info("total inconsistency %.4f over %d edges", rep["total_inconsistency"], rep["edges"])
    return written


def _parse_grid(text):
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None
    if not grid or any(not 0.0 < d < 1.0 for d in grid):
        raise InputError("grid values must lie in (0, 1)")
    return grid


def cmd_cluster(args, out: Path) -> list[str]:
    g = read_comparisons_csv(args.comparisons)
    M = adjacency_matrix(g)
    invert = not args.printed_formula
    if args.sweep:
        grid = _parse_grid(args.grid) if args.grid else list(DEFAULT_GRID)
        rows = sweep_restart(M, grid, invert=invert)
        if args.format == "json":
            _dump_json([{"delta": d, "modularity": q, "clusters": c} for d, q, c in rows], out / "sweep.json")
            return ["sweep.json"]
        _write_csv(out / "sweep.csv", ("delta", "modularity", "clusters"), rows)
        return ["sweep.csv"]
    if not 0.0 < args.delta < 1.0:
        raise InputError(f"--delta must lie in (0, 1), got {args.delta}")
    part = cluster_graph(M, args.delta, invert=invert)
    _dump_json({
        "delta": args.delta,
        "modularity": part.modularity,
        "n_clusters": part.n_clusters,
        "clusters": [[g.items[i] for i in U] for U in part.clusters],
        "assignment": {item: int(k) for item, k in zip(g.items, part.assignment)},
    }, out / "partition.json")
    return ["partition.json"]


def cmd_features(args, out: Path) -> list[str]:
    table = derive_metrics(ingest_metadata(args.metadata))
    (out / "features.csv").write_text(table.to_csv(), encoding="utf-8")
    written = ["features.csv"]
    if args.scores:
        items, scores = load_scores(args.scores)
        ranked = rank_metrics_by_srocc(table, align(table, items, scores))
        _dump_json([{"metric": m, "srocc": r} for m, r in ranked], out / "metric_ranking.json")
        written.append("metric_ranking.json")
    return written


def _hyper(args) -> dict:
    if args.model != "svr":
        return {}
    return {k: v for k, v in (("C", args.C), ("epsilon", args.epsilon), ("sigma2", args.sigma2)) if v is not None}


def cmd_fit(args, out: Path) -> list[str]:
    records = ingest_metadata(args.metadata)
    table = derive_metrics(records)
    items, scores = load_scores(args.scores)
    mos = align(table, items, scores)
    ranked = rank_metrics_by_srocc(table, mos)
    if not 1 <= args.top_k <= len(ranked):
        raise InputError(f"--top-k must lie in [1, {len(ranked)}]")
    order = [m for m, _ in ranked[: args.top_k]]
    external = None
    if args.external:
        missing = [r.item for r in records if args.external not in r.external_scores]
        if missing:
            raise InputError(f"external column {args.external!r} missing for {len(missing)} item(s)")
        external = np.array([r.external_scores[args.external] for r in records])
    hyper = _hyper(args)
    curve = incremental_feature_eval(table, mos, args.model, external=external, order=order,
                                     cv_folds=args.cv, **hyper)
    X = table.select(order)
    features = list(order)
    if external is not None:
        X = np.hstack([X, external[:, None]])
        features.append(args.external)
    model = fit_model(args.model, X, mos, **hyper)
    pred = predict(model, X)
    _dump_json({**model_to_dict(model), "features": features}, out / "model.json")
    _dump_json(_scores_json(table.items, pred), out / "predictions.json")
    if args.format == "json":
        _dump_json([{"k": k, "srocc": r} for k, r in curve], out / "curve.json")
        curve_file = "curve.json"
    else:
        _write_csv(out / "curve.csv", ("k", "srocc"), curve)
        curve_file = "curve.csv"
    log.info("in-sample SROCC with %d features: %.4f", len(features), curve[-1][1])
    return ["model.json", "predictions.json", curve_file]


def cmd_report(args, out: Path) -> list[str]:
    items, mos = load_scores(args.scores)
    lookup = dict(zip(items, mos))
    entries, abs_groups, written = [], [], []
    for path in args.predictions:
        p_items, pred = load_scores(path)
        if len(p_items) != len(items) or set(p_items) != set(items):
            raise LengthMismatch(f"{path}: items do not match {args.scores}")
        ref = np.array([lookup[i] for i in p_items])
        r = srocc(pred, ref)
        try:
            F, sig = srocc_significance(r, len(ref))
        except InputError:
            F, sig = None, True
        diff, bins, counts = rank_differences(pred, ref)
        abs_groups.append(np.abs(diff))
        name = Path(path).stem
        entry = {"predictions": str(path), "srocc": r, "F": F, "significant_at_0_05": sig,
                 "mean_abs_rank_difference": float(np.abs(diff).mean())}
        if args.format == "csv":
            fname = f"rank_diff_{len(entries)}_{name}.csv"
            _write_csv(out / fname, ("rank_diff", "count"), zip(bins.tolist(), counts.tolist()))
            entry["histogram_csv"] = fname
            written.append(fname)
        else:
            entry["histogram"] = {"rank_diff": bins.tolist(), "count": counts.tolist()}
        entries.append(entry)
    result = {"n": len(items), "results": entries}
    if len(abs_groups) >= 2:
        try:
            a = one_way_anova(abs_groups)
            result["anova"] = {"F": a.F if np.isfinite(a.F) else None, "df_between": a.df_between,
                               "df_within": a.df_within, "p_value": a.p_value,
                               "significant_at_0_01": a.significant, "groups": "absolute rank differences"}
        except InputError as exc:
            result["anova"] = {"error": str(exc)}
    _dump_json(result, out / "report.json")
    return ["report.json", *written]


def cmd_replay(args, out: Path) -> list[str]:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    code = main(manifest["argv"])
    if code:
        raise InputError(f"replayed command exited with {code}")
    return []


COMMANDS = {
    "synth": cmd_synth,
    "hodge": cmd_hodge,
    "cluster": cmd_cluster,
    "features": cmd_features,
    "fit": cmd_fit,
    "report": cmd_report,
    "replay": cmd_replay,
}

INPUT_ARGS = ("comparisons", "metadata", "scores", "predictions", "true_scores", "manifest")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out-dir", default=".", help="directory for outputs (default: cwd)")
    common.add_argument("--format", choices=("json", "csv"), default="csv",
                        help="format for tabular outputs (default csv)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ugvq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic comparison experiment")
    p.add_argument("--n-items", type=int, default=20)
    p.add_argument("--comparisons-per-pair", type=int, default=10)
    p.add_argument("--coverage", type=float, default=1.0)
    p.add_argument("--noise", choices=("bradley_terry", "coin_flip"), default="bradley_terry")
    p.add_argument("--scale", type=float, default=1.0, help="spread of the random true scores")
    p.add_argument("--true-scores", help="JSON file with explicit true scores")
    p.add_argument("--metadata", dest="emit_metadata", action="store_true",
                   help="also write a synthetic metadata.csv")

    p = sub.add_parser("hodge", parents=[common], help="HodgeRank scores and decomposition")
    p.add_argument("comparisons")
    p.add_argument("--edges", action="store_true", help="write per-edge components CSV")

    p = sub.add_parser("cluster", parents=[common], help="RWR clustering of the comparison graph")
    p.add_argument("comparisons")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--delta", type=float)
    mode.add_argument("--sweep", action="store_true")
    p.add_argument("--grid", help="comma-separated restart probabilities for --sweep")
    p.add_argument("--printed-formula", action="store_true",
                   help="use (1-d)(I - d*Mt) without the inverse (comparison only)")

    p = sub.add_parser("features", parents=[common], help="derive the 20 metadata metrics")
    p.add_argument("metadata")
    p.add_argument("--scores", help="scores JSON; adds an SROCC ranking of the metrics")

    p = sub.add_parser("fit", parents=[common], help="fit a quality predictor from metadata")
    p.add_argument("metadata")
    p.add_argument("scores")
    p.add_argument("--model", choices=("linear", "svr"), default="linear")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--external", help="extra numeric metadata column appended as a feature")
    p.add_argument("--C", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--cv", type=int, help="k-fold cross-validated curve instead of in-sample")

    p = sub.add_parser("report", parents=[common], help="SROCC, significance, rank differences, ANOVA")
    p.add_argument("predictions", nargs="+")
    p.add_argument("--scores", required=True)

    p = sub.add_parser("replay", parents=[common], help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


def _manifest(args, argv, outputs) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in INPUT_ARGS and k != "verbose"}
    inputs = []
    for key in INPUT_ARGS:
        val = getattr(args, key, None)
        for path in ([val] if isinstance(val, str) else val or []):
            inputs.append({"arg": key, "path": path, "sha256": _sha256(path)})
    return {"command": args.command, "argv": list(argv), "inputs": inputs, "parameters": params,
            "version": __version__, "seed": args.seed, "outputs": outputs}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        outputs = COMMANDS[args.command](args, out)
        if args.command != "replay":
            _dump_json(_manifest(args, argv, outputs), out / f"manifest_{args.command}.json")
    except NumericError as exc:
        print(f"ugvq {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, OSError, csv.Error, UnicodeDecodeError, KeyError) as exc:
        print(f"ugvq {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
