"""Single command-line entry point: validate, solve, probe, features,
project, footprint, select, portfolio, and report subcommands.

Results go to stdout (or to files under --out), diagnostics to stderr.
Exit codes: 0 success, 1 domain error (parse failure, infeasible/invalid
input), 2 usage error. Subcommands taking --seed fall back to the
RRLAB_SEED environment variable and are bit-reproducible per seed.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import os
import random
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, features as features_mod, robinx, selection, space
from .evaluator import evaluate
from .model import (
    InvalidInstanceError,
    MalformedTimetableError,
    StructuralError,
    validate_structure,
)
from .robinx import ParseError
from .selection import GapMatrix, TrainingPoint
from .solver import SAConfig, SolveResult, solve
from .space import MissingFeatureError, ProjectionModel


def _seed_of(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("RRLAB_SEED", "0"))


def _make_manifest(args, inputs: dict, seed: int | None = None) -> dict:
    config = {
        "subcommand": args.command,
        "inputs": inputs,
        "seed": seed,
        "tool_version": __version__,
    }
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()[:16]
    return {
        **config,
        "config_hash": digest,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _write_manifest_for(path: Path, manifest: dict) -> None:
    sidecar = path.with_name(path.name + ".manifest.json")
    sidecar.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_instance(path: str):
    return robinx.parse_instance(_read(path))


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    tt = robinx.parse_solution(_read(args.solution), inst)
    violations = validate_structure(tt, inst)
    structural = [v for v in violations if not v.startswith("phased:")]
    if structural:
        if args.json:
            _print_json({"structurally_valid": False, "violations": violations})
        else:
            print("structurally invalid timetable:")
            for v in violations:
                print(f"  - {v}")
        return 1
    report = evaluate(tt, inst)
    if args.json:
        _print_json({"structurally_valid": True, **report.to_dict()})
    else:
        print(f"instance:          {inst.id}")
        print(f"feasible:          {report.feasible}")
        print(f"hard violation:    {report.hard_violation}")
        print(f"phased violations: {report.phased_violations}")
        print(f"objective:         {report.objective}")
        nonzero = [(i, d) for i, d in report.per_constraint if d > 0]
        if nonzero:
            print("violated constraints (index, deviation):")
            for i, d in nonzero:
                c = inst.constraints[i]
                print(f"  - #{i} {c.ctype} {c.hardness.value}: {d}")
    return 0 if report.feasible else 1


# ------------------------------------------------------------------- solve

def _parse_budget(raw: str) -> tuple[int, int, int]:
    parts = [int(x) for x in raw.split(",")]
    if len(parts) != 3:
        raise ValueError("budget must be three comma-separated integers")
    return tuple(parts)  # type: ignore[return-value]


def _solve_one(path: str, budget: tuple[int, int, int], seed: int, trace: bool):
    inst = _load_instance(path)
    cfg = SAConfig(stage_evaluations=budget, seed=seed)
    return inst, solve(inst, cfg, keep_trace=trace)


def _write_trace(path: Path, result: SolveResult) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["evaluations", "hard", "soft"])
        for row in result.trace or ():
            writer.writerow(row)


def _solve_summary(inst, result: SolveResult) -> dict:
    return {
        "instance": inst.id,
        "feasible": result.best_report.feasible,
        "hard_violation": result.best_report.hard_violation,
        "objective": result.best_report.objective,
        "evaluations_used": list(result.evaluations_used),
        "wall_time_seconds": result.wall_time,
    }


def cmd_solve(args) -> int:
    seed = _seed_of(args)
    budget = _parse_budget(args.budget)
    paths = args.instance
    manifest = _make_manifest(args, {"instances": paths, "budget": list(budget)}, seed)

    out_dir: Path | None = None
    if len(paths) > 1:
        if not args.out:
            raise ValueError("multiple instances need --out DIRECTORY")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_solve_one, p, budget, seed, args.trace is not None)
                for p in paths
            ]
            outcomes = [f.result() for f in futures]  # input order
    else:
        outcomes = [_solve_one(p, budget, seed, args.trace is not None) for p in paths]

    summaries = []
    for path, (inst, result) in zip(paths, outcomes):
        xml_text = robinx.write_solution(result.best_timetable, inst)
        if out_dir is not None:
            target = out_dir / f"{inst.id}.xml"
            target.write_text(xml_text, encoding="utf-8")
            _write_manifest_for(target, manifest)
            if args.trace:
                _write_trace(out_dir / f"{inst.id}_trace.csv", result)
        elif args.out:
            target = Path(args.out)
            target.write_text(xml_text, encoding="utf-8")
            _write_manifest_for(target, manifest)
            if args.trace:
                _write_trace(Path(args.trace), result)
        else:
            print(xml_text, end="")
        summaries.append(_solve_summary(inst, result))

    stream = sys.stderr if not args.out and out_dir is None else sys.stdout
    if args.json:
        print(json.dumps(summaries if len(summaries) > 1 else summaries[0], indent=2),
              file=stream)
    else:
        for s in summaries:
            print(
                f"{s['instance']}: feasible={s['feasible']} "
                f"objective={s['objective']} hard={s['hard_violation']} "
                f"evals={s['evaluations_used']} wall={s['wall_time_seconds']:.2f}s",
                file=stream,
            )
    return 0


# --------------------------------------------------------- features / probe

def _features_out(args, fv: dict, manifest: dict) -> None:
    ordered = {name: fv[name] for name in sorted(fv)}
    if args.out:
        target = Path(args.out)
        target.write_text(json.dumps(ordered, indent=2) + "\n", encoding="utf-8")
        _write_manifest_for(target, manifest)
    else:
        _print_json(ordered)


def cmd_features(args) -> int:
    seed = _seed_of(args)
    inst = _load_instance(args.instance)
    fv = features_mod.extract(
        inst, seed=seed, with_probe=args.probe, time_in_evaluations=args.time_evals
    )
    manifest = _make_manifest(args, {"instance": args.instance, "probe": args.probe}, seed)
    _features_out(args, fv, manifest)
    return 0


def _probe_one(path: str, seed: int, time_evals: bool) -> dict:
    inst = _load_instance(path)
    return features_mod.probe(inst, seed=seed, time_in_evaluations=time_evals)


def cmd_probe(args) -> int:
    seed = _seed_of(args)
    paths = args.instance
    manifest = _make_manifest(args, {"instances": paths}, seed)
    if args.jobs > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_probe_one, p, seed, args.time_evals) for p in paths]
            results = [f.result() for f in futures]
    else:
        results = [_probe_one(p, seed, args.time_evals) for p in paths]
    if len(paths) == 1:
        _features_out(args, results[0], manifest)
    else:
        rows = [(Path(p).stem, fv) for p, fv in zip(paths, results)]
        text = robinx.write_feature_rows(rows)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            _write_manifest_for(Path(args.out), manifest)
        else:
            print(text, end="")
    return 0


# ----------------------------------------------------------------- project

def _load_model(spec: str) -> ProjectionModel:
    if spec in space.BUNDLED_MODELS:
        return space.get_model(spec)
    return ProjectionModel.from_json(_read(spec))


def cmd_project(args) -> int:
    fv = json.loads(_read(args.features))
    model = _load_model(args.model)
    if model.stats is None:
        print(
            f"note: model {model.name!r} carries no normalization statistics; "
            "treating feature values as already normalized",
            file=sys.stderr,
        )
    z1, z2 = space.project(fv, model)
    if args.json:
        _print_json({"model": model.name, "z1": z1, "z2": z2})
    else:
        print(f"{z1},{z2}")
    return 0


# ------------------------------------------------- coordinate resolution

def _resolve_coordinates(
    feature_rows: list[tuple[str, dict[str, float]]],
    model_spec: str,
    fit_ids: set[str] | None = None,
) -> dict[str, tuple[float, float]]:
    """Coordinates per instance: direct z1/z2 columns, or a projection
    model (normalization statistics fitted on ``fit_ids`` when the model
    ships without them)."""
    rows = dict(feature_rows)
    if all("z1" in fv and "z2" in fv for fv in rows.values()):
        return {i: (fv["z1"], fv["z2"]) for i, fv in rows.items()}
    model = _load_model(model_spec)
    if model.stats is None:
        ids = sorted(fit_ids) if fit_ids else sorted(rows)
        stats = space.fit_normalization(
            [rows[i] for i in ids], model.feature_names
        )
        model = model.with_stats(stats)
        print(
            f"note: fitted normalization statistics for model {model.name!r} "
            f"on {len(ids)} instances",
            file=sys.stderr,
        )
    return {i: space.project(fv, model) for i, fv in rows.items()}


def _footprint_points(
    gaps: GapMatrix,
    coords: dict[str, tuple[float, float]],
    algorithm: str,
    label: str,
    only: set[str] | None = None,
) -> list[tuple[float, float, bool]]:
    labels = gaps.good if label == "good" else gaps.best
    points = []
    for inst_id in gaps.instances:
        if inst_id not in coords or (only is not None and inst_id not in only):
            continue
        z1, z2 = coords[inst_id]
        points.append((z1, z2, (inst_id, algorithm) in labels))
    return points


# --------------------------------------------------------------- footprint

def cmd_footprint(args) -> int:
    table = robinx.parse_metadata(_read(args.metadata))
    gaps = selection.compute_gaps(table.rows)
    if args.algorithm not in gaps.algorithms:
        raise ValueError(f"algorithm {args.algorithm!r} not present in metadata")
    feature_rows = robinx.parse_feature_rows(_read(args.features))
    coords = _resolve_coordinates(feature_rows, args.model)
    points = _footprint_points(gaps, coords, args.algorithm, args.label)
    if not points:
        raise ValueError("no instances with both metadata and features")
    fp = space.footprint(points, grid_cells=args.grid, purity_threshold=args.purity)
    payload = {
        "algorithm": args.algorithm,
        "label": args.label,
        "grid": args.grid,
        "purity_threshold": args.purity,
        "area": fp.area,
        "density": fp.density,
        "purity": fp.purity,
        "footprint_cells": len(fp.footprint_cells),
        "occupied_cells": len(fp.cells),
    }
    if args.json:
        _print_json(payload)
    else:
        print(
            f"{args.algorithm} ({args.label}): area={fp.area:.3f} "
            f"density={fp.density:.3f} purity={fp.purity:.3f}"
        )
    return 0


# ----------------------------------------------------------------- select

def _training_points(
    gaps: GapMatrix, coords: dict[str, tuple[float, float]], ids: list[str]
) -> list[TrainingPoint]:
    points = []
    for inst_id in ids:
        z1, z2 = coords[inst_id]
        points.append(
            TrainingPoint(
                z1=z1,
                z2=z2,
                good={a: (inst_id, a) in gaps.good for a in gaps.algorithms},
                gap={a: gaps.gap(inst_id, a) for a in gaps.algorithms},
            )
        )
    return points


def _selection_payload(result: selection.SelectorEvaluation) -> dict:
    def metrics(m: selection.SelectorMetrics) -> dict:
        return {
            "feasible_pct": m.feasible_pct,
            "best_pct": m.best_pct,
            "good_pct": m.good_pct,
            "mean_gap_pct": 100.0 * m.mean_gap,
        }

    return {
        "selector": metrics(result.selector),
        "single_best": {"algorithm": result.single_best_name, **metrics(result.single_best)},
        "oracle": metrics(result.oracle),
    }


def _print_selection_table(payload: dict) -> None:
    rows = [
        ("Percentage feas.", "feasible_pct", "%.1f%%"),
        ("Percentage best", "best_pct", "%.0f%%"),
        ("Percentage good", "good_pct", "%.0f%%"),
        ("Relative gap", "mean_gap_pct", "%.2f%%"),
    ]
    single = payload["single_best"]
    header = (
        f"{'':<18}{'Selector':>12}"
        f"{'Single Best (' + single['algorithm'] + ')':>24}{'Oracle':>10}"
    )
    print(header)
    for label, key, fmt in rows:
        print(
            f"{label:<18}{fmt % payload['selector'][key]:>12}"
            f"{fmt % single[key]:>24}{fmt % payload['oracle'][key]:>10}"
        )


def cmd_select(args) -> int:
    train_table = robinx.parse_metadata(_read(args.train))
    test_table = robinx.parse_metadata(_read(args.test))
    gaps = selection.compute_gaps(train_table.rows + test_table.rows)
    feature_rows = robinx.parse_feature_rows(_read(args.features))
    train_ids = list(dict.fromkeys(r.instance_id for r in train_table.rows))
    test_ids = list(dict.fromkeys(r.instance_id for r in test_table.rows))
    coords = _resolve_coordinates(feature_rows, args.model, fit_ids=set(train_ids))
    missing = [i for i in train_ids + test_ids if i not in coords]
    if missing:
        raise ValueError(f"instances missing from features CSV: {missing[:5]}")

    selector = selection.train_selector(_training_points(gaps, coords, train_ids), k=args.k)
    result = selection.evaluate_selector(
        selector, [(i, coords[i]) for i in test_ids], gaps
    )
    payload = _selection_payload(result)
    if args.json:
        _print_json(payload)
    else:
        _print_selection_table(payload)
    return 0


# -------------------------------------------------------------- portfolio

def _portfolio_payload(gaps: GapMatrix) -> dict:
    scores = selection.contribution_scores(gaps)
    total_shapley = sum(s.shapley for s in scores.values())
    oracle_gap = selection.portfolio_gap(gaps.algorithms, gaps)
    return {
        "algorithms": list(gaps.algorithms),
        "instances": len(gaps.instances),
        "oracle_gap_pct": 100.0 * oracle_gap,
        "scores": {
            name: {
                "standalone_pct": 100.0 * s.standalone,
                "marginal_pct": 100.0 * s.marginal,
                "shapley_pct": 100.0 * s.shapley / total_shapley if total_shapley else 0.0,
                "shapley_raw": s.shapley,
            }
            for name, s in scores.items()
        },
    }


def _print_portfolio_table(payload: dict) -> None:
    names = payload["algorithms"]
    width = max(len(n) for n in names) + 2
    print(f"{'':<12}" + "".join(f"{n:>{width}}" for n in names))
    for row, key in (
        ("Standalone", "standalone_pct"),
        ("Marginal", "marginal_pct"),
        ("Shapley", "shapley_pct"),
    ):
        cells = "".join(
            f"{payload['scores'][n][key]:>{width}.2f}" for n in names
        )
        print(f"{row:<12}" + cells)


def cmd_portfolio(args) -> int:
    table = robinx.parse_metadata(_read(args.metadata))
    gaps = selection.compute_gaps(table.rows)
    payload = _portfolio_payload(gaps)
    if args.json:
        _print_json(payload)
    else:
        _print_portfolio_table(payload)
        print(f"(percentages; Shapley normalized to sum 100; "
              f"oracle gap {payload['oracle_gap_pct']:.2f}%)")
    return 0


# ------------------------------------------------------------------ report

def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_report(args) -> int:
    from . import plots

    seed = _seed_of(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)

    table = robinx.parse_metadata(_read(args.metadata))
    gaps = selection.compute_gaps(table.rows)
    n_inst = len(gaps.instances)
    summary: dict = {
        "instances": n_inst,
        "algorithms": list(gaps.algorithms),
    }

    # per-algorithm performance metrics
    per_alg = {}
    for a in gaps.algorithms:
        feas = sum(1 for i in gaps.instances if (i, a) in gaps.feasible)
        good = sum(1 for i in gaps.instances if (i, a) in gaps.good)
        best = sum(1 for i in gaps.instances if (i, a) in gaps.best)
        per_alg[a] = {
            "feasible_pct": 100.0 * feas / n_inst,
            "good_pct": 100.0 * good / n_inst,
            "best_pct": 100.0 * best / n_inst,
            "mean_gap_pct": 100.0 * selection.portfolio_gap((a,), gaps),
        }
    summary["per_algorithm"] = per_alg
    _write_csv(
        out_dir / "algorithms.csv",
        ["algorithm", "feasible_pct", "good_pct", "best_pct", "mean_gap_pct"],
        [
            [a] + [round(per_alg[a][k], 2) for k in ("feasible_pct", "good_pct", "best_pct", "mean_gap_pct")]
            for a in gaps.algorithms
        ],
    )

    # contribution analysis
    portfolio_payload = _portfolio_payload(gaps)
    summary["portfolio"] = portfolio_payload
    _write_csv(
        out_dir / "table5.csv",
        ["algorithm", "standalone_pct", "marginal_pct", "shapley_pct"],
        [
            [
                a,
                round(portfolio_payload["scores"][a]["standalone_pct"], 2),
                round(portfolio_payload["scores"][a]["marginal_pct"], 2),
                round(portfolio_payload["scores"][a]["shapley_pct"], 2),
            ]
            for a in gaps.algorithms
        ],
    )

    plots.save_feasibility_bars(
        {a: per_alg[a]["feasible_pct"] for a in gaps.algorithms},
        str(fig_dir / "feasible_bars.png"),
    )
    plots.save_gap_bars(
        {a: per_alg[a]["mean_gap_pct"] / 100.0 for a in gaps.algorithms},
        str(fig_dir / "gap_bars.png"),
    )
    runtimes = {a: [] for a in gaps.algorithms}
    for r in table.rows:
        if r.feasible:
            runtimes[r.algorithm].append(r.normalized_cpu_minutes)
    plots.save_runtime_box(runtimes, str(fig_dir / "cpu_box.png"))

    # coordinate-dependent analyses
    if args.features:
        feature_rows = robinx.parse_feature_rows(_read(args.features))
        ids = [i for i in gaps.instances if i in dict(feature_rows)]
        rng = random.Random(seed)
        shuffled = ids[:]
        rng.shuffle(shuffled)
        n_train = max(1, int(round(args.train_frac * len(shuffled))))
        train_ids = sorted(shuffled[:n_train])
        test_ids = sorted(shuffled[n_train:])
        coords = _resolve_coordinates(feature_rows, args.model, fit_ids=set(train_ids))

        # plot-ready points table: coordinates plus labels
        point_rows = []
        scatter: dict[str, list[tuple[float, float]]] = {}
        for i in ids:
            z1, z2 = coords[i]
            best_algs = [a for a in gaps.algorithms if (i, a) in gaps.best]
            label = best_algs[0] if best_algs else "unsolved"
            n_good = sum(1 for a in gaps.algorithms if (i, a) in gaps.good)
            point_rows.append([i, z1, z2, label, n_good])
            scatter.setdefault(label, []).append((z1, z2))
        _write_csv(
            out_dir / "points.csv",
            ["instance", "z1", "z2", "best_algorithm", "n_good_algorithms"],
            point_rows,
        )
        plots.save_points_scatter(
            scatter, str(fig_dir / "points_scatter.png"), "best algorithm per instance"
        )

        # footprints per algorithm (training instances only)
        fp_rows = []
        summary_fp = {}
        train_id_set = set(train_ids)
        for a in gaps.algorithms:
            entry = {}
            for label in ("good", "best"):
                pts = _footprint_points(gaps, coords, a, label)
                train_pts = _footprint_points(gaps, coords, a, label, only=train_id_set)
                fp = space.footprint(
                    train_pts or pts, grid_cells=args.grid, purity_threshold=args.purity
                )
                entry[label] = {
                    "area": fp.area,
                    "density": fp.density,
                    "purity": fp.purity,
                }
                if label == "good":
                    plots.save_footprint_map(
                        fp,
                        train_pts or pts,
                        str(fig_dir / f"footprint_{a}.png"),
                        f"{a}: good-performance footprint",
                    )
            summary_fp[a] = entry
            fp_rows.append(
                [a]
                + [round(entry["good"][k], 3) for k in ("area", "density", "purity")]
                + [round(entry["best"][k], 3) for k in ("area", "density", "purity")]
            )
        summary["footprints"] = summary_fp
        _write_csv(
            out_dir / "footprints.csv",
            [
                "algorithm",
                "good_area",
                "good_density",
                "good_purity",
                "best_area",
                "best_density",
                "best_purity",
            ],
            fp_rows,
        )

        # recommendation evaluation on the held-out split
        if test_ids and len(train_ids) >= args.k:
            selector = selection.train_selector(
                _training_points(gaps, coords, train_ids), k=args.k
            )
            result = selection.evaluate_selector(
                selector, [(i, coords[i]) for i in test_ids], gaps
            )
            sel_payload = _selection_payload(result)
            summary["selection"] = sel_payload
            _write_csv(
                out_dir / "table6.csv",
                ["system", "feasible_pct", "best_pct", "good_pct", "mean_gap_pct"],
                [
                    [
                        name,
                        round(m["feasible_pct"], 2),
                        round(m["best_pct"], 2),
                        round(m["good_pct"], 2),
                        round(m["mean_gap_pct"], 2),
                    ]
                    for name, m in (
                        ("selector", sel_payload["selector"]),
                        (
                            f"single_best({sel_payload['single_best']['algorithm']})",
                            sel_payload["single_best"],
                        ),
                        ("oracle", sel_payload["oracle"]),
                    )
                ],
            )

    manifest = _make_manifest(
        args,
        {"metadata": args.metadata, "features": args.features, "train_frac": args.train_frac},
        seed,
    )
    summary["manifest"] = manifest
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    if not args.json:
        print(f"report written to {out_dir}")
    else:
        _print_json(summary)
    return 0


# ------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrlab",
        description="Round-robin timetabling lab: evaluation, solving, "
        "features, instance space, and algorithm selection.",
    )
    parser.add_argument("--version", action="version", version=f"rrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="evaluate a solution against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="run the three-stage annealer")
    p.add_argument("--instance", action="append", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", default="10000,10000,1000",
                   help="evaluations per stage, e.g. 10000,10000,1000")
    p.add_argument("--out", help="solution file (or directory for several instances)")
    p.add_argument("--trace", nargs="?", const="trace.csv", default=None,
                   help="write incumbent trace CSV")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe", help="probing features from a budgeted solver run")
    p.add_argument("--instance", action="append", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--time-evals", action="store_true",
                   help="report stage-1/2 effort in evaluations instead of seconds")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("features", help="extract features for one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--probe", action="store_true", help="include probing features")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--time-evals", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("project", help="project a feature vector to (z1, z2)")
    p.add_argument("--features", required=True, help="JSON feature vector")
    p.add_argument("--model", default="problem-type",
                   help="problem-type | instance | path to model JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("footprint", help="footprint metrics for one algorithm")
    p.add_argument("--metadata", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--algorithm", required=True)
    p.add_argument("--model", default="problem-type")
    p.add_argument("--label", choices=("good", "best"), default="good")
    p.add_argument("--grid", type=int, default=30)
    p.add_argument("--purity", type=float, default=0.55)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_footprint)

    p = sub.add_parser("select", help="train and evaluate the recommender")
    p.add_argument("--train", required=True, help="training metadata CSV")
    p.add_argument("--test", required=True, help="test metadata CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", default="problem-type")
    p.add_argument("--k", type=int, default=11)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("portfolio", help="standalone/marginal/Shapley scores")
    p.add_argument("--metadata", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("report", help="full analysis report with figures")
    p.add_argument("--metadata", required=True)
    p.add_argument("--features")
    p.add_argument("--model", default="problem-type")
    p.add_argument("--out", required=True)
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid", type=int, default=30)
    p.add_argument("--purity", type=float, default=0.55)
    p.add_argument("--k", type=int, default=11)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ParseError,
        InvalidInstanceError,
        MalformedTimetableError,
        StructuralError,
        MissingFeatureError,
        ValueError,
        KeyError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
