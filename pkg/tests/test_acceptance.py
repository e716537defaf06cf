"""Acceptance suite: every criterion prints one PASS line when it holds.

Criteria 7 and 8 replicate published analysis numbers and need the
published per-instance results; point RRLAB_PAPER_METADATA at a directory
holding metadata.csv / metadata_test.csv / features.csv (see README) to
run them. Without it they are skipped with a visible notice.
"""
import math
import os
import random
import time
from pathlib import Path

import pytest

from rrlab import robinx, selection, space
from rrlab.evaluator import Evaluator, HomeAwayTables, apply_edits, evaluate
from rrlab.model import Instance, phased_violation_count, validate_structure
from rrlab.selection import TrainingPoint
from rrlab.solver import (
    ALL_MOVE_KINDS,
    MoveError,
    SAConfig,
    canonical_schedule,
    neighbours,
    solve,
)

from helpers import rand_constraint, rand_instance, rand_timetable
from naive_eval import naive_report
from test_space import EQ1_EXPECTED, EQ2_EXPECTED


def passline(number: int, message: str) -> None:
    print(f"\nACCEPTANCE {number}: PASS - {message}")


def paper_data_dir() -> Path | None:
    root = os.environ.get("RRLAB_PAPER_METADATA")
    if root and (Path(root) / "metadata.csv").exists():
        return Path(root)
    return None


def test_criterion_1_projection_golden():
    start = time.perf_counter()
    for model, expected in (
        (space.PROBLEM_TYPE_MODEL, EQ1_EXPECTED),
        (space.INSTANCE_MODEL, EQ2_EXPECTED),
    ):
        assert model.feature_names == tuple(expected)
        for i, name in enumerate(model.feature_names):
            assert model.weights[0][i] == expected[name][0]
            assert model.weights[1][i] == expected[name][1]
            unit = {other: 0.0 for other in model.feature_names}
            unit[name] = 1.0
            assert space.project(unit, model) == expected[name]
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    passline(1, f"48 projection entries and unit projections exact ({elapsed:.2f}s)")


def test_criterion_2_evaluator_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(20260810)
    for _ in range(1000):
        inst = rand_instance(rng)  # n in {4,6,8}, 0..15 constraints, all types
        tt = rand_timetable(rng, inst.n_teams)
        report = evaluate(tt, inst)
        expected = naive_report(inst, tt)
        assert report.hard_violation == expected["hard_violation"]
        assert report.objective == expected["objective"]
        assert report.per_constraint == expected["per_constraint"]
        assert report.per_type_hard == expected["per_type_hard"]
        assert report.feasible == expected["feasible"]
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    passline(2, f"1000 random evaluations equal the naive recount ({elapsed:.1f}s)")


def test_criterion_3_incremental_delta_exactness():
    start = time.perf_counter()
    rng = random.Random(77)
    total = 0
    kinds_seen = set()
    while total < 10000:
        inst = rand_instance(rng)
        tt = rand_timetable(rng, inst.n_teams)
        aux = HomeAwayTables.build(tt, inst)
        engine = Evaluator(inst)
        before = evaluate(tt, inst)
        for _ in range(100):
            if total >= 10000:
                break
            kind = rng.choice(ALL_MOVE_KINDS)
            try:
                move = neighbours(kind, tt, rng, aux)
            except MoveError:
                continue
            d_hard, d_obj, d_phase = engine.delta(tt, aux, move)
            apply_edits(tt, aux, move.removed, move.added)
            assert validate_structure(tt, inst) == [] or inst.phased
            structural = [
                v for v in validate_structure(tt, inst) if not v.startswith("phased:")
            ]
            assert structural == []
            after = evaluate(tt, inst)
            assert after.hard_violation - before.hard_violation == d_hard
            assert after.objective - before.objective == d_obj
            assert after.phased_violations - before.phased_violations == d_phase
            before = after
            kinds_seen.add(move.kind)
            total += 1
    assert kinds_seen == set(ALL_MOVE_KINDS)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    passline(3, f"10000 move deltas exact across all six kinds ({elapsed:.1f}s)")


def test_criterion_4_canonical_schedule():
    start = time.perf_counter()
    for n in range(2, 22, 2):
        tt = canonical_schedule(n)
        inst = Instance(id=f"c{n}", n_teams=n, phased=True)
        assert validate_structure(tt, inst) == []
        assert phased_violation_count(tt, inst) == 0
        venue = {}
        for (h, a), s in tt.slot_of.items():
            venue[(h, s)] = "H"
            venue[(a, s)] = "A"

        def breaks(slots):
            return sum(
                1
                for t in range(n)
                for s in slots
                if venue[(t, s)] == venue[(t, s - 1)]
            )

        assert breaks(range(1, n - 1)) == n - 2
        assert breaks(range(n, 2 * n - 2)) == n - 2
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    passline(4, f"canonical schedules valid, phased, n-2 breaks per half ({elapsed:.2f}s)")


def test_criterion_5_solver_sanity():
    start = time.perf_counter()
    # unconstrained instances: feasible at zero objective within stage 1
    for n in range(2, 22, 2):
        inst = Instance(id=f"u{n}", n_teams=n, phased=True)
        result = solve(inst, SAConfig(stage_evaluations=(1000, 0, 0), seed=n))
        assert result.best_report.feasible
        assert result.best_report.objective == 0

    # 20 lightly constrained instances: never worse than the canonical start
    rng = random.Random(5150)
    improved = 0
    for k in range(20):
        n = rng.choice((6, 8, 10))
        constraints = []
        for _ in range(rng.randint(1, 5)):
            c = rand_constraint(rng, n, 2 * n - 2)
            if c.hardness.value == "HARD":
                c = type(c)(hardness=selection_soft(), penalty=rng.randint(1, 10), params=c.params)
            constraints.append(c)
        inst = Instance(
            id=f"light{k}", n_teams=n, phased=False, constraints=tuple(constraints)
        )
        start_obj = evaluate(canonical_schedule(n), inst).objective
        result = solve(inst, SAConfig(stage_evaluations=(500, 1500, 800), seed=k))
        assert result.best_report.feasible
        assert result.best_report.objective <= start_obj
        improved += 1
    assert improved == 20

    # fixed seed: bit-identical result twice
    inst = Instance(
        id="det",
        n_teams=8,
        phased=True,
        constraints=tuple(
            soft_only(rand_constraint(random.Random(99), 8, 14), random.Random(99))
            for _ in range(3)
        ),
    )
    cfg = SAConfig(stage_evaluations=(500, 500, 200), seed=4242)
    r1 = solve(inst, cfg, keep_trace=True)
    r2 = solve(inst, cfg, keep_trace=True)
    assert r1.best_timetable.slot_of == r2.best_timetable.slot_of
    assert r1.best_report == r2.best_report
    assert r1.evaluations_used == r2.evaluations_used
    assert r1.trace == r2.trace

    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    passline(5, f"solver sane on 10 + 20 instances, seed-reproducible ({elapsed:.1f}s)")


def selection_soft():
    from rrlab.model import Hardness

    return Hardness.SOFT


def soft_only(constraint, rng):
    from rrlab.model import Constraint, Hardness

    if constraint.hardness is Hardness.SOFT:
        return constraint
    return Constraint(Hardness.SOFT, rng.randint(1, 10), constraint.params)


def test_criterion_6_shapley_axioms():
    start = time.perf_counter()
    rng = random.Random(606)
    for m in (2, 4, 6, 8):
        rows = {}
        for k in range(50):
            rows[f"i{k}"] = {f"a{j}": round(rng.random(), 3) for j in range(m)}
        # duplicate column for symmetry, constant-1 column for the dummy axiom
        for row in rows.values():
            row["a0_clone"] = row["a0"]
            row["dummy"] = 1.0
        gaps = _gap_matrix(rows)
        scores = selection.contribution_scores(gaps)
        total = sum(s.shapley for s in scores.values())
        expected = 1.0 - selection.portfolio_gap(gaps.algorithms, gaps)
        assert math.isclose(total, expected, abs_tol=1e-9)
        assert math.isclose(scores["a0"].shapley, scores["a0_clone"].shapley, abs_tol=1e-12)
        assert math.isclose(scores["a0"].marginal, 0.0, abs_tol=1e-12)
        assert math.isclose(scores["a0_clone"].marginal, 0.0, abs_tol=1e-12)
        assert math.isclose(scores["dummy"].shapley, 0.0, abs_tol=1e-12)
        assert math.isclose(scores["dummy"].marginal, 0.0, abs_tol=1e-12)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    passline(6, f"Shapley efficiency/symmetry/dummy/clone hold ({elapsed:.1f}s)")


def _gap_matrix(rows):
    instances = tuple(rows)
    algorithms = tuple(sorted({a for r in rows.values() for a in r}))
    gaps = {(i, a): g for i, r in rows.items() for a, g in r.items()}
    good = frozenset(k for k, g in gaps.items() if g <= 0.05)
    best = frozenset(
        (i, a) for i, r in rows.items() for a, g in r.items() if g == min(r.values())
    )
    feasible = frozenset(k for k, g in gaps.items() if g < 1.0)
    return selection.GapMatrix(
        instances=instances,
        algorithms=algorithms,
        gaps=gaps,
        good=good,
        best=best,
        feasible=feasible,
        best_objective={i: 0 for i in rows},
    )


TABLE5_STANDALONE = {
    "DES": 58.81,
    "DITUoIArta": 49.40,
    "UoS": 35.94,
    "Goal": 35.81,
    "FBHS": 38.15,
    "Udine": 12.83,
    "Reprobate": 73.34,
    "MODAL": 74.06,
}
TABLE5_SHAPLEY = {
    "DES": 6.28,
    "DITUoIArta": 8.59,
    "UoS": 13.63,
    "Goal": 13.58,
    "FBHS": 21.16,
    "Udine": 29.38,
    "Reprobate": 3.78,
    "MODAL": 3.6,
}
TABLE6_SINGLE_BEST = {"mean_gap_pct": 12.8, "best_pct": 39.0, "good_pct": 53.0, "feasible_pct": 100.0}


def test_criterion_7_paper_metadata_replication():
    data = paper_data_dir()
    if data is None:
        notice = (
            "criterion 7 skipped: published per-instance results not available "
            "(set RRLAB_PAPER_METADATA, see README)"
        )
        print(f"\nACCEPTANCE 7: SKIP - {notice}")
        pytest.skip(notice)
    start = time.perf_counter()
    table = robinx.parse_metadata((data / "metadata.csv").read_text(encoding="utf-8"))
    gaps = selection.compute_gaps(table.rows)
    scores = selection.contribution_scores(gaps)
    total = sum(s.shapley for s in scores.values())
    shapley_pct = {a: 100.0 * s.shapley / total for a, s in scores.items()}
    assert math.isclose(100.0 * sum(s.shapley for s in scores.values()) / total, 100.0, abs_tol=0.01)
    for alg, expected in TABLE5_STANDALONE.items():
        assert abs(100.0 * scores[alg].standalone - expected) <= 0.05, alg
    for alg, expected in TABLE5_SHAPLEY.items():
        assert abs(shapley_pct[alg] - expected) <= 0.5, alg

    test_table = robinx.parse_metadata(
        (data / "metadata_test.csv").read_text(encoding="utf-8")
    )
    test_gaps = selection.compute_gaps(test_table.rows)
    single = min(
        test_gaps.algorithms,
        key=lambda a: selection.portfolio_gap((a,), test_gaps),
    )
    n = len(test_gaps.instances)
    feas = 100.0 * sum(1 for i in test_gaps.instances if (i, single) in test_gaps.feasible) / n
    best = 100.0 * sum(1 for i in test_gaps.instances if (i, single) in test_gaps.best) / n
    good = 100.0 * sum(1 for i in test_gaps.instances if (i, single) in test_gaps.good) / n
    gap = 100.0 * selection.portfolio_gap((single,), test_gaps)
    assert abs(gap - TABLE6_SINGLE_BEST["mean_gap_pct"]) <= 0.5
    assert abs(best - TABLE6_SINGLE_BEST["best_pct"]) <= 0.5
    assert abs(good - TABLE6_SINGLE_BEST["good_pct"]) <= 0.5
    assert abs(feas - TABLE6_SINGLE_BEST["feasible_pct"]) <= 0.5
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    passline(7, f"published contribution and single-best rows replicated ({elapsed:.1f}s)")


def test_criterion_8_footprint_qualitative():
    data = paper_data_dir()
    if data is None or not (data / "features.csv").exists():
        notice = (
            "criterion 8 skipped: published per-instance results/features not "
            "available (set RRLAB_PAPER_METADATA, see README)"
        )
        print(f"\nACCEPTANCE 8: SKIP - {notice}")
        pytest.skip(notice)
    table = robinx.parse_metadata((data / "metadata.csv").read_text(encoding="utf-8"))
    gaps = selection.compute_gaps(table.rows)
    feature_rows = dict(
        robinx.parse_feature_rows((data / "features.csv").read_text(encoding="utf-8"))
    )
    assert all("z1" in fv and "z2" in fv for fv in feature_rows.values()), (
        "features.csv must carry z1/z2 coordinates for the footprint check"
    )
    coords = {i: (fv["z1"], fv["z2"]) for i, fv in feature_rows.items()}
    areas = {}
    for alg in gaps.algorithms:
        points = [
            (*coords[i], (i, alg) in gaps.good)
            for i in gaps.instances
            if i in coords
        ]
        areas[alg] = space.footprint(points).area  # default 30x30 grid, 0.55 purity
    ranked = sorted(areas, key=areas.get, reverse=True)
    assert ranked[0] == "Udine"
    assert ranked[1] == "FBHS"
    assert areas["MODAL"] == 0.0
    passline(8, "good-footprint areas rank Udine first, FBHS second, MODAL empty")


def test_criterion_9_selector_sanity():
    start = time.perf_counter()
    rng = random.Random(909)
    points = []
    truth = []
    for k in range(200):
        in_a = k % 2 == 0
        cx = -2.0 if in_a else 2.0
        z = (cx + rng.gauss(0, 0.4), rng.gauss(0, 0.4))
        gap_a, gap_b = (0.0, 0.5) if in_a else (0.5, 0.0)
        points.append(
            TrainingPoint(
                z1=z[0],
                z2=z[1],
                good={"A": gap_a <= 0.05, "B": gap_b <= 0.05},
                gap={"A": gap_a, "B": gap_b},
            )
        )
        truth.append("A" if in_a else "B")
    train, test = points[:150], points[150:]
    selector = selection.train_selector(train, k=11)

    rows = {}
    queries = []
    for idx, p in enumerate(test):
        rows[f"t{idx}"] = dict(p.gap)
        queries.append((f"t{idx}", (p.z1, p.z2)))
    gaps = _gap_matrix(rows)
    result = selection.evaluate_selector(selector, queries, gaps)
    assert result.selector.mean_gap <= result.single_best.mean_gap

    correct = sum(
        1
        for p, want in zip(test, truth[150:])
        if selection.recommend(selector, (p.z1, p.z2))[0] == want
    )
    accuracy = correct / len(test)
    assert accuracy >= 0.95
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    passline(
        9,
        f"held-out selector gap <= single best; accuracy {accuracy:.0%} ({elapsed:.1f}s)",
    )


def test_criterion_10_io_round_trip():
    start = time.perf_counter()
    rng = random.Random(1010)
    for _ in range(500):
        inst = rand_instance(rng)
        assert robinx.parse_instance(robinx.write_instance(inst)) == inst
        tt = rand_timetable(rng, inst.n_teams)
        assert (
            robinx.parse_solution(robinx.write_solution(tt, inst), inst).slot_of
            == tt.slot_of
        )
    # metadata round-trip
    lines = ["instance,algorithm,objective,feasible,wall_minutes,cpu_minutes"]
    for k in range(100):
        alg = rng.choice(("Udine", "FBHS", "MODAL", "DES"))
        if rng.random() < 0.2:
            lines.append(f"i{k},{alg},-,infeasible,{rng.randrange(1, 999)},{rng.randrange(1, 999)}")
        else:
            lines.append(
                f"i{k},{alg},{rng.randrange(0, 10**6)},feasible,"
                f"{rng.randrange(1, 999)},{rng.randrange(1, 999)}"
            )
    text = "\n".join(lines) + "\n"
    assert robinx.write_metadata(robinx.parse_metadata(text)) == text
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    passline(10, f"500 instance/solution round-trips and metadata CSV exact ({elapsed:.1f}s)")
