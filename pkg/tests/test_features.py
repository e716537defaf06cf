import math
import random

import numpy as np
import pytest
import scipy.sparse as sp

from rrlab.features import (
    PROBLEM_TYPE_FEATURES,
    elementary_count,
    ip_model_stats,
    pearson_filter,
    probe,
)
from rrlab.ipmodel import build_stats
from rrlab.model import (
    CA1,
    CA2,
    CA4,
    GA1,
    Constraint,
    Hardness,
    Instance,
    Mode,
    Scope,
)

from helpers import rand_instance


def ca1(team=0, slots=(0,), mode=Mode.HOME, lo=0, hi=0, hardness=Hardness.HARD, penalty=1):
    if hardness is Hardness.HARD:
        penalty = 0
    return Constraint(hardness, penalty, CA1(team=team, slots=frozenset(slots), mode=mode, min=lo, max=hi))


class TestElementaryCount:
    def test_empty_instance(self):
        inst = Instance(id="i", n_teams=16, phased=True)
        fv = elementary_count(inst)
        assert fv["f_T"] == 16
        assert fv["f_P"] == 1
        assert all(fv[name] == 0 for name in PROBLEM_TYPE_FEATURES if name.startswith("f" "H") or name.startswith("fS"))

    def test_forbidding_ca1_splits_per_slot(self):
        inst = Instance(id="i", n_teams=4, phased=False, constraints=(ca1(slots=(0, 1, 2)),))
        assert elementary_count(inst)["fH_CA1"] == 3

    def test_twenty_elementary_ca1(self):
        constraints = tuple(ca1(team=t % 4, slots=(s,)) for t, s in zip(range(20), [0, 1, 2, 3, 4] * 4))
        inst = Instance(id="i", n_teams=4, phased=False, constraints=constraints)
        assert elementary_count(inst)["fH_CA1"] == 20

    def test_per_slot_ca4_counts_slots(self):
        c = Constraint(
            Hardness.HARD,
            0,
            CA4(
                teams1=frozenset({0}),
                teams2=frozenset({1}),
                slots=frozenset({0, 1, 2, 3}),
                mode=Mode.ANY,
                scope=Scope.PER_SLOT,
                max=1,
            ),
        )
        inst = Instance(id="i", n_teams=4, phased=False, constraints=(c,))
        assert elementary_count(inst)["fH_CA4"] == 4

    def test_forbidding_ga1_counts_game_slot_cells(self):
        c = Constraint(
            Hardness.SOFT,
            3,
            GA1(games=frozenset({(0, 1), (1, 2)}), slots=frozenset({0, 1, 2}), min=0, max=0),
        )
        inst = Instance(id="i", n_teams=4, phased=False, constraints=(c,))
        assert elementary_count(inst)["fS_GA1"] == 6

    def test_bounded_constraints_count_once(self):
        inst = Instance(
            id="i", n_teams=4, phased=False, constraints=(ca1(slots=(0, 1, 2), hi=2),)
        )
        assert elementary_count(inst)["fH_CA1"] == 1

    def test_order_invariant(self):
        rng = random.Random(8)
        inst = rand_instance(rng, n=6, n_constraints=12)
        shuffled = list(inst.constraints)
        rng.shuffle(shuffled)
        inst2 = Instance(
            id="i", n_teams=6, phased=inst.phased, constraints=tuple(shuffled)
        )
        assert elementary_count(inst) == {
            **elementary_count(inst2),
            "f_T": elementary_count(inst)["f_T"],
        }


def independent_matrix(inst: Instance) -> sp.coo_matrix:
    """Build the documented formulation as an actual sparse matrix.

    Independent oracle: supports the structural rows plus simple bounded
    CA1 constraints, which is all the golden test instance needs.
    """
    n, n_slots = inst.n_teams, inst.n_slots
    x_index = {}
    for h in range(n):
        for a in range(n):
            if h == a:
                continue
            for s in range(n_slots):
                x_index[(h, a, s)] = len(x_index)
    cols = len(x_index)
    rows_i, cols_j, data = [], [], []
    row = 0
    for t in range(n):
        for s in range(n_slots):
            for o in range(n):
                if o == t:
                    continue
                for key in ((t, o, s), (o, t, s)):
                    rows_i.append(row)
                    cols_j.append(x_index[key])
                    data.append(1.0)
            row += 1
    for h in range(n):
        for a in range(n):
            if h == a:
                continue
            for s in range(n_slots):
                rows_i.append(row)
                cols_j.append(x_index[(h, a, s)])
                data.append(1.0)
            row += 1
    for c in inst.constraints:
        p = c.params
        assert isinstance(p, CA1) and p.max > 0 and p.min == 0
        for s in sorted(p.slots):
            for o in range(n):
                if o == p.team:
                    continue
                key = (p.team, o, s) if p.mode is Mode.HOME else (o, p.team, s)
                rows_i.append(row)
                cols_j.append(x_index[key])
                data.append(1.0)
        if c.hardness is Hardness.SOFT:
            rows_i.append(row)
            cols_j.append(cols)
            data.append(-1.0)
            cols += 1
        row += 1
    return sp.coo_matrix((data, (rows_i, cols_j)), shape=(row, cols))


class TestIPModelStats:
    def test_empty_objective_is_zero(self):
        inst = Instance(id="i", n_teams=6, phased=False)
        fv = ip_model_stats(inst)
        assert fv["phi_ip_obj_mean"] == 0.0
        assert fv["phi_ip_obj_std"] == 0.0
        assert "phi_ip_lp_objective" not in fv

    def test_variable_count_formula(self):
        for n in (4, 6, 8):
            inst = Instance(id="i", n_teams=n, phased=False)
            stats = build_stats(inst)
            assert stats.n_cols == n * (n - 1) * (2 * n - 2)

    def test_nonzeros_match_independent_matrix(self):
        c = ca1(team=2, slots=(0, 3, 7), mode=Mode.HOME, hi=1, hardness=Hardness.SOFT, penalty=4)
        inst = Instance(id="i", n_teams=6, phased=False, constraints=(c,))
        stats = build_stats(inst)
        matrix = independent_matrix(inst).tocsr()
        assert stats.nonzeros == matrix.nnz
        assert stats.n_rows == matrix.shape[0]
        assert stats.n_cols == matrix.shape[1]
        degrees = np.diff(matrix.indptr)
        assert stats.row_degree_max == degrees.max()
        assert stats.row_degree_sum == degrees.sum()

    def test_mean_degree_identity(self):
        rng = random.Random(3)
        for _ in range(10):
            inst = rand_instance(rng, n=4, n_constraints=6)
            stats = build_stats(inst)
            assert stats.row_degree_sum == stats.nonzeros
            assert stats.cons_degree_mean * stats.n_rows == pytest.approx(stats.nonzeros)

    def test_objective_carries_penalties(self):
        c = ca1(slots=(0, 1), hi=1, hardness=Hardness.SOFT, penalty=7)
        inst = Instance(id="i", n_teams=4, phased=False, constraints=(c,))
        stats = build_stats(inst)
        assert stats.objective.max() == 7.0
        assert (stats.objective > 0).sum() == 1


class TestProbe:
    def test_unconstrained_probe_is_all_zero(self):
        inst = Instance(id="i", n_teams=6, phased=True)
        fv = probe(inst, seed=1, budgets=(200, 200, 100), time_in_evaluations=True)
        assert fv["phi_sa_ca2"] == 0
        assert fv["phi_sa_ca3"] == 0
        assert fv["phi_sa_ca4"] == 0
        assert fv["phi_sa_soft_cost_stage12"] == 0
        assert fv["phi_sa_soft_cost"] == 0

    def test_fixed_seed_is_deterministic(self):
        c = Constraint(
            Hardness.HARD,
            0,
            CA2(
                team=0,
                opponents=frozenset({1, 2}),
                slots=frozenset({0, 1, 2}),
                mode=Mode.ANY,
                min=0,
                max=0,
            ),
        )
        inst = Instance(id="i", n_teams=6, phased=False, constraints=(c,))
        a = probe(inst, seed=17, budgets=(300, 300, 100), time_in_evaluations=True)
        b = probe(inst, seed=17, budgets=(300, 300, 100), time_in_evaluations=True)
        assert a == b

    def test_absent_types_probe_zero(self):
        c = Constraint(
            Hardness.HARD,
            0,
            CA2(
                team=0,
                opponents=frozenset({1}),
                slots=frozenset({0}),
                mode=Mode.HOME,
                min=0,
                max=0,
            ),
        )
        inst = Instance(id="i", n_teams=6, phased=False, constraints=(c,))
        fv = probe(inst, seed=2, budgets=(100, 100, 50), time_in_evaluations=True)
        assert fv["phi_sa_ca3"] == 0
        assert fv["phi_sa_ca4"] == 0


class TestPearsonFilter:
    def test_identical_column_retained(self):
        features = [{"a": float(v)} for v in (1, 2, 3, 4, 5)]
        perf = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert pearson_filter(features, perf) == ["a"]

    def test_constant_feature_dropped(self):
        features = [{"a": 1.0, "b": float(v)} for v in (1, 2, 3, 4, 5)]
        perf = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert pearson_filter(features, perf) == ["b"]

    def test_weak_correlation_dropped_at_default_threshold(self):
        # direct-formula oracle gives r = 0.35112 for this 5-point set
        xs = [1.0, 2.0, 3.0, 4.0, 5.0]
        ys = [0.0, 1.0, 6.0, 5.0, 1.0]
        mx, my = sum(xs) / 5, sum(ys) / 5
        r = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / math.sqrt(
            sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys)
        )
        assert r == pytest.approx(0.35112344158839176)
        features = [{"weak": x} for x in xs]
        assert pearson_filter(features, ys, threshold=0.4) == []
        assert pearson_filter(features, ys, threshold=0.35) == ["weak"]

    def test_multiple_columns_any_retains(self):
        features = [{"a": float(v)} for v in (1, 2, 3, 4, 5)]
        cols = {"alg1": [5.0, 4.0, 1.0, 2.0, 3.0], "alg2": [1.0, 2.0, 3.0, 4.0, 5.0]}
        assert pearson_filter(features, cols) == ["a"]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pearson_filter([{"a": 1.0}] * 4, [1.0, 2.0, 3.0])
