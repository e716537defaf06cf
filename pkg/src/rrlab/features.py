"""Problem-type features (elementary constraint counts), IP-model statistic
features, budgeted-solver probing features, and the Pearson relevance filter.

A FeatureVector is a plain ordered ``dict[str, float]``; the module defines
the canonical name lists so downstream projection models can reference
features positionally.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

from . import ipmodel
from .model import CA1, CA4, GA1, Hardness, Instance, Scope
from .solver import SAConfig, solve

FeatureVector = dict[str, float]

PROBLEM_TYPE_FEATURES = (
    "f_T",
    "f_P",
    "fH_CA1",
    "fH_CA2",
    "fH_CA3",
    "fH_CA4",
    "fH_GA1",
    "fH_BR1",
    "fH_BR2",
    "fS_CA1",
    "fS_CA2",
    "fS_CA3",
    "fS_CA4",
    "fS_GA1",
    "fS_BR1",
    "fS_BR2",
    "fS_FA2",
    "fS_SE1",
)

IP_FEATURES = (
    "phi_ip_nonzeros",
    "phi_ip_obj_std",
    "phi_ip_obj_mean",
    "phi_ip_cons_degree_max",
    "phi_ip_cons_degree_mean",
    "phi_ip_var_degree_mean",
    "phi_ip_obj_mean_normed",
    "phi_ip_lp_objective",  # never computed here; supplied externally
)

SA_FEATURES = (
    "phi_sa_ca2",
    "phi_sa_ca3",
    "phi_sa_ca4",
    "phi_sa_time_stage12",
    "phi_sa_soft_cost_stage12",
    "phi_sa_soft_cost",
)

ALL_FEATURES = PROBLEM_TYPE_FEATURES + IP_FEATURES + SA_FEATURES

PROBE_BUDGETS = (10000, 10000, 1000)


def elementary_piece_count(constraint) -> int:
    """Number of elementary pieces a constraint splits into before counting.

    A capacity constraint forbidding play in k slots is k per-slot pieces;
    a per-slot CA4 is one piece per slot; a GA1 forbidding games is one
    piece per (game, slot); everything else is a single piece.
    """
    p = constraint.params
    if isinstance(p, CA1) and p.max == 0:
        return len(p.slots)
    if isinstance(p, CA4) and p.scope is Scope.PER_SLOT:
        return len(p.slots)
    if isinstance(p, GA1) and p.max == 0 and p.min == 0:
        return len(p.games) * len(p.slots)
    return 1


def elementary_count(inst: Instance) -> FeatureVector:
    """Problem-type features: team count, phased flag, and per-type/hardness
    elementary constraint counts.

    Hard FA2/SE1 constraints have no problem-type bucket (the paper's
    fairness and separation constraints are always soft) and are skipped.
    """
    fv: FeatureVector = {name: 0.0 for name in PROBLEM_TYPE_FEATURES}
    fv["f_T"] = float(inst.n_teams)
    fv["f_P"] = 1.0 if inst.phased else 0.0
    for c in inst.constraints:
        prefix = "fH" if c.hardness is Hardness.HARD else "fS"
        name = f"{prefix}_{c.ctype}"
        if name in fv:
            fv[name] += elementary_piece_count(c)
    return fv


def ip_model_stats(inst: Instance) -> FeatureVector:
    """IP-model statistic features from the documented 0-1 formulation.

    ``phi_ip_lp_objective`` needs an LP solve and is deliberately absent;
    merge it from external data when available.
    """
    stats = ipmodel.build_stats(inst)
    obj = stats.objective
    obj_mean = float(obj.mean()) if obj.size else 0.0
    obj_std = float(obj.std()) if obj.size else 0.0
    mean_abs = stats.mean_abs_coefficient
    return {
        "phi_ip_nonzeros": float(stats.nonzeros),
        "phi_ip_obj_std": obj_std,
        "phi_ip_obj_mean": obj_mean,
        "phi_ip_cons_degree_max": float(stats.row_degree_max),
        "phi_ip_cons_degree_mean": stats.cons_degree_mean,
        "phi_ip_var_degree_mean": stats.var_degree_mean,
        "phi_ip_obj_mean_normed": obj_mean / mean_abs if mean_abs else 0.0,
    }


def probe(
    inst: Instance,
    seed: int = 0,
    budgets: tuple[int, int, int] = PROBE_BUDGETS,
    time_in_evaluations: bool = False,
) -> FeatureVector:
    """Probing features from one budgeted three-stage solver run.

    Infeasibility values come from the per-type hard deviations of the
    stage-2 incumbent; soft costs from the stage-2 and stage-3 incumbents.
    ``phi_sa_time_stage12`` is wall seconds by default; pass
    ``time_in_evaluations=True`` for a reproducible evaluation count instead.
    """
    result = solve(inst, SAConfig(stage_evaluations=budgets, seed=seed))
    stage2 = result.stage_reports[1]
    stage3 = result.stage_reports[2]
    if time_in_evaluations:
        time12 = float(result.evaluations_used[0] + result.evaluations_used[1])
    else:
        time12 = result.stage_wall_times[0] + result.stage_wall_times[1]
    return {
        "phi_sa_ca2": float(stage2.per_type_hard["CA2"]),
        "phi_sa_ca3": float(stage2.per_type_hard["CA3"]),
        "phi_sa_ca4": float(stage2.per_type_hard["CA4"]),
        "phi_sa_time_stage12": time12,
        "phi_sa_soft_cost_stage12": float(stage2.objective),
        "phi_sa_soft_cost": float(stage3.objective),
    }


def extract(inst: Instance, seed: int = 0, with_probe: bool = False,
            time_in_evaluations: bool = False) -> FeatureVector:
    """All computable features for one instance (probing optional)."""
    fv = elementary_count(inst)
    fv.update(ip_model_stats(inst))
    if with_probe:
        fv.update(probe(inst, seed=seed, time_in_evaluations=time_in_evaluations))
    return fv


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0  # undefined for constant columns
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def pearson_filter(
    features: Sequence[FeatureVector],
    perf,
    threshold: float = 0.4,
) -> list[str]:
    """Names of features whose |Pearson correlation| with some performance
    column reaches the threshold.

    ``perf`` may be a single column (sequence of reals), several columns,
    or a mapping of algorithm name to column. Constant features correlate
    with nothing and are dropped.
    """
    if isinstance(perf, Mapping):
        columns = [list(col) for col in perf.values()]
    elif perf and isinstance(perf[0], (int, float)):
        columns = [list(perf)]
    else:
        columns = [list(col) for col in perf]
    n = len(features)
    if n < 3:
        raise ValueError("need at least 3 observations")
    for col in columns:
        if len(col) != n:
            raise ValueError(f"performance column length {len(col)} != {n} feature rows")

    names: list[str] = []
    for fv in features:
        for name in fv:
            if name not in names:
                names.append(name)
    retained = []
    for name in names:
        try:
            xs = [fv[name] for fv in features]
        except KeyError as exc:
            raise ValueError(f"feature {name!r} missing from some rows") from exc
        if any(abs(_pearson(xs, col)) >= threshold for col in columns):
            retained.append(name)
    return retained
