"""Canonical-factorization warm start plus three-stage multi-neighbourhood
simulated annealing.

Stage 1 drives hard violations (including phased ones) to zero, stage 2
explores feasible and infeasible states under a weighted combination of hard
and soft cost, stage 3 polishes the soft objective without ever increasing
the hard level. Stages terminate on evaluation budgets, never wall time, and
a run is fully reproducible from its seed.
"""
from __future__ import annotations

import enum
import math
import random
import time
from dataclasses import dataclass, field

from .evaluator import Edits, Evaluator, HomeAwayTables, apply_edits, evaluate
from .model import (
    EvaluationReport,
    Hardness,
    Instance,
    InvalidInstanceError,
    Timetable,
)


class MoveError(ValueError):
    """No applicable move for the requested kind on this timetable."""


class MoveKind(str, enum.Enum):
    SwapHomes = "SwapHomes"
    SwapTeams = "SwapTeams"
    SwapRounds = "SwapRounds"
    PartialSwapTeams = "PartialSwapTeams"
    PartialSwapRounds = "PartialSwapRounds"
    PartialSwapTeamsPhased = "PartialSwapTeamsPhased"


ALL_MOVE_KINDS = tuple(MoveKind)


@dataclass(frozen=True)
class Move:
    """A structure-preserving rewrite of a timetable.

    ``removed``/``added`` spell out the full effect as (ordered pair, slot)
    edits; ``repair_chain`` lists the slots or teams dragged in beyond the
    primary operands to restore validity.
    """

    kind: MoveKind
    operands: tuple[int, ...]
    removed: Edits
    added: Edits
    repair_chain: tuple[int, ...] = ()

    def inverse(self) -> "Move":
        return Move(self.kind, self.operands, self.added, self.removed, self.repair_chain)


def canonical_schedule(n_teams: int, phased: bool = True) -> Timetable:
    """Compact 2RR from the circle method, mirrored for the second half.

    The venue pattern is the canonical one with exactly ``n - 2`` breaks per
    half; the output satisfies the phased condition by construction (and is
    equally valid for non-phased instances).
    """
    n = n_teams
    if n < 2 or n % 2 != 0:
        raise InvalidInstanceError(f"team count must be even and >= 2, got {n}")
    m = n - 1
    slot_of: dict[tuple[int, int], int] = {}
    for r in range(m):
        if r % 2 == 1:
            slot_of[(n - 1, r)] = r
        else:
            slot_of[(r, n - 1)] = r
        for k in range(1, n // 2):
            a = (r + k) % m
            b = (r - k) % m
            slot_of[(a, b) if k % 2 == 1 else (b, a)] = r
    for (h, a), s in list(slot_of.items()):
        slot_of[(a, h)] = s + m
    return Timetable(slot_of)


def _teams_of(tt: Timetable) -> int:
    # |games| = n(n-1) for a compact 2RR
    return (1 + math.isqrt(1 + 4 * len(tt.slot_of))) // 2


def _rows(tt: Timetable, n: int, n_slots: int, aux: HomeAwayTables | None):
    if aux is not None:
        return aux.opponent, aux.venue
    opponent = [[-1] * n_slots for _ in range(n)]
    venue = [[False] * n_slots for _ in range(n)]
    for (h, a), s in tt.slot_of.items():
        opponent[h][s] = a
        opponent[a][s] = h
        venue[h][s] = True
    return opponent, venue


def _game_key(t: int, o: int, t_home: bool) -> tuple[int, int]:
    return (t, o) if t_home else (o, t)


def _swap_homes(tt: Timetable, i: int, j: int) -> Move:
    s1 = tt.slot_of[(i, j)]
    s2 = tt.slot_of[(j, i)]
    removed = (((i, j), s1), ((j, i), s2))
    added = (((i, j), s2), ((j, i), s1))
    return Move(MoveKind.SwapHomes, (i, j), removed, added)


def _swap_rounds(tt: Timetable, r1: int, r2: int) -> Move:
    removed = []
    added = []
    for pair, s in tt.slot_of.items():
        if s == r1:
            removed.append((pair, r1))
            added.append((pair, r2))
        elif s == r2:
            removed.append((pair, r2))
            added.append((pair, r1))
    return Move(MoveKind.SwapRounds, (r1, r2), tuple(removed), tuple(added))


def _substitute_teams(
    opponent, venue, i: int, j: int, slots: list[int], kind: MoveKind, operands, chain
) -> Move:
    """Exchange the games of teams i and j in the given slots, venue kept
    with the game (i inherits j's venue against each opponent)."""
    removed = []
    added = []
    for s in slots:
        oi, vi = opponent[i][s], venue[i][s]
        oj, vj = opponent[j][s], venue[j][s]
        removed.append((_game_key(i, oi, vi), s))
        removed.append((_game_key(j, oj, vj), s))
        added.append((_game_key(i, oj, vj), s))
        added.append((_game_key(j, oi, vi), s))
    return Move(kind, operands, tuple(removed), tuple(added), chain)


def _swap_teams(tt: Timetable, i: int, j: int, n: int, n_slots: int, aux) -> Move | None:
    opponent, venue = _rows(tt, n, n_slots, aux)
    slots = [s for s in range(n_slots) if opponent[i][s] != j]
    if not slots:
        return None
    return _substitute_teams(
        opponent, venue, i, j, slots, MoveKind.SwapTeams, (i, j), ()
    )


def _partial_swap_rounds(
    tt: Timetable, t: int, r1: int, r2: int, n: int, n_slots: int, aux
) -> Move:
    opponent, _ = _rows(tt, n, n_slots, aux)
    members = {t}
    stack = [t]
    while stack:
        u = stack.pop()
        for r in (r1, r2):
            o = opponent[u][r]
            if o not in members:
                members.add(o)
                stack.append(o)
    removed = []
    added = []
    for pair, s in tt.slot_of.items():
        if s in (r1, r2) and pair[0] in members:
            removed.append((pair, s))
            added.append((pair, r2 if s == r1 else r1))
    chain = tuple(sorted(members - {t}))
    return Move(
        MoveKind.PartialSwapRounds, (t, r1, r2), tuple(removed), tuple(added), chain
    )


def _partial_swap_teams(
    tt: Timetable, i: int, j: int, r: int, n: int, n_slots: int, aux
) -> Move | None:
    opponent, venue = _rows(tt, n, n_slots, aux)
    if opponent[i][r] == j:
        return None
    where = {}
    for t in (i, j):
        for s in range(n_slots):
            where[(t, opponent[t][s], venue[t][s])] = s
    slots = {r}
    set_i = {(opponent[i][r], venue[i][r])}
    set_j = {(opponent[j][r], venue[j][r])}
    while set_i != set_j:
        missing = set_i - set_j
        if missing:
            o, v = min(missing)
            s = where[(j, o, v)]
        else:
            o, v = min(set_j - set_i)
            s = where[(i, o, v)]
        slots.add(s)
        set_i.add((opponent[i][s], venue[i][s]))
        set_j.add((opponent[j][s], venue[j][s]))
    ordered = sorted(slots)
    return _substitute_teams(
        opponent,
        venue,
        i,
        j,
        ordered,
        MoveKind.PartialSwapTeams,
        (i, j, r),
        tuple(s for s in ordered if s != r),
    )


def _partial_swap_teams_phased(
    tt: Timetable, i: int, j: int, r: int, n: int, n_slots: int, aux
) -> Move | None:
    """Partial team swap whose repair chain stays inside r's half, so the
    per-pair first-half meeting counts never change; venues are fixed up
    afterwards to keep each pair's two games on opposite venues."""
    opponent, venue = _rows(tt, n, n_slots, aux)
    if opponent[i][r] == j:
        return None
    half = range(0, n - 1) if r < n - 1 else range(n - 1, n_slots)
    where: dict[tuple[int, int], list[int]] = {}
    for t in (i, j):
        for s in half:
            where.setdefault((t, opponent[t][s]), []).append(s)

    slots = {r}
    count_i: dict[int, int] = {opponent[i][r]: 1}
    count_j: dict[int, int] = {opponent[j][r]: 1}

    def missing_from(a: dict[int, int], b: dict[int, int]) -> int | None:
        opts = [o for o, c in a.items() if c > b.get(o, 0)]
        return min(opts) if opts else None

    guard = 0
    while count_i != count_j:
        guard += 1
        if guard > n_slots + 2:
            return None
        o = missing_from(count_i, count_j)
        t_other = j
        if o is None:
            o = missing_from(count_j, count_i)
            t_other = i
        s = next((s for s in where.get((t_other, o), ()) if s not in slots), None)
        if s is None:
            return None  # chain cannot close within this half
        slots.add(s)
        count_i[opponent[i][s]] = count_i.get(opponent[i][s], 0) + 1
        count_j[opponent[j][s]] = count_j.get(opponent[j][s], 0) + 1

    ordered = sorted(slots)
    removed = []
    for s in ordered:
        removed.append((_game_key(i, opponent[i][s], venue[i][s]), s))
        removed.append((_game_key(j, opponent[j][s], venue[j][s]), s))
    # Venue fixup: orient each reassigned game opposite to the pair's game
    # that stays put; when both games of a pair are reassigned, give the
    # first (in slot order) to the lower-indexed team as home.
    gone = set(pair for pair, _ in removed)
    present = {pair: s for pair, s in tt.slot_of.items() if pair not in gone}
    added = []
    for s in ordered:
        for t, o in ((i, opponent[j][s]), (j, opponent[i][s])):
            if (t, o) in present:
                pair = (o, t)
            elif (o, t) in present:
                pair = (t, o)
            else:
                pair = (min(t, o), max(t, o))
            added.append((pair, s))
            present[pair] = s
    return Move(
        MoveKind.PartialSwapTeamsPhased,
        (i, j, r),
        tuple(removed),
        tuple(added),
        tuple(s for s in ordered if s != r),
    )


def neighbours(
    kind: MoveKind,
    tt: Timetable,
    rng: random.Random,
    aux: HomeAwayTables | None = None,
    max_tries: int = 50,
) -> Move:
    """Sample a random applicable move of the given kind.

    Raises :class:`MoveError` when no applicable move is found after
    ``max_tries`` operand draws (degenerate cases, e.g. team swaps with
    only two teams).
    """
    n = _teams_of(tt)
    n_slots = 2 * n - 2
    kind = MoveKind(kind)
    for _ in range(max_tries):
        if kind is MoveKind.SwapHomes:
            i, j = rng.sample(range(n), 2)
            return _swap_homes(tt, min(i, j), max(i, j))
        if kind is MoveKind.SwapRounds:
            r1, r2 = rng.sample(range(n_slots), 2)
            return _swap_rounds(tt, min(r1, r2), max(r1, r2))
        if kind is MoveKind.SwapTeams:
            i, j = rng.sample(range(n), 2)
            move = _swap_teams(tt, min(i, j), max(i, j), n, n_slots, aux)
        elif kind is MoveKind.PartialSwapRounds:
            r1, r2 = rng.sample(range(n_slots), 2)
            move = _partial_swap_rounds(
                tt, rng.randrange(n), min(r1, r2), max(r1, r2), n, n_slots, aux
            )
        elif kind is MoveKind.PartialSwapTeams:
            i, j = rng.sample(range(n), 2)
            move = _partial_swap_teams(
                tt, min(i, j), max(i, j), rng.randrange(n_slots), n, n_slots, aux
            )
        else:
            i, j = rng.sample(range(n), 2)
            move = _partial_swap_teams_phased(
                tt, min(i, j), max(i, j), rng.randrange(n_slots), n, n_slots, aux
            )
        if move is not None:
            return move
    raise MoveError(f"no applicable {kind.value} move found in {max_tries} tries")


@dataclass
class SAConfig:
    """Tuning knobs for the three-stage annealer.

    The paper behind this solver gives no temperature schedule; defaults are:
    initial temperature calibrated per stage so roughly half of the uphill
    moves on the start solution are accepted (1,000 sampled moves, not
    counted against the budget), geometric cooling, and a Johnson-style
    cut-off that advances the temperature early once
    ``cutoff_fraction * iterations_per_temperature`` moves were accepted.
    ``hard_weight_stage2`` defaults to 10x the largest soft penalty.
    """

    stage_evaluations: tuple[int, int, int] = (10000, 10000, 1000)
    initial_temperature: float | None = None
    cooling_rate: float = 0.99
    iterations_per_temperature: int = 100
    cutoff_fraction: float = 0.05
    hard_weight_stage2: float | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.stage_evaluations) != 3 or any(b < 0 for b in self.stage_evaluations):
            raise ValueError("stage_evaluations must be three non-negative budgets")
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValueError("cooling_rate must be in (0, 1)")
        if not 0.0 < self.cutoff_fraction <= 1.0:
            raise ValueError("cutoff_fraction must be in (0, 1]")
        if self.iterations_per_temperature < 1:
            raise ValueError("iterations_per_temperature must be >= 1")


@dataclass
class SolveResult:
    best_timetable: Timetable | None
    best_report: EvaluationReport
    evaluations_used: tuple[int, int, int]
    wall_time: float
    trace: list[tuple[int, int, int]] | None = None
    stage_reports: tuple[EvaluationReport, ...] = ()
    stage_wall_times: tuple[float, ...] = ()


class _Annealer:
    """Single solve run; owns the current timetable, aux tables, and rng."""

    CALIBRATION_SAMPLES = 1000

    def __init__(self, inst: Instance, cfg: SAConfig, keep_trace: bool):
        self.inst = inst
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.evaluator = Evaluator(inst)
        self.tt = canonical_schedule(inst.n_teams, inst.phased)
        self.aux = HomeAwayTables.build(self.tt, inst)
        report = evaluate(self.tt, inst, self.aux)
        self.hard = report.hard_violation
        self.soft = report.objective
        self.phase = report.phased_violations
        self.best_tt = self.tt.copy()
        self.best_key = (self.hard + self.phase, self.soft)
        self.total_evals = 0
        self.trace: list[tuple[int, int, int]] | None = [] if keep_trace else None
        if self.trace is not None:
            self.trace.append((0, self.best_key[0], self.best_key[1]))
        w = cfg.hard_weight_stage2
        if w is None:
            soft_penalties = [
                c.penalty for c in inst.constraints if c.hardness is Hardness.SOFT
            ]
            w = 10.0 * max(soft_penalties, default=1)
        self.hard_weight = w

    def _sample_move(self) -> Move:
        for _ in range(100):
            kind = self.rng.choice(ALL_MOVE_KINDS)
            try:
                return neighbours(kind, self.tt, self.rng, self.aux)
            except MoveError:
                continue
        raise MoveError("no applicable move of any kind")

    def _stage_cost_delta(self, stage: int, d: tuple[int, int, int]) -> float:
        d_hard, d_obj, d_phase = d
        if stage == 0:
            return d_hard + d_phase
        if stage == 1:
            return self.hard_weight * (d_hard + d_phase) + d_obj
        return d_obj

    def _stage_cost_now(self, stage: int) -> float:
        if stage == 0:
            return self.hard + self.phase
        if stage == 1:
            return self.hard_weight * (self.hard + self.phase) + self.soft
        return self.soft if (self.hard + self.phase) == 0 else float("inf")

    def _calibrate(self, stage: int) -> float:
        if self.cfg.initial_temperature is not None:
            return self.cfg.initial_temperature
        uphill = []
        for _ in range(self.CALIBRATION_SAMPLES):
            try:
                move = self._sample_move()
            except MoveError:
                break
            d = self.evaluator.delta(self.tt, self.aux, move)
            d_cost = self._stage_cost_delta(stage, d)
            if d_cost > 0:
                uphill.append(d_cost)
        if not uphill:
            return 1.0
        # accept a mean-sized uphill move with probability ~1/2
        return (sum(uphill) / len(uphill)) / math.log(2.0)

    def _accept(self) -> None:
        key = (self.hard + self.phase, self.soft)
        if key < self.best_key:
            self.best_key = key
            self.best_tt = self.tt.copy()
            if self.trace is not None:
                self.trace.append((self.total_evals, key[0], key[1]))

    def run_stage(self, stage: int, budget: int) -> int:
        if budget == 0 or self._stage_cost_now(stage) == 0:
            return 0
        cfg = self.cfg
        temperature = self._calibrate(stage)
        cutoff = max(1, round(cfg.cutoff_fraction * cfg.iterations_per_temperature))
        evals = 0
        iters_at_t = 0
        accepted_at_t = 0
        while evals < budget:
            try:
                move = self._sample_move()
            except MoveError:
                break
            d = self.evaluator.delta(self.tt, self.aux, move)
            evals += 1
            self.total_evals += 1
            d_hard, d_obj, d_phase = d
            rejected = stage == 2 and d_hard + d_phase > 0
            if not rejected:
                d_cost = self._stage_cost_delta(stage, d)
                if d_cost <= 0 or self.rng.random() < math.exp(-d_cost / temperature):
                    apply_edits(self.tt, self.aux, move.removed, move.added)
                    self.hard += d_hard
                    self.soft += d_obj
                    self.phase += d_phase
                    accepted_at_t += 1
                    self._accept()
                    if self._stage_cost_now(stage) == 0:
                        break
            iters_at_t += 1
            if iters_at_t >= cfg.iterations_per_temperature or accepted_at_t >= cutoff:
                temperature *= cfg.cooling_rate
                iters_at_t = 0
                accepted_at_t = 0
        return evals

    def restart_from_best(self) -> None:
        self.tt = self.best_tt.copy()
        self.aux = HomeAwayTables.build(self.tt, self.inst)
        report = evaluate(self.tt, self.inst, self.aux)
        self.hard = report.hard_violation
        self.soft = report.objective
        self.phase = report.phased_violations


def solve(inst: Instance, cfg: SAConfig | None = None, keep_trace: bool = False) -> SolveResult:
    """Run the three-stage annealer and return the best solution seen.

    The incumbent is the lexicographically best (hard level, soft objective)
    state over the whole run, so the result is never worse than the canonical
    start; with no feasible solution found the least-infeasible one is
    returned with ``feasible=False``.
    """
    cfg = cfg or SAConfig()
    run = _Annealer(inst, cfg, keep_trace)
    used = []
    reports = []
    stage_times = []
    t_start = time.perf_counter()
    for stage in range(3):
        t0 = time.perf_counter()
        used.append(run.run_stage(stage, cfg.stage_evaluations[stage]))
        run.restart_from_best()
        stage_times.append(time.perf_counter() - t0)
        reports.append(evaluate(run.best_tt, inst))
    wall = time.perf_counter() - t_start
    return SolveResult(
        best_timetable=run.best_tt,
        best_report=reports[-1],
        evaluations_used=tuple(used),
        wall_time=wall,
        trace=run.trace,
        stage_reports=tuple(reports),
        stage_wall_times=tuple(stage_times),
    )
