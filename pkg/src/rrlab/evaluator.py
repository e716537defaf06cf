"""Deviation counting for all nine constraint types, the weighted soft
objective, and exact incremental deltas for local-search moves.

All arithmetic is in plain integers: a deviation is a non-negative int, the
objective is the penalty-weighted sum of soft deviations, and incremental
deltas agree with from-scratch recounts exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    BR1,
    BR2,
    CA1,
    CA2,
    CA3,
    CA4,
    CONSTRAINT_TYPES,
    FA2,
    GA1,
    SE1,
    Constraint,
    EvaluationReport,
    Hardness,
    Instance,
    Mode,
    Scope,
    StructuralError,
    Timetable,
    validate_structure,
)

# Edit lists: the full effect of a move as (ordered pair, slot) removals and
# additions. Both states must be compact, so removals and additions cover the
# same (team, slot) cells.
Edits = tuple[tuple[tuple[int, int], int], ...]


@dataclass
class HomeAwayTables:
    """Per-(team, slot) lookup tables derived from a timetable.

    ``venue[t][s]`` is True for a home game, ``opponent[t][s]`` the opposing
    team, ``home_count_prefix[t][s]`` the home games of ``t`` in slots
    ``0..s``. A break at ``(t, s >= 1)`` is two consecutive games at the same
    venue: ``venue[t][s-1] == venue[t][s]``.
    """

    n_teams: int
    n_slots: int
    venue: list[list[bool]]
    opponent: list[list[int]]
    home_count_prefix: list[list[int]]

    @classmethod
    def build(cls, tt: Timetable, inst: Instance) -> "HomeAwayTables":
        n, n_slots = inst.n_teams, inst.n_slots
        venue = [[False] * n_slots for _ in range(n)]
        opponent = [[-1] * n_slots for _ in range(n)]
        for (h, a), s in tt.slot_of.items():
            venue[h][s] = True
            venue[a][s] = False
            opponent[h][s] = a
            opponent[a][s] = h
        tables = cls(n, n_slots, venue, opponent, [[0] * n_slots for _ in range(n)])
        for t in range(n):
            tables._rebuild_prefix(t)
        return tables

    def _rebuild_prefix(self, t: int) -> None:
        count = 0
        row = self.home_count_prefix[t]
        vrow = self.venue[t]
        for s in range(self.n_slots):
            count += vrow[s]
            row[s] = count

    def break_at(self, t: int, s: int) -> Mode | None:
        """HOME_BREAK/AWAY_BREAK as a Mode, or None when venues alternate."""
        if s < 1 or self.venue[t][s] != self.venue[t][s - 1]:
            return None
        return Mode.HOME if self.venue[t][s] else Mode.AWAY

    def apply_edits(self, removed: Edits, added: Edits) -> None:
        touched = set()
        for (h, a), s in added:
            self.venue[h][s] = True
            self.venue[a][s] = False
            self.opponent[h][s] = a
            self.opponent[a][s] = h
            touched.add(h)
            touched.add(a)
        for (h, a), _ in removed:
            touched.add(h)
            touched.add(a)
        for t in touched:
            self._rebuild_prefix(t)


def apply_edits(tt: Timetable, aux: HomeAwayTables | None, removed: Edits, added: Edits) -> None:
    """Apply a move's edit lists to a timetable, keeping ``aux`` in sync."""
    slot_of = tt.slot_of
    for pair, _ in removed:
        del slot_of[pair]
    for pair, s in added:
        slot_of[pair] = s
    if aux is not None:
        aux.apply_edits(removed, added)


def _venue_matches(mode: Mode, is_home: bool) -> bool:
    if mode is Mode.ANY:
        return True
    return is_home if mode is Mode.HOME else not is_home


def _band(count: int, lo: int, hi: int) -> int:
    return max(0, count - hi) + max(0, lo - count)


def _dev_ca1(p: CA1, aux: HomeAwayTables) -> int:
    count = sum(1 for s in p.slots if _venue_matches(p.mode, aux.venue[p.team][s]))
    return _band(count, p.min, p.max)


def _dev_ca2(p: CA2, aux: HomeAwayTables) -> int:
    opp = aux.opponent[p.team]
    ven = aux.venue[p.team]
    count = sum(1 for s in p.slots if opp[s] in p.opponents and _venue_matches(p.mode, ven[s]))
    return _band(count, p.min, p.max)


def _dev_ca3(p: CA3, aux: HomeAwayTables) -> int:
    opp = aux.opponent[p.team]
    ven = aux.venue[p.team]
    match = [
        1 if opp[s] in p.opponents and _venue_matches(p.mode, ven[s]) else 0
        for s in range(aux.n_slots)
    ]
    if p.window > aux.n_slots:
        return 0
    dev = 0
    in_window = sum(match[: p.window])
    dev += max(0, in_window - p.max)
    for z in range(1, aux.n_slots - p.window + 1):
        in_window += match[z + p.window - 1] - match[z - 1]
        dev += max(0, in_window - p.max)
    return dev


def _ca4_count_slot(p: CA4, aux: HomeAwayTables, s: int) -> int:
    if p.mode is Mode.ANY:
        seen = set()
        for t in p.teams1:
            o = aux.opponent[t][s]
            if o in p.teams2:
                seen.add((t, o) if t < o else (o, t))
        return len(seen)
    count = 0
    for t in p.teams1:
        if aux.opponent[t][s] in p.teams2 and _venue_matches(p.mode, aux.venue[t][s]):
            count += 1
    return count


def _dev_ca4(p: CA4, aux: HomeAwayTables) -> int:
    if p.scope is Scope.GLOBAL:
        total = sum(_ca4_count_slot(p, aux, s) for s in p.slots)
        return max(0, total - p.max)
    return sum(max(0, _ca4_count_slot(p, aux, s) - p.max) for s in p.slots)


def _dev_ga1(p: GA1, tt: Timetable) -> int:
    count = sum(1 for g in p.games if tt.slot_of[g] in p.slots)
    return _band(count, p.min, p.max)


def _breaks_in(aux: HomeAwayTables, t: int, slots: frozenset[int], mode: Mode) -> int:
    count = 0
    vrow = aux.venue[t]
    for s in slots:
        if s >= 1 and vrow[s] == vrow[s - 1] and _venue_matches(mode, vrow[s]):
            count += 1
    return count


def _dev_br1(p: BR1, aux: HomeAwayTables) -> int:
    return max(0, _breaks_in(aux, p.team, p.slots, p.break_mode) - p.max_breaks)


def _dev_br2(p: BR2, aux: HomeAwayTables) -> int:
    total = sum(_breaks_in(aux, t, p.slots, Mode.ANY) for t in p.teams)
    return max(0, total - p.max_breaks)


def _dev_fa2(p: FA2, aux: HomeAwayTables) -> int:
    teams = sorted(p.teams)
    prefix = aux.home_count_prefix
    dev = 0
    for ii, i in enumerate(teams):
        for j in teams[ii + 1 :]:
            spread = max(abs(prefix[i][s] - prefix[j][s]) for s in p.slots) if p.slots else 0
            dev += max(0, spread - p.bound)
    return dev


def _dev_se1(p: SE1, tt: Timetable) -> int:
    teams = sorted(p.teams)
    dev = 0
    for ii, i in enumerate(teams):
        for j in teams[ii + 1 :]:
            separation = abs(tt.slot_of[(i, j)] - tt.slot_of[(j, i)]) - 1
            dev += max(0, p.min_separation - separation)
    return dev


def deviation(c: Constraint, tt: Timetable, aux: HomeAwayTables) -> int:
    """Deviation of one constraint on a structurally valid timetable."""
    p = c.params
    if isinstance(p, CA1):
        return _dev_ca1(p, aux)
    if isinstance(p, CA2):
        return _dev_ca2(p, aux)
    if isinstance(p, CA3):
        return _dev_ca3(p, aux)
    if isinstance(p, CA4):
        return _dev_ca4(p, aux)
    if isinstance(p, GA1):
        return _dev_ga1(p, tt)
    if isinstance(p, BR1):
        return _dev_br1(p, aux)
    if isinstance(p, BR2):
        return _dev_br2(p, aux)
    if isinstance(p, FA2):
        return _dev_fa2(p, aux)
    return _dev_se1(p, tt)


def _structural_only(tt: Timetable, inst: Instance) -> list[str]:
    return [v for v in validate_structure(tt, inst) if not v.startswith("phased:")]


def evaluate(tt: Timetable, inst: Instance, aux: HomeAwayTables | None = None) -> EvaluationReport:
    """Full evaluation: per-constraint deviations, weighted objective,
    hard feasibility including the phased condition.

    Raises :class:`StructuralError` if ``tt`` is not a compact 2RR.
    """
    violations = _structural_only(tt, inst)
    if violations:
        raise StructuralError(violations)
    if aux is None:
        aux = HomeAwayTables.build(tt, inst)

    per_constraint = []
    per_type_hard = {ctype: 0 for ctype in CONSTRAINT_TYPES}
    hard_total = 0
    objective = 0
    for idx, c in enumerate(inst.constraints):
        dev = deviation(c, tt, aux)
        per_constraint.append((idx, dev))
        if c.hardness is Hardness.HARD:
            hard_total += dev
            per_type_hard[c.ctype] += dev
        else:
            objective += c.penalty * dev

    from .model import phased_violation_count

    phased = phased_violation_count(tt, inst)
    return EvaluationReport(
        hard_violation=hard_total,
        objective=objective,
        per_constraint=tuple(per_constraint),
        per_type_hard=per_type_hard,
        feasible=(hard_total == 0 and phased == 0),
        phased_violations=phased,
    )


class Evaluator:
    """Incremental evaluation context for one instance.

    Precomputes which constraints each team can affect so a move only
    recounts the constraints it may have changed. Shareable across moves;
    the timetable/aux pair passed in stays owned by the caller.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self._by_team: list[list[int]] = [[] for _ in range(inst.n_teams)]
        for idx, c in enumerate(inst.constraints):
            for t in c.teams_involved():
                self._by_team[t].append(idx)

    def _affected(self, removed: Edits, added: Edits) -> list[int]:
        teams = set()
        for (h, a), _ in removed:
            teams.add(h)
            teams.add(a)
        for (h, a), _ in added:
            teams.add(h)
            teams.add(a)
        indices = set()
        for t in teams:
            indices.update(self._by_team[t])
        return sorted(indices)

    def _phase_part(self, tt: Timetable, pairs: set[tuple[int, int]]) -> int:
        if not self.inst.phased:
            return 0
        half = self.inst.first_phase_end
        total = 0
        for i, j in pairs:
            count = (tt.slot_of[(i, j)] < half) + (tt.slot_of[(j, i)] < half)
            total += abs(count - 1)
        return total

    def delta(
        self, tt: Timetable, aux: HomeAwayTables, move
    ) -> tuple[int, int, int]:
        """(Δhard, Δobjective, Δphased) of applying ``move``; state is restored."""
        removed, added = move.removed, move.added
        affected = self._affected(removed, added)
        pairs = {(min(h, a), max(h, a)) for (h, a), _ in removed}
        constraints = self.inst.constraints

        before = [deviation(constraints[i], tt, aux) for i in affected]
        phase_before = self._phase_part(tt, pairs)
        apply_edits(tt, aux, removed, added)
        d_hard = 0
        d_obj = 0
        for i, dev_before in zip(affected, before):
            c = constraints[i]
            change = deviation(c, tt, aux) - dev_before
            if c.hardness is Hardness.HARD:
                d_hard += change
            else:
                d_obj += c.penalty * change
        d_phase = self._phase_part(tt, pairs) - phase_before
        apply_edits(tt, aux, added, removed)
        return d_hard, d_obj, d_phase


def delta_evaluate(tt: Timetable, aux: HomeAwayTables, move, inst: Instance) -> tuple[int, int]:
    """(Δhard, Δobjective) that applying ``move`` would cause.

    Exact: applying the move and re-running :func:`evaluate` yields the old
    report shifted by precisely this delta. ``tt``/``aux`` are left unchanged.
    """
    d_hard, d_obj, _ = Evaluator(inst).delta(tt, aux, move)
    return d_hard, d_obj
