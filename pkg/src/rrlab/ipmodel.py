"""Canonical 0-1 formulation of an instance, built only to measure model
statistics (no solver is ever invoked).

The formulation is documented in docs/ip-model.md and is fixed so the
statistics are reproducible: schedule indicators x[h,a,s], per-(team, slot)
assignment rows, per-ordered-pair scheduling rows, one bound row per
elementary constraint piece (per window for CA3, per slot for per-slot CA4,
per forbidden game-slot for forbidding GA1/CA1), auxiliary home-prefix,
break, and game-position columns where FA2/BR/SE1 need them, and one
deviation column with objective coefficient = penalty per soft bound row.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    BR1,
    BR2,
    CA1,
    CA2,
    CA3,
    CA4,
    FA2,
    GA1,
    SE1,
    Hardness,
    Instance,
    Mode,
    Scope,
)


@dataclass
class ModelStats:
    n_rows: int
    n_cols: int
    nonzeros: int
    row_degree_sum: int
    row_degree_max: int
    abs_coefficient_sum: float
    objective: np.ndarray  # one coefficient per column, zeros included

    @property
    def cons_degree_mean(self) -> float:
        return self.row_degree_sum / self.n_rows if self.n_rows else 0.0

    @property
    def var_degree_mean(self) -> float:
        return self.nonzeros / self.n_cols if self.n_cols else 0.0

    @property
    def mean_abs_coefficient(self) -> float:
        return self.abs_coefficient_sum / self.nonzeros if self.nonzeros else 0.0


class _Builder:
    """Accumulates matrix statistics without materializing the matrix."""

    def __init__(self):
        self.obj: list[float] = []
        self.n_rows = 0
        self.nonzeros = 0
        self.row_degree_sum = 0
        self.row_degree_max = 0
        self.abs_sum = 0.0

    def add_col(self, obj_coef: float = 0.0) -> int:
        self.obj.append(obj_coef)
        return len(self.obj) - 1

    def add_row(self, entries: list[tuple[int, float]]) -> None:
        # merge duplicate columns within a row before counting
        merged: dict[int, float] = {}
        for col, coef in entries:
            merged[col] = merged.get(col, 0.0) + coef
        degree = sum(1 for coef in merged.values() if coef != 0.0)
        self.n_rows += 1
        self.nonzeros += degree
        self.row_degree_sum += degree
        self.row_degree_max = max(self.row_degree_max, degree)
        self.abs_sum += sum(abs(coef) for coef in merged.values() if coef != 0.0)

    def stats(self) -> ModelStats:
        return ModelStats(
            n_rows=self.n_rows,
            n_cols=len(self.obj),
            nonzeros=self.nonzeros,
            row_degree_sum=self.row_degree_sum,
            row_degree_max=self.row_degree_max,
            abs_coefficient_sum=self.abs_sum,
            objective=np.array(self.obj, dtype=float),
        )


def _venue_terms(x, t: int, s: int, mode: Mode, n: int) -> list[tuple[int, float]]:
    terms = []
    if mode in (Mode.HOME, Mode.ANY):
        terms += [(x[t, a, s], 1.0) for a in range(n) if a != t]
    if mode in (Mode.AWAY, Mode.ANY):
        terms += [(x[a, t, s], 1.0) for a in range(n) if a != t]
    return terms


def _match_terms(x, t: int, opponents, s: int, mode: Mode) -> list[tuple[int, float]]:
    terms = []
    if mode in (Mode.HOME, Mode.ANY):
        terms += [(x[t, o, s], 1.0) for o in opponents if o != t]
    if mode in (Mode.AWAY, Mode.ANY):
        terms += [(x[o, t, s], 1.0) for o in opponents if o != t]
    return terms


def build_stats(inst: Instance) -> ModelStats:
    n = inst.n_teams
    n_slots = inst.n_slots
    b = _Builder()

    x = {}
    for h in range(n):
        for a in range(n):
            if h == a:
                continue
            for s in range(n_slots):
                x[h, a, s] = b.add_col()

    # structure: one game per team and slot, each ordered pair scheduled once
    for t in range(n):
        for s in range(n_slots):
            b.add_row(_venue_terms(x, t, s, Mode.ANY, n))
    for h in range(n):
        for a in range(n):
            if h != a:
                b.add_row([(x[h, a, s], 1.0) for s in range(n_slots)])

    # auxiliary columns, created lazily per need
    prefix_cols: dict[tuple[int, int], int] = {}
    break_cols: dict[tuple[int, int, Mode], int] = {}
    position_cols: dict[tuple[int, int], int] = {}

    def prefix(t: int, s: int) -> int:
        if (t, s) not in prefix_cols:
            for s2 in range(s + 1):
                if (t, s2) in prefix_cols:
                    continue
                col = b.add_col()
                prefix_cols[(t, s2)] = col
                row = [(col, 1.0)] + [(x[t, a, s2], -1.0) for a in range(n) if a != t]
                if s2 > 0:
                    row.append((prefix_cols[(t, s2 - 1)], -1.0))
                b.add_row(row)
        return prefix_cols[(t, s)]

    def brk(t: int, s: int, mode: Mode) -> int:
        if (t, s, mode) not in break_cols:
            col = b.add_col()
            break_cols[(t, s, mode)] = col
            row = _venue_terms(x, t, s, mode, n) + _venue_terms(x, t, s - 1, mode, n)
            row.append((col, -1.0))
            b.add_row(row)
        return break_cols[(t, s, mode)]

    def position(h: int, a: int) -> int:
        if (h, a) not in position_cols:
            col = b.add_col()
            position_cols[(h, a)] = col
            row = [(col, 1.0)] + [
                (x[h, a, s], -float(s)) for s in range(1, n_slots)
            ]
            b.add_row(row)
        return position_cols[(h, a)]

    def bound_rows(pieces: list[list[tuple[int, float]]], lo: int, hi: int, soft: bool, penalty: int):
        """One max row per piece; one min row per piece when lo > 0."""
        for terms in pieces:
            dev = b.add_col(float(penalty)) if soft else None
            row = list(terms)
            if dev is not None:
                row.append((dev, -1.0))
            b.add_row(row)
            if lo > 0:
                dev2 = b.add_col(float(penalty)) if soft else None
                row = list(terms)
                if dev2 is not None:
                    row.append((dev2, 1.0))
                b.add_row(row)

    for c in inst.constraints:
        p = c.params
        soft = c.hardness is Hardness.SOFT
        if isinstance(p, CA1):
            if p.max == 0:  # elementary forbid pieces, one per slot
                pieces = [_venue_terms(x, p.team, s, p.mode, n) for s in sorted(p.slots)]
                bound_rows(pieces, 0, 0, soft, c.penalty)
            else:
                terms = [
                    term for s in sorted(p.slots) for term in _venue_terms(x, p.team, s, p.mode, n)
                ]
                bound_rows([terms], p.min, p.max, soft, c.penalty)
        elif isinstance(p, CA2):
            terms = [
                term
                for s in sorted(p.slots)
                for term in _match_terms(x, p.team, sorted(p.opponents), s, p.mode)
            ]
            bound_rows([terms], p.min, p.max, soft, c.penalty)
        elif isinstance(p, CA3):
            pieces = []
            for z in range(0, n_slots - p.window + 1):
                pieces.append(
                    [
                        term
                        for s in range(z, z + p.window)
                        for term in _match_terms(x, p.team, sorted(p.opponents), s, p.mode)
                    ]
                )
            bound_rows(pieces, 0, p.max, soft, c.penalty)
        elif isinstance(p, CA4):
            per_slot = []
            for s in sorted(p.slots):
                terms = []
                for t in sorted(p.teams1):
                    if p.mode in (Mode.HOME, Mode.ANY):
                        terms += [(x[t, o, s], 1.0) for o in sorted(p.teams2) if o != t]
                    if p.mode in (Mode.AWAY, Mode.ANY):
                        terms += [(x[o, t, s], 1.0) for o in sorted(p.teams2) if o != t]
                per_slot.append(terms)
            if p.scope is Scope.GLOBAL:
                bound_rows([[t for terms in per_slot for t in terms]], 0, p.max, soft, c.penalty)
            else:
                bound_rows(per_slot, 0, p.max, soft, c.penalty)
        elif isinstance(p, GA1):
            if p.max == 0 and p.min == 0:  # elementary forbid pieces
                pieces = [
                    [(x[h, a, s], 1.0)]
                    for (h, a) in sorted(p.games)
                    for s in sorted(p.slots)
                ]
                bound_rows(pieces, 0, 0, soft, c.penalty)
            else:
                terms = [
                    (x[h, a, s], 1.0) for (h, a) in sorted(p.games) for s in sorted(p.slots)
                ]
                bound_rows([terms], p.min, p.max, soft, c.penalty)
        elif isinstance(p, BR1):
            modes = (Mode.HOME, Mode.AWAY) if p.break_mode is Mode.ANY else (p.break_mode,)
            terms = [
                (brk(p.team, s, mode), 1.0)
                for s in sorted(p.slots)
                if s >= 1
                for mode in modes
            ]
            bound_rows([terms], 0, p.max_breaks, soft, c.penalty)
        elif isinstance(p, BR2):
            terms = [
                (brk(t, s, mode), 1.0)
                for t in sorted(p.teams)
                for s in sorted(p.slots)
                if s >= 1
                for mode in (Mode.HOME, Mode.AWAY)
            ]
            bound_rows([terms], 0, p.max_breaks, soft, c.penalty)
        elif isinstance(p, FA2):
            teams = sorted(p.teams)
            for ii, i in enumerate(teams):
                for j in teams[ii + 1 :]:
                    dev = b.add_col(float(c.penalty)) if soft else None
                    for s in sorted(p.slots):
                        for sign in (1.0, -1.0):
                            row = [(prefix(i, s), sign), (prefix(j, s), -sign)]
                            if dev is not None:
                                row.append((dev, -1.0))
                            b.add_row(row)
        else:  # SE1
            teams = sorted(p.teams)
            for ii, i in enumerate(teams):
                for j in teams[ii + 1 :]:
                    dev = b.add_col(float(c.penalty)) if soft else None
                    order = b.add_col()  # which game comes first
                    for first, second in (((i, j), (j, i)), ((j, i), (i, j))):
                        row = [
                            (position(*first), 1.0),
                            (position(*second), -1.0),
                            (order, float(n_slots + p.min_separation + 1)),
                        ]
                        if dev is not None:
                            row.append((dev, 1.0))
                        b.add_row(row)
    return b.stats()
