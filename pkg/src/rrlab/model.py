"""Domain types for round-robin timetabling: instances, constraints, timetables.

Teams and slots are dense 0-based indices everywhere; names are kept only for
I/O. A timetable for ``n`` teams is a compact double round robin over
``2n - 2`` slots: every ordered pair (home, away) is scheduled exactly once
and every team plays exactly once per slot.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Hardness(str, enum.Enum):
    HARD = "HARD"
    SOFT = "SOFT"


class Mode(str, enum.Enum):
    """Venue filter: home games, away games, or both."""

    HOME = "HOME"
    AWAY = "AWAY"
    ANY = "ANY"


class Scope(str, enum.Enum):
    """CA4 counting scope: one total over all slots, or one bound per slot."""

    GLOBAL = "GLOBAL"
    PER_SLOT = "PER_SLOT"


CONSTRAINT_TYPES = ("CA1", "CA2", "CA3", "CA4", "GA1", "BR1", "BR2", "FA2", "SE1")


class InvalidInstanceError(ValueError):
    """Instance-level invariant broken (odd team count, bad reference, ...)."""


class MalformedTimetableError(ValueError):
    """Timetable references an unknown team or slot."""


class StructuralError(ValueError):
    """Operation requires a compact double round robin and got something else."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class CA1:
    """Bound the home (or away) games of one team over a slot set."""

    team: int
    slots: frozenset[int]
    mode: Mode
    min: int = 0
    max: int = 0


@dataclass(frozen=True)
class CA2:
    """Bound the games of one team against given opponents over a slot set."""

    team: int
    opponents: frozenset[int]
    slots: frozenset[int]
    mode: Mode
    min: int = 0
    max: int = 0


@dataclass(frozen=True)
class CA3:
    """Bound the games of one team against given opponents in every
    window of ``window`` consecutive slots."""

    team: int
    opponents: frozenset[int]
    mode: Mode
    max: int
    window: int


@dataclass(frozen=True)
class CA4:
    """Bound the games between two team groups over a slot set,
    globally or per slot."""

    teams1: frozenset[int]
    teams2: frozenset[int]
    slots: frozenset[int]
    mode: Mode
    scope: Scope
    max: int


@dataclass(frozen=True)
class GA1:
    """Bound how many of the given ordered games land in the slot set."""

    games: frozenset[tuple[int, int]]
    slots: frozenset[int]
    min: int = 0
    max: int = 0


@dataclass(frozen=True)
class BR1:
    """Bound the breaks of one team within a slot set."""

    team: int
    slots: frozenset[int]
    break_mode: Mode
    max_breaks: int


@dataclass(frozen=True)
class BR2:
    """Bound the total breaks of a team group within a slot set."""

    teams: frozenset[int]
    slots: frozenset[int]
    max_breaks: int


@dataclass(frozen=True)
class FA2:
    """Keep the home-game counts of any two teams within ``bound``
    of each other after every slot in the set."""

    teams: frozenset[int]
    slots: frozenset[int]
    bound: int


@dataclass(frozen=True)
class SE1:
    """Require at least ``min_separation`` slots between the two games
    of every pair in the team set."""

    teams: frozenset[int]
    min_separation: int


ConstraintParams = CA1 | CA2 | CA3 | CA4 | GA1 | BR1 | BR2 | FA2 | SE1


@dataclass(frozen=True)
class Constraint:
    hardness: Hardness
    penalty: int
    params: ConstraintParams

    def __post_init__(self):
        if self.penalty < 0:
            raise InvalidInstanceError(f"negative penalty {self.penalty}")
        if self.hardness is Hardness.SOFT and self.penalty == 0:
            raise InvalidInstanceError("soft constraint needs penalty > 0")
        p = self.params
        lo = getattr(p, "min", None)
        hi = getattr(p, "max", None)
        if lo is not None and (lo < 0 or (hi is not None and lo > hi)):
            raise InvalidInstanceError(f"bad bounds min={lo} max={hi} on {self.ctype}")
        for attr in ("max", "window", "max_breaks", "bound", "min_separation"):
            v = getattr(p, attr, None)
            if v is not None and v < 0:
                raise InvalidInstanceError(f"negative {attr} on {self.ctype}")
        if isinstance(p, CA3) and p.window < 1:
            raise InvalidInstanceError("CA3 window must be >= 1")

    @property
    def ctype(self) -> str:
        return type(self.params).__name__

    def teams_involved(self) -> frozenset[int]:
        """All team indices whose schedule can change this constraint's deviation."""
        p = self.params
        if isinstance(p, (CA1, BR1)):
            return frozenset((p.team,))
        if isinstance(p, (CA2, CA3)):
            return frozenset((p.team,)) | p.opponents
        if isinstance(p, CA4):
            return p.teams1 | p.teams2
        if isinstance(p, GA1):
            return frozenset(t for g in p.games for t in g)
        return p.teams  # BR2, FA2, SE1

    def slots_involved(self, n_slots: int) -> frozenset[int]:
        p = self.params
        if isinstance(p, (CA3, SE1)):
            return frozenset(range(n_slots))
        return p.slots


@dataclass(frozen=True)
class Instance:
    """A round-robin timetabling problem: team count, phased flag, constraints."""

    id: str
    n_teams: int
    phased: bool
    constraints: tuple[Constraint, ...] = ()
    team_names: tuple[str, ...] | None = None
    slot_names: tuple[str, ...] | None = None

    def __post_init__(self):
        n = self.n_teams
        if n < 2 or n % 2 != 0:
            raise InvalidInstanceError(f"team count must be even and >= 2, got {n}")
        if self.team_names is None:
            object.__setattr__(self, "team_names", tuple(f"Team {t}" for t in range(n)))
        if self.slot_names is None:
            object.__setattr__(
                self, "slot_names", tuple(f"Slot {s}" for s in range(self.n_slots))
            )
        if len(self.team_names) != n or len(self.slot_names) != self.n_slots:
            raise InvalidInstanceError("name list lengths must match team/slot counts")
        for idx, c in enumerate(self.constraints):
            for t in c.teams_involved():
                if not 0 <= t < n:
                    raise InvalidInstanceError(
                        f"constraint {idx} ({c.ctype}) references team {t} "
                        f"out of range 0..{n - 1}"
                    )
            for s in getattr(c.params, "slots", ()):
                if not 0 <= s < self.n_slots:
                    raise InvalidInstanceError(
                        f"constraint {idx} ({c.ctype}) references slot {s} "
                        f"out of range 0..{self.n_slots - 1}"
                    )

    @property
    def n_slots(self) -> int:
        return 2 * self.n_teams - 2

    @property
    def first_phase_end(self) -> int:
        """First slot of the second half; phased pairs meet once before it."""
        return self.n_teams - 1


@dataclass
class Timetable:
    """Assignment of every ordered (home, away) pair to a slot.

    Owned by one worker at a time; use :meth:`copy` before sharing.
    """

    slot_of: dict[tuple[int, int], int] = field(default_factory=dict)

    def copy(self) -> "Timetable":
        return Timetable(dict(self.slot_of))

    def __len__(self) -> int:
        return len(self.slot_of)


def _check_indices(tt: Timetable, inst: Instance) -> None:
    n, n_slots = inst.n_teams, inst.n_slots
    for (h, a), s in tt.slot_of.items():
        if not (0 <= h < n and 0 <= a < n) or h == a:
            raise MalformedTimetableError(f"bad team pair ({h}, {a})")
        if not 0 <= s < n_slots:
            raise MalformedTimetableError(f"pair ({h}, {a}) assigned to bad slot {s}")


def validate_structure(tt: Timetable, inst: Instance) -> list[str]:
    """Check that ``tt`` is a compact double round robin for ``inst``.

    Returns human-readable violation descriptions; empty means valid.
    Compactness and pairing violations come first; for phased instances,
    entries prefixed ``phased:`` report pairs not meeting exactly once in
    the first half. Raises :class:`MalformedTimetableError` on out-of-range
    indices.
    """
    _check_indices(tt, inst)
    n, n_slots = inst.n_teams, inst.n_slots
    violations: list[str] = []

    games_in_slot = [[0] * n_slots for _ in range(n)]
    for (h, a), s in tt.slot_of.items():
        games_in_slot[h][s] += 1
        games_in_slot[a][s] += 1
    for t in range(n):
        for s in range(n_slots):
            if games_in_slot[t][s] != 1:
                violations.append(
                    f"compactness: team {t} plays {games_in_slot[t][s]} games in slot {s}"
                )

    for h in range(n):
        for a in range(n):
            if h != a and (h, a) not in tt.slot_of:
                violations.append(f"pairing: game ({h}, {a}) is not scheduled")
    if len(tt.slot_of) != n * (n - 1):
        violations.append(
            f"pairing: {len(tt.slot_of)} games scheduled, expected {n * (n - 1)}"
        )

    if inst.phased:
        half = inst.first_phase_end
        for i in range(n):
            for j in range(i + 1, n):
                slots = [tt.slot_of.get((i, j)), tt.slot_of.get((j, i))]
                count = sum(1 for s in slots if s is not None and s < half)
                if count != 1 and None not in slots:
                    violations.append(
                        f"phased: pair ({i}, {j}) meets {count} times in the first {half} slots"
                    )
    return violations


def phased_violation_count(tt: Timetable, inst: Instance) -> int:
    """Number of unordered pairs not meeting exactly once in the first half.

    0 for non-phased instances. Assumes a structurally valid timetable.
    """
    if not inst.phased:
        return 0
    half = inst.first_phase_end
    n = inst.n_teams
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            count = (tt.slot_of[(i, j)] < half) + (tt.slot_of[(j, i)] < half)
            total += abs(count - 1)
    return total


@dataclass
class EvaluationReport:
    """Outcome of evaluating a timetable against an instance."""

    hard_violation: int
    objective: int
    per_constraint: tuple[tuple[int, int], ...]
    per_type_hard: dict[str, int]
    feasible: bool
    phased_violations: int = 0

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "hard_violation": self.hard_violation,
            "objective": self.objective,
            "phased_violations": self.phased_violations,
            "per_type_hard": dict(self.per_type_hard),
            "per_constraint": [list(pc) for pc in self.per_constraint],
        }
