"""Random instance/timetable generators shared across test modules.

Timetables come from the canonical schedule followed by random team/slot
relabelings and venue flips, so their validity does not depend on the move
machinery under test.
"""
import random

from rrlab.model import (
    BR1,
    BR2,
    CA1,
    CA2,
    CA3,
    CA4,
    FA2,
    GA1,
    SE1,
    Constraint,
    Hardness,
    Instance,
    Mode,
    Scope,
    Timetable,
)
from rrlab.solver import canonical_schedule

MODES = (Mode.HOME, Mode.AWAY, Mode.ANY)


def rand_subset(rng: random.Random, universe: range, min_size: int = 1) -> frozenset:
    size = rng.randint(min_size, len(universe))
    return frozenset(rng.sample(list(universe), size))


def rand_constraint(rng: random.Random, n: int, n_slots: int) -> Constraint:
    ctype = rng.choice(("CA1", "CA2", "CA3", "CA4", "GA1", "BR1", "BR2", "FA2", "SE1"))
    teams = range(n)
    slots = range(n_slots)
    if ctype == "CA1":
        hi = rng.randint(0, 3)
        params = CA1(
            team=rng.randrange(n),
            slots=rand_subset(rng, slots),
            mode=rng.choice((Mode.HOME, Mode.AWAY)),
            min=rng.randint(0, hi),
            max=hi,
        )
    elif ctype == "CA2":
        hi = rng.randint(0, 3)
        params = CA2(
            team=rng.randrange(n),
            opponents=rand_subset(rng, teams),
            slots=rand_subset(rng, slots),
            mode=rng.choice(MODES),
            min=rng.randint(0, hi),
            max=hi,
        )
    elif ctype == "CA3":
        params = CA3(
            team=rng.randrange(n),
            opponents=rand_subset(rng, teams),
            mode=rng.choice(MODES),
            max=rng.randint(0, 3),
            window=rng.randint(1, n_slots),
        )
    elif ctype == "CA4":
        params = CA4(
            teams1=rand_subset(rng, teams),
            teams2=rand_subset(rng, teams),
            slots=rand_subset(rng, slots),
            mode=rng.choice(MODES),
            scope=rng.choice((Scope.GLOBAL, Scope.PER_SLOT)),
            max=rng.randint(0, 4),
        )
    elif ctype == "GA1":
        pairs = [(h, a) for h in teams for a in teams if h != a]
        games = frozenset(rng.sample(pairs, rng.randint(1, min(4, len(pairs)))))
        hi = rng.randint(0, len(games))
        params = GA1(
            games=games,
            slots=rand_subset(rng, slots),
            min=rng.randint(0, hi),
            max=hi,
        )
    elif ctype == "BR1":
        params = BR1(
            team=rng.randrange(n),
            slots=rand_subset(rng, slots),
            break_mode=rng.choice(MODES),
            max_breaks=rng.randint(0, 4),
        )
    elif ctype == "BR2":
        params = BR2(
            teams=rand_subset(rng, teams, min_size=2),
            slots=rand_subset(rng, slots),
            max_breaks=rng.randint(0, 8),
        )
    elif ctype == "FA2":
        params = FA2(
            teams=rand_subset(rng, teams, min_size=2),
            slots=rand_subset(rng, slots),
            bound=rng.randint(0, 3),
        )
    else:
        params = SE1(
            teams=rand_subset(rng, teams, min_size=2),
            min_separation=rng.randint(0, n_slots),
        )
    hardness = rng.choice((Hardness.HARD, Hardness.SOFT))
    penalty = rng.randint(1, 10) if hardness is Hardness.SOFT else rng.randint(0, 10)
    return Constraint(hardness, penalty, params)


def rand_instance(
    rng: random.Random,
    n: int | None = None,
    n_constraints: int | None = None,
    phased: bool | None = None,
) -> Instance:
    n = n if n is not None else rng.choice((4, 6, 8))
    n_constraints = (
        n_constraints if n_constraints is not None else rng.randint(0, 15)
    )
    phased = phased if phased is not None else rng.random() < 0.5
    constraints = tuple(
        rand_constraint(rng, n, 2 * n - 2) for _ in range(n_constraints)
    )
    return Instance(
        id=f"rand{rng.randrange(10**6)}",
        n_teams=n,
        phased=phased,
        constraints=constraints,
    )


def rand_timetable(rng: random.Random, n: int) -> Timetable:
    base = canonical_schedule(n)
    team_perm = list(range(n))
    rng.shuffle(team_perm)
    slot_perm = list(range(2 * n - 2))
    rng.shuffle(slot_perm)
    slot_of = {
        (team_perm[h], team_perm[a]): slot_perm[s]
        for (h, a), s in base.slot_of.items()
    }
    # flip the venue of a few random pairings
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.3:
                slot_of[(i, j)], slot_of[(j, i)] = slot_of[(j, i)], slot_of[(i, j)]
    return Timetable(slot_of)
