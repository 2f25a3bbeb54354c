"""Seeded random instance generation.

Each kind names a structural predicate; generation draws a uniform random
profile, minimally repairs it toward the predicate when the draw misses,
and verifies the predicate before returning.  The draw sequence is fixed
(rankings first, then polarities, then any repair draws), so a given
``(kind, n, m, seed)`` always yields the same instance.
"""

from __future__ import annotations

import random

from lexalloc.core import (
    Instance,
    PreconditionViolatedError,
    REASON_INFEASIBLE_REQUEST,
)

KINDS = ("goods", "chores", "objective", "subjective", "no_common_chore", "top_good")


def kind_predicate(kind: str, instance: Instance) -> bool:
    """The defining predicate of each generator kind."""
    polarity_sets = instance.goods
    if kind == "goods":
        return all(len(g) == instance.n_items for g in polarity_sets)
    if kind == "chores":
        return all(not g for g in polarity_sets)
    if kind == "objective":
        return all(
            len({o in g for g in polarity_sets}) == 1 for o in instance.items
        )
    if kind == "subjective":
        return any(
            len({o in g for g in polarity_sets}) == 2 for o in instance.items
        )
    if kind == "no_common_chore":
        return all(any(o in g for g in polarity_sets) for o in instance.items)
    if kind == "top_good":
        return any(
            instance.rankings[i][0] in instance.goods[i] for i in instance.agents
        )
    raise ValueError(f"unknown generator kind {kind!r}")


def _check_feasible(kind: str, n: int, m: int) -> None:
    if kind == "top_good" and m < 1:
        raise PreconditionViolatedError(
            REASON_INFEASIBLE_REQUEST, "top_good needs at least one item"
        )
    if kind == "subjective" and (n < 2 or m < 1):
        raise PreconditionViolatedError(
            REASON_INFEASIBLE_REQUEST,
            "subjective needs at least two agents and one item to disagree on",
        )


def generate_instance(kind: str, n: int, m: int, seed: int) -> Instance:
    """A deterministic pseudo-random instance of the requested kind."""
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    if not isinstance(n, int) or n < 1:
        raise PreconditionViolatedError(
            REASON_INFEASIBLE_REQUEST, f"need at least one agent, got {n!r}"
        )
    if not isinstance(m, int) or m < 0:
        raise PreconditionViolatedError(
            REASON_INFEASIBLE_REQUEST, f"item count must be nonnegative, got {m!r}"
        )
    _check_feasible(kind, n, m)

    rng = random.Random(seed)
    rankings = tuple(tuple(rng.sample(range(m), m)) for _ in range(n))

    if kind == "goods":
        goods = [set(range(m)) for _ in range(n)]
    elif kind == "chores":
        goods = [set() for _ in range(n)]
    elif kind == "objective":
        shared = {o for o in range(m) if rng.getrandbits(1)}
        goods = [set(shared) for _ in range(n)]
    else:
        goods = [
            {o for o in range(m) if rng.getrandbits(1)} for _ in range(n)
        ]

    if kind == "subjective":
        if not any(len({o in g for g in goods}) == 2 for o in range(m)):
            o = rng.randrange(m)
            flipper = rng.randrange(n)
            other = (flipper + 1) % n
            if o in goods[other]:
                goods[flipper].discard(o)
            else:
                goods[flipper].add(o)
    elif kind == "no_common_chore":
        for o in range(m):
            if not any(o in g for g in goods):
                goods[rng.randrange(n)].add(o)
    elif kind == "top_good":
        if not any(rankings[i][0] in goods[i] for i in range(n)):
            i = rng.randrange(n)
            goods[i].add(rankings[i][0])

    instance = Instance(
        item_labels=tuple(f"o{o+1}" for o in range(m)),
        rankings=rankings,
        goods=tuple(frozenset(g) for g in goods),
    )
    assert kind_predicate(kind, instance), (kind, n, m, seed)
    return instance
