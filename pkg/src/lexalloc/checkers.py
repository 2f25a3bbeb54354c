"""Fairness and efficiency property checkers.

Every checker takes a complete allocation, returns a :class:`PropertyReport`,
and — on failure — attaches a witness that reproduces the violation when
re-checked. Witnesses are deterministic: pairwise checkers scan ordered
agent pairs by ascending (envied, envious) index and removal candidates in
the envious agent's importance order, so the first reported violation is a
stable artifact of the instance, not of iteration luck.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import total_ordering

from lexalloc.core import (
    Allocation,
    Bundle,
    Comparison,
    IndexOutOfRangeError,
    Instance,
    favorite_item,
    first_difference,
    lex_prefers,
    validate_allocation,
)


class Property(enum.Enum):
    """Checkable allocation properties."""

    EF = "EF"
    EF1 = "EF1"
    EFX = "EFX"
    EFX_G = "EFX-g"
    EFX_C = "EFX-c"
    MMS = "MMS"
    PO = "PO"
    RM = "RM"
    SEQUENCIBLE = "Sequencible"


@dataclass(frozen=True)
class EnvyWitness:
    """A pair whose envy survives the checked removals.

    ``item`` is the blocking item: for plain envy the most important item
    separating the two bundles, for the up-to-one/any checks the removal
    that failed (``removed_from`` says which side it was taken from).
    """

    envious: int
    envied: int
    item: int = None
    removed_from: str = None  # "own" | "envied" | None


@dataclass(frozen=True)
class MmsShortfallWitness:
    agent: int
    share: Bundle


@dataclass(frozen=True)
class DominationWitness:
    dominator: Allocation


@dataclass(frozen=True)
class SignatureWitness:
    actual: "Signature"
    best: "Signature"
    better_allocation: Allocation


@dataclass(frozen=True)
class LeftoverWitness:
    """Items no picking sequence can deliver to their assigned owners."""

    items: tuple


@dataclass(frozen=True)
class PropertyReport:
    property: Property
    holds: bool
    witness: object = None
    detail: str = ""
    sequence: tuple = None  # realizing picking sequence, sequencibility only

    def __post_init__(self) -> None:
        assert self.holds or self.witness is not None


@total_ordering
@dataclass(frozen=True)
class Signature:
    """Rank profile of an allocation: ``good_counts[k-1]`` agents hold their
    k-th most important good, ``chore_counts[k-1]`` agents hold their k-th
    *best* (k-th least important) chore. Ordered lexicographically on the
    concatenation, goods levels first."""

    good_counts: tuple
    chore_counts: tuple

    def _key(self) -> tuple:
        return self.good_counts + self.chore_counts

    def __lt__(self, other: "Signature") -> bool:
        return self._key() < other._key()


# ---------------------------------------------------------------------------
# Envy-style checkers
# ---------------------------------------------------------------------------


def _envies(instance: Instance, agent: int, own: Bundle, other: Bundle) -> bool:
    return lex_prefers(instance, agent, other, own) is Comparison.STRICTLY_PREFERS


def _envy_pairs(instance: Instance, allocation: Allocation):
    """Ordered pairs (envious, envied) with strict envy, scanned by
    ascending envied index then ascending envious index."""
    for envied in instance.agents:
        for envious in instance.agents:
            if envious == envied:
                continue
            if _envies(instance, envious, allocation[envious], allocation[envied]):
                yield envious, envied


def _removal_candidates(
    instance: Instance, allocation: Allocation, envious: int, envied: int, sides: str
):
    """Removable items for the pair, in the envious agent's importance
    order: its chores in its own bundle and/or its goods in the envied
    bundle, per ``sides`` ("own", "envied", or "both")."""
    own = allocation[envious]
    other = allocation[envied]
    goods = instance.goods[envious]
    for o in instance.rankings[envious]:
        if sides in ("own", "both") and o in own and o not in goods:
            yield o, "own"
        if sides in ("envied", "both") and o in other and o in goods:
            yield o, "envied"


def _envy_survives_removal(
    instance: Instance, allocation: Allocation, envious: int, envied: int, item: int, side: str
) -> bool:
    own = allocation[envious]
    other = allocation[envied]
    if side == "own":
        own = own - {item}
    else:
        other = other - {item}
    return _envies(instance, envious, own, other)


def check_ef(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Envy-freeness: no agent strictly prefers another agent's bundle."""
    validate_allocation(instance, allocation)
    for envious, envied in _envy_pairs(instance, allocation):
        blocking = first_difference(instance, envious, allocation[envious], allocation[envied])
        return PropertyReport(
            Property.EF,
            holds=False,
            witness=EnvyWitness(envious, envied, blocking),
            detail=(
                f"agent {envious + 1} envies agent {envied + 1} "
                f"(decided by {instance.item_labels[blocking]})"
            ),
        )
    return PropertyReport(Property.EF, holds=True, detail="no agent envies another")


def _check_up_to_removals(
    instance: Instance,
    allocation: Allocation,
    prop: Property,
    sides: str,
    require_all: bool,
) -> PropertyReport:
    """Shared engine for the up-to-one and up-to-any family.

    ``require_all`` False: some removal must cure the envy (up to one item);
    True: every removal must cure it (up to any item). Pairs without envy
    always pass. An envious pair with no removable item fails the
    ``require_all=False`` check outright (nothing can cure it) and passes
    the one-sided up-to-any variants (their removal condition is vacuous).
    """
    validate_allocation(instance, allocation)
    for envious, envied in _envy_pairs(instance, allocation):
        candidates = list(_removal_candidates(instance, allocation, envious, envied, sides))
        if require_all:
            for item, side in candidates:
                if _envy_survives_removal(instance, allocation, envious, envied, item, side):
                    where = "its own" if side == "own" else "the envied"
                    return PropertyReport(
                        prop,
                        holds=False,
                        witness=EnvyWitness(envious, envied, item, side),
                        detail=(
                            f"agent {envious + 1} still envies agent {envied + 1} after "
                            f"removing {instance.item_labels[item]} from {where} bundle"
                        ),
                    )
        else:
            if not any(
                not _envy_survives_removal(instance, allocation, envious, envied, item, side)
                for item, side in candidates
            ):
                blocking = first_difference(
                    instance, envious, allocation[envious], allocation[envied]
                )
                return PropertyReport(
                    prop,
                    holds=False,
                    witness=EnvyWitness(envious, envied, blocking),
                    detail=(
                        f"no single removal cures agent {envious + 1}'s envy "
                        f"of agent {envied + 1}"
                    ),
                )
    return PropertyReport(prop, holds=True, detail="every envy is curable as required")


def check_ef1(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Envy-freeness up to one item: for every envious pair, removing some
    single item — a chore from the envious agent's bundle or one of its
    goods from the envied bundle — eliminates the envy."""
    return _check_up_to_removals(instance, allocation, Property.EF1, "both", require_all=False)


def check_efx(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Envy-freeness up to any item: every such single removal eliminates
    the envy."""
    report = _check_up_to_removals(instance, allocation, Property.EFX, "both", require_all=True)
    if not report.holds:
        return report
    # An envious pair with nothing removable is incurable; unreachable in
    # theory (such a pair cannot be envious) but checked for safety.
    for envious, envied in _envy_pairs(instance, allocation):
        if not list(_removal_candidates(instance, allocation, envious, envied, "both")):
            blocking = first_difference(instance, envious, allocation[envious], allocation[envied])
            return PropertyReport(
                Property.EFX,
                holds=False,
                witness=EnvyWitness(envious, envied, blocking),
                detail=f"agent {envious + 1} envies agent {envied + 1} with nothing to remove",
            )
    return report


def check_efx_g(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Up-to-any restricted to goods removed from the envied bundle."""
    return _check_up_to_removals(instance, allocation, Property.EFX_G, "envied", require_all=True)


def check_efx_c(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Up-to-any restricted to chores removed from the envious agent's own
    bundle."""
    return _check_up_to_removals(instance, allocation, Property.EFX_C, "own", require_all=True)


# ---------------------------------------------------------------------------
# Maximin share
# ---------------------------------------------------------------------------


def mms_share(instance: Instance, agent: int) -> Bundle:
    """The agent's maximin share: the best bundle it can guarantee itself as
    the worst bundle of an n-way split of all items.

    Closed form for n >= 2: if the top-ranked item is a good, the share is
    all its goods minus the n-1 most important ones (empty when it has fewer
    than n goods); if the top-ranked item is a chore, the share is its worst
    chore together with all its goods. A single agent's share is the whole
    item set (the only 1-partition).
    """
    if agent not in instance.agents:
        raise IndexOutOfRangeError(f"agent {agent} out of range")
    n = instance.n_agents
    if n == 1:
        return frozenset(instance.items)
    goods = instance.goods[agent]
    top = instance.rankings[agent][0]
    if top in goods:
        if len(goods) >= n:
            return frozenset(instance.goods_by_importance[agent][n - 1 :])
        return frozenset()
    return frozenset({top}) | goods


def check_mms(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Every agent weakly prefers its bundle to its maximin share."""
    validate_allocation(instance, allocation)
    for agent in instance.agents:
        share = mms_share(instance, agent)
        if lex_prefers(instance, agent, allocation[agent], share) is Comparison.STRICTLY_DISPREFERRED:
            labels = sorted(instance.item_labels[o] for o in share)
            return PropertyReport(
                Property.MMS,
                holds=False,
                witness=MmsShortfallWitness(agent, share),
                detail=f"agent {agent + 1} falls below its share {{{', '.join(labels)}}}",
            )
    return PropertyReport(Property.MMS, holds=True, detail="all agents reach their shares")


# ---------------------------------------------------------------------------
# Rank signatures
# ---------------------------------------------------------------------------


def signature_of(instance: Instance, allocation: Allocation) -> Signature:
    """Count, per level, how many agents hold their level-k good and their
    level-k (k-th best) chore."""
    validate_allocation(instance, allocation)
    m = instance.n_items
    counts = [0] * (2 * m)
    for agent, bundle in enumerate(allocation):
        digits = instance.level_digits[agent]
        for o in bundle:
            counts[digits[o]] += 1
    return Signature(good_counts=tuple(counts[:m]), chore_counts=tuple(counts[m:]))


def check_rm(instance: Instance, allocation: Allocation, budget=None) -> PropertyReport:
    """Rank-maximality: the allocation's signature is the lexicographic
    maximum over all complete allocations."""
    from lexalloc import oracle

    actual = signature_of(instance, allocation)
    best, best_allocation = oracle.best_signature(instance, budget=budget)
    if actual == best:
        return PropertyReport(Property.RM, holds=True, detail="signature is maximal")
    return PropertyReport(
        Property.RM,
        holds=False,
        witness=SignatureWitness(actual, best, best_allocation),
        detail=f"signature {actual._key()} is beaten by {best._key()}",
    )


# ---------------------------------------------------------------------------
# Sequencibility
# ---------------------------------------------------------------------------


def check_sequencible(instance: Instance, allocation: Allocation) -> PropertyReport:
    """Is the allocation the outcome of some picking sequence?

    Greedy reconstruction: repeatedly let the lowest-indexed agent whose
    favorite still-available item lies in its own bundle pick it. Picks
    commute — an agent able to pick stays able, with the same favorite,
    after any other agent picks (bundles are disjoint, so the other pick
    cannot be this agent's top remaining good or bottom remaining chore) —
    so the greedy order succeeds whenever any order does.
    """
    validate_allocation(instance, allocation)
    available = set(instance.items)
    sequence = []
    while available:
        for agent in instance.agents:
            fav = favorite_item(instance, agent, available)
            if fav in allocation[agent]:
                sequence.append(agent)
                available.remove(fav)
                break
        else:
            leftover = tuple(sorted(available))
            labels = ", ".join(instance.item_labels[o] for o in leftover)
            return PropertyReport(
                Property.SEQUENCIBLE,
                holds=False,
                witness=LeftoverWitness(leftover),
                detail=f"no agent can pick next; stuck with {labels}",
            )
    return PropertyReport(
        Property.SEQUENCIBLE,
        holds=True,
        detail="realized by a picking sequence",
        sequence=tuple(sequence),
    )


#: Checkers that need no search budget, keyed by property.  Pareto
#: optimality and rank-maximality are deliberately absent: both compare
#: against exhaustive search (``oracle.check_po_exhaustive``,
#: :func:`check_rm`) and take a budget.
CHECKERS = {
    Property.EF: check_ef,
    Property.EF1: check_ef1,
    Property.EFX: check_efx,
    Property.EFX_G: check_efx_g,
    Property.EFX_C: check_efx_c,
    Property.MMS: check_mms,
    Property.SEQUENCIBLE: check_sequencible,
}
