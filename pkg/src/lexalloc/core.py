"""Shared model types for lexicographic allocation of goods and chores.

An instance has ``n`` agents and ``m`` items. Every agent ranks all items by
importance (most important first) and tags each item as a good (wants it) or
a chore (wants to avoid it); the tag may differ between agents. Bundles are
compared lexicographically: the most important item held by exactly one of
the two bundles decides the comparison — holding it wins when the agent sees
a good, not holding it wins when the agent sees a chore.

Conventions used across the package:

- agents and items are 0-based integers inside the library; string labels and
  1-based positions appear only in files and CLI flags,
- a bundle is a ``frozenset`` of item indices,
- an allocation is a tuple of ``n`` pairwise-disjoint bundles, *complete*
  when every item is assigned,
- importance ranks are 1-based: rank 1 is the most important item.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Bundle = frozenset
Allocation = tuple

# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class LexAllocError(Exception):
    """Base class for all package-specific errors."""


class InvalidInstanceError(LexAllocError):
    """The described instance is structurally inconsistent."""


class InvalidItemError(LexAllocError):
    """An item index or label does not belong to the instance."""


class IndexOutOfRangeError(LexAllocError):
    """A rank, position, or agent index is outside its valid range."""


class IncompleteAllocationError(LexAllocError):
    """A complete allocation was required but some items are unassigned."""


class PreconditionViolatedError(LexAllocError):
    """An algorithm's structural precondition does not hold.

    ``reason`` is one of the ``REASON_*`` constants below, so callers can
    map distinct preconditions to distinct diagnostics.
    """

    def __init__(self, reason: str, message: str) -> None:
        super().__init__(message)
        self.reason = reason


REASON_TOP_GOOD_MISSING = "top-good-missing"
REASON_COMMON_CHORE_EXISTS = "common-chore-exists"
REASON_NOT_CHORES_ONLY = "not-chores-only"
REASON_NOT_OBJECTIVE = "not-objective"
REASON_INFEASIBLE_REQUEST = "infeasible-request"


class BudgetExceededError(LexAllocError):
    """An exhaustive search ran past its allocation or time budget."""


class InvalidFormulaError(LexAllocError):
    """A CNF formula is malformed."""


class Not223FormulaError(InvalidFormulaError):
    """A CNF formula is not in the exactly-3-literals, two-positive/
    two-negative-occurrences-per-variable class."""


class InvalidHypergraphError(LexAllocError):
    """A hypergraph description is malformed."""


class InvalidWitnessError(LexAllocError):
    """An allocation offered as a witness fails its target properties, or
    decodes to an invalid source-side witness."""


class ParseError(LexAllocError):
    """An input document could not be parsed."""


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class Polarity(enum.Enum):
    """How one agent perceives one item."""

    GOOD = "good"
    CHORE = "chore"


class Comparison(enum.Enum):
    """Outcome of a lexicographic bundle comparison."""

    STRICTLY_PREFERS = "StrictlyPrefers"
    EQUAL = "Equal"
    STRICTLY_DISPREFERRED = "StrictlyDispreferred"


def _coerce_polarity(value: object) -> Polarity:
    if isinstance(value, Polarity):
        return value
    if value in ("good", "+"):
        return Polarity.GOOD
    if value in ("chore", "-"):
        return Polarity.CHORE
    raise InvalidInstanceError(f"unknown polarity {value!r}")


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A fixed population of agents with complete importance rankings.

    Attributes:
        item_labels: display labels; position in this tuple is the item index.
        rankings: per agent, all item indices ordered most important first.
        goods: per agent, the set of items that agent perceives as goods
            (every other item is a chore for that agent).
    """

    item_labels: tuple
    rankings: tuple
    goods: tuple

    def __post_init__(self) -> None:
        m = len(self.item_labels)
        if len(self.rankings) == 0:
            raise InvalidInstanceError("an instance needs at least one agent")
        if len(set(self.item_labels)) != m:
            raise InvalidInstanceError("item labels must be unique")
        if any(not isinstance(lab, str) or not lab for lab in self.item_labels):
            raise InvalidInstanceError("item labels must be non-empty strings")
        if len(self.goods) != len(self.rankings):
            raise InvalidInstanceError("rankings and goods must cover the same agents")
        full = frozenset(range(m))
        for ranking in self.rankings:
            if len(ranking) != m or set(ranking) != set(range(m)):
                raise InvalidInstanceError("each ranking must order all items exactly once")
        for good_set in self.goods:
            if not good_set <= full:
                raise InvalidInstanceError("good sets may only contain instance items")

    @property
    def n_agents(self) -> int:
        return len(self.rankings)

    @property
    def n_items(self) -> int:
        return len(self.item_labels)

    @property
    def agents(self) -> range:
        return range(self.n_agents)

    @property
    def items(self) -> range:
        return range(self.n_items)

    @cached_property
    def ranks(self) -> tuple:
        """``ranks[agent][item]`` is the 1-based importance rank."""
        table = []
        for ranking in self.rankings:
            row = [0] * self.n_items
            for position, item in enumerate(ranking):
                row[item] = position + 1
            table.append(tuple(row))
        return tuple(table)

    @cached_property
    def chores(self) -> tuple:
        """Per agent, the complement of its good set."""
        full = frozenset(self.items)
        return tuple(full - good_set for good_set in self.goods)

    @cached_property
    def goods_by_importance(self) -> tuple:
        """Per agent, its goods ordered most important first."""
        return tuple(
            tuple(o for o in ranking if o in self.goods[i])
            for i, ranking in enumerate(self.rankings)
        )

    @cached_property
    def chores_by_importance(self) -> tuple:
        """Per agent, its chores ordered most important (worst) first."""
        return tuple(
            tuple(o for o in ranking if o not in self.goods[i])
            for i, ranking in enumerate(self.rankings)
        )

    @cached_property
    def level_digits(self) -> tuple:
        """``level_digits[agent][item]``: position of the (agent, item) pair
        in the concatenated signature vector, in ``0 .. 2m-1``.

        A good at good-importance position j (0-based) sits at digit j, i.e.
        signature level j+1 of the good counts. A chore that is the agent's
        k-th *best* chore (k-th from the bottom of its importance order)
        sits at digit m + k - 1.
        """
        m = self.n_items
        table = []
        for i in self.agents:
            row = [0] * m
            for j, o in enumerate(self.goods_by_importance[i]):
                row[o] = j
            t = len(self.chores_by_importance[i])
            for j, o in enumerate(self.chores_by_importance[i]):
                row[o] = m + (t - 1 - j)
            table.append(tuple(row))
        return tuple(table)

    def is_good(self, agent: int, item: int) -> bool:
        return item in self.goods[agent]

    def is_chores_only(self) -> bool:
        return all(not good_set for good_set in self.goods)

    def is_goods_only(self) -> bool:
        return all(len(good_set) == self.n_items for good_set in self.goods)

    def is_objective(self) -> bool:
        """True when every item has the same polarity for all agents."""
        return all(
            all(
                (o in self.goods[i]) == (o in self.goods[0])
                for i in self.agents
            )
            for o in self.items
        )

    def label_index(self, label: str) -> int:
        try:
            return self.item_labels.index(label)
        except ValueError:
            raise InvalidItemError(f"unknown item label {label!r}") from None


def make_instance(rows: Sequence, items: Sequence = None) -> Instance:
    """Build an instance from per-agent ``(label, polarity)`` rows.

    Each row lists one agent's items most important first; polarity is a
    :class:`Polarity` or one of ``"good"``/``"+"``/``"chore"``/``"-"``. When
    ``items`` is omitted the item order (and hence indexing) follows the
    first agent's row.
    """
    if not rows:
        raise InvalidInstanceError("an instance needs at least one agent")
    if items is None:
        items = [label for label, _ in rows[0]]
    item_labels = tuple(items)
    index = {label: i for i, label in enumerate(item_labels)}
    if len(index) != len(item_labels):
        raise InvalidInstanceError("item labels must be unique")
    rankings = []
    goods = []
    for row in rows:
        ranking = []
        good_set = set()
        for label, polarity in row:
            if label not in index:
                raise InvalidInstanceError(f"agent ranks unknown item {label!r}")
            o = index[label]
            ranking.append(o)
            if _coerce_polarity(polarity) is Polarity.GOOD:
                good_set.add(o)
        if len(ranking) != len(item_labels) or len(set(ranking)) != len(ranking):
            raise InvalidInstanceError("each agent must rank every item exactly once")
        rankings.append(tuple(ranking))
        goods.append(frozenset(good_set))
    return Instance(item_labels=item_labels, rankings=tuple(rankings), goods=tuple(goods))


def restrict(instance: Instance, agents: Iterable, items: Iterable) -> tuple:
    """Restrict an instance to a subset of agents and items.

    Returns ``(sub, kept_agents, kept_items)`` where position in the kept
    tuples gives the new 0-based index of each original agent and item.
    Relative importance order and polarities are preserved.
    """
    kept_agents = tuple(agents)
    kept_items = tuple(items)
    if len(set(kept_agents)) != len(kept_agents) or len(set(kept_items)) != len(kept_items):
        raise InvalidInstanceError("restriction requires distinct agents and items")
    for a in kept_agents:
        if a not in instance.agents:
            raise IndexOutOfRangeError(f"agent {a} out of range")
    for o in kept_items:
        if o not in instance.items:
            raise InvalidItemError(f"item {o} out of range")
    item_map = {o: new for new, o in enumerate(kept_items)}
    keep = set(kept_items)
    sub = Instance(
        item_labels=tuple(instance.item_labels[o] for o in kept_items),
        rankings=tuple(
            tuple(item_map[o] for o in instance.rankings[a] if o in keep)
            for a in kept_agents
        ),
        goods=tuple(
            frozenset(item_map[o] for o in instance.goods[a] if o in keep)
            for a in kept_agents
        ),
    )
    return sub, kept_agents, kept_items


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def _check_agent(instance: Instance, agent: int) -> None:
    if agent not in instance.agents:
        raise IndexOutOfRangeError(f"agent {agent} out of range")


def _check_item(instance: Instance, item: int) -> None:
    if item not in instance.items:
        raise InvalidItemError(f"item {item} out of range")


def is_complete(instance: Instance, allocation: Allocation) -> bool:
    return sum(len(b) for b in allocation) == instance.n_items


def validate_allocation(
    instance: Instance, allocation: Allocation, *, require_complete: bool = True
) -> None:
    """Check structural validity: one bundle per agent, disjoint bundles of
    instance items, and (optionally) every item assigned."""
    if len(allocation) != instance.n_agents:
        raise InvalidInstanceError(
            f"allocation has {len(allocation)} bundles for {instance.n_agents} agents"
        )
    seen = set()
    for bundle in allocation:
        for o in bundle:
            _check_item(instance, o)
            if o in seen:
                raise InvalidInstanceError(f"item {o} assigned more than once")
            seen.add(o)
    if require_complete and len(seen) != instance.n_items:
        missing = sorted(set(instance.items) - seen)
        labels = ", ".join(instance.item_labels[o] for o in missing)
        raise IncompleteAllocationError(f"unassigned items: {labels}")


# ---------------------------------------------------------------------------
# Rank and comparison primitives
# ---------------------------------------------------------------------------


def rank_of(instance: Instance, agent: int, item: int) -> int:
    """1-based importance rank of ``item`` for ``agent`` (1 = most important)."""
    _check_agent(instance, agent)
    _check_item(instance, item)
    return instance.ranks[agent][item]


def rank_within(instance: Instance, agent: int, k: int, subset: Iterable) -> int:
    """The item at 1-based importance position ``k`` among ``subset``.

    Raises :class:`IndexOutOfRangeError` when ``k`` is outside
    ``1 .. |subset|``.
    """
    _check_agent(instance, agent)
    members = set(subset)
    for o in members:
        _check_item(instance, o)
    if k < 1 or k > len(members):
        raise IndexOutOfRangeError(f"position {k} outside 1..{len(members)}")
    count = 0
    for o in instance.rankings[agent]:
        if o in members:
            count += 1
            if count == k:
                return o
    raise IndexOutOfRangeError(f"position {k} outside 1..{len(members)}")


def first_difference(instance: Instance, agent: int, bundle_x, bundle_y):
    """The most important item (for ``agent``) held by exactly one of the two
    bundles, or None when the bundles are equal."""
    _check_agent(instance, agent)
    for bundle in (bundle_x, bundle_y):
        for o in bundle:
            _check_item(instance, o)
    x = frozenset(bundle_x)
    y = frozenset(bundle_y)
    for o in instance.rankings[agent]:
        if (o in x) != (o in y):
            return o
    return None


def lex_prefers(instance: Instance, agent: int, bundle_x, bundle_y) -> Comparison:
    """Compare two bundles through ``agent``'s eyes.

    The most important item in exactly one bundle decides: if the agent sees
    a good, the bundle holding it wins; if a chore, the bundle *not* holding
    it wins. Equal bundles compare ``EQUAL``.
    """
    o = first_difference(instance, agent, bundle_x, bundle_y)
    if o is None:
        return Comparison.EQUAL
    x_holds = o in frozenset(bundle_x)
    if x_holds == (o in instance.goods[agent]):
        return Comparison.STRICTLY_PREFERS
    return Comparison.STRICTLY_DISPREFERRED


def weakly_prefers(instance: Instance, agent: int, bundle_x, bundle_y) -> bool:
    return lex_prefers(instance, agent, bundle_x, bundle_y) is not Comparison.STRICTLY_DISPREFERRED


def favorite_item(instance: Instance, agent: int, available: Iterable) -> int:
    """``agent``'s favorite item among ``available``: its most important
    available good if it has one, otherwise its least important available
    chore."""
    _check_agent(instance, agent)
    pool = set(available)
    if not pool:
        raise IndexOutOfRangeError("no items available")
    for o in pool:
        _check_item(instance, o)
    best_chore = None
    for o in instance.rankings[agent]:
        if o in pool:
            if o in instance.goods[agent]:
                return o
            best_chore = o
    assert best_chore is not None
    return best_chore


def run_picking_sequence(instance: Instance, sequence: Sequence) -> Allocation:
    """Let agents pick in turn: each named agent takes its favorite item
    still available (top remaining good, else bottom remaining chore).

    The sequence may be shorter than the item count, in which case the
    returned allocation is partial; it may not be longer.
    """
    if len(sequence) > instance.n_items:
        raise IndexOutOfRangeError(
            f"sequence of {len(sequence)} turns exceeds {instance.n_items} items"
        )
    for agent in sequence:
        _check_agent(instance, agent)
    available = set(instance.items)
    bundles = [set() for _ in instance.agents]
    for agent in sequence:
        o = favorite_item(instance, agent, available)
        bundles[agent].add(o)
        available.remove(o)
    return tuple(frozenset(b) for b in bundles)
