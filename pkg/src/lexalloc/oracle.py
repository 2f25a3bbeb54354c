"""Exhaustive ground-truth engines.

Everything here decides questions by complete search over labeled
allocations, guarded by an explicit budget. Enumeration order is fixed —
mixed-radix codes with item 0 as the fastest digit, ascending — so returned
witnesses are deterministic. The Pareto dominance scan is the one deliberate
exception: it walks codes in descending order, which makes the reported
dominator for the bundled demo fixtures the give-everything-to-one-agent
allocation rather than an arbitrary swap.

Two scans use integer shortcuts that tests certify against the public
checkers: bundle values as signed power-of-two sums (equivalent to the
lexicographic comparison) and signatures encoded in base n+1 (digit sums
never exceed n, so no carrying; lexicographic signature order becomes
integer order).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from lexalloc import checkers
from lexalloc.core import (
    Allocation,
    BudgetExceededError,
    Bundle,
    Instance,
    PreconditionViolatedError,
    REASON_NOT_CHORES_ONLY,
    validate_allocation,
)
from lexalloc.checkers import Property, PropertyReport, DominationWitness, Signature

_INF = float("inf")


@dataclass(frozen=True)
class SearchBudget:
    """Caps for exhaustive searches: total allocations (or search nodes)
    visited and wall-clock seconds."""

    max_allocations: int = 2_000_000
    max_seconds: float = 60.0


DEFAULT_BUDGET = SearchBudget()


class _Meter:
    """Budget bookkeeping shared by all scans."""

    __slots__ = ("budget", "count", "started")

    def __init__(self, budget: SearchBudget) -> None:
        self.budget = budget if budget is not None else DEFAULT_BUDGET
        self.count = 0
        self.started = time.monotonic()

    def tick(self, what: str) -> None:
        self.count += 1
        if self.count > self.budget.max_allocations:
            raise BudgetExceededError(
                f"{what}: visited more than {self.budget.max_allocations} allocations"
            )
        if self.count % 4096 == 0 and time.monotonic() - self.started > self.budget.max_seconds:
            raise BudgetExceededError(
                f"{what}: exceeded {self.budget.max_seconds} seconds"
            )


@dataclass
class Certificate:
    """Outcome of sweeping every complete allocation of an instance.

    ``failure_histogram`` maps a property name to how many allocations fail
    it first (properties tested in the order given); ``satisfying`` counts
    allocations passing all of them.
    """

    checked: int
    satisfying: int
    failure_histogram: dict
    first_satisfying: Allocation = None


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _allocation_from_digits(instance: Instance, digits, n_agents: int) -> Allocation:
    bundles = [set() for _ in range(n_agents)]
    for item, digit in enumerate(digits):
        if digit < n_agents:
            bundles[digit].add(item)
    return tuple(frozenset(b) for b in bundles)


def enumerate_allocations(instance: Instance, complete_only: bool = True, budget=None):
    """Yield every labeled allocation in ascending mixed-radix order (item 0
    is the fastest digit; the digit is the receiving agent). With
    ``complete_only=False`` an extra digit value marks an item unassigned,
    yielding every partial allocation as well."""
    meter = _Meter(budget)
    n = instance.n_agents
    base = n if complete_only else n + 1
    m = instance.n_items
    digits = [0] * m
    while True:
        meter.tick("enumerate_allocations")
        yield _allocation_from_digits(instance, digits, n)
        k = 0
        while k < m and digits[k] == base - 1:
            digits[k] = 0
            k += 1
        if k == m:
            return
        digits[k] += 1


# ---------------------------------------------------------------------------
# Pareto optimality by exhaustive dominance scan
# ---------------------------------------------------------------------------


def _signed_weights(instance: Instance):
    """``w[i][o]`` = +/- 2^(m - rank): positive for goods. Bundle sums order
    bundles exactly as the lexicographic comparison does."""
    m = instance.n_items
    table = []
    for i in instance.agents:
        row = []
        for o in instance.items:
            weight = 1 << (m - instance.ranks[i][o])
            row.append(weight if o in instance.goods[i] else -weight)
        table.append(row)
    return table


def check_po_exhaustive(instance: Instance, allocation: Allocation, budget=None) -> PropertyReport:
    """Pareto optimality by scanning every complete allocation for a
    dominator: one that every agent weakly prefers and at least one agent
    strictly prefers (with strict lexicographic preferences, any different
    weakly-preferred-by-all allocation qualifies).

    The scan runs in descending code order, so the first dominator found
    for the demo fixtures is the one handing everything to single agent.
    """
    validate_allocation(instance, allocation)
    meter = _Meter(budget)
    n, m = instance.n_agents, instance.n_items
    w = _signed_weights(instance)
    targets = [sum(w[i][o] for o in allocation[i]) for i in instance.agents]

    # Descending order: digit d at an item means agent n-1-d holds it, and
    # the odometer runs ascending over digits.
    holder_of_digit = [n - 1 - d for d in range(n)]
    own_digit = [0] * m
    for agent, bundle in enumerate(allocation):
        for o in bundle:
            own_digit[o] = n - 1 - agent

    digits = [0] * m
    cur = [0] * n
    for o in range(m):
        cur[n - 1] += w[n - 1][o]
    ok = [cur[i] >= targets[i] for i in range(n)]
    num_ok = sum(ok)
    num_match = sum(1 for o in range(m) if own_digit[o] == 0)

    def apply(item: int, old_digit: int, new_digit: int) -> None:
        nonlocal num_ok, num_match
        for digit, sign in ((old_digit, -1), (new_digit, +1)):
            agent = holder_of_digit[digit]
            cur[agent] += sign * w[agent][item]
            now = cur[agent] >= targets[agent]
            if now != ok[agent]:
                ok[agent] = now
                num_ok += 1 if now else -1
        if old_digit == own_digit[item]:
            num_match -= 1
        if new_digit == own_digit[item]:
            num_match += 1

    while True:
        meter.tick("check_po_exhaustive")
        if num_ok == n and num_match < m:
            bundles = [set() for _ in range(n)]
            for o in range(m):
                bundles[holder_of_digit[digits[o]]].add(o)
            dominator = tuple(frozenset(b) for b in bundles)
            improvers = [
                i + 1 for i in instance.agents if dominator[i] != allocation[i]
            ]
            return PropertyReport(
                Property.PO,
                holds=False,
                witness=DominationWitness(dominator),
                detail=f"dominated; agents {improvers} strictly improve",
            )
        k = 0
        while k < m and digits[k] == n - 1:
            apply(k, n - 1, 0)
            digits[k] = 0
            k += 1
        if k == m:
            break
        apply(k, digits[k], digits[k] + 1)
        digits[k] += 1

    return PropertyReport(Property.PO, holds=True, detail="no allocation dominates")


# ---------------------------------------------------------------------------
# Rank signatures
# ---------------------------------------------------------------------------


def _signature_weights(instance: Instance):
    """``W[i][o]`` = (n+1)^(2m-1-digit) for the signature level the item
    occupies when agent i holds it. Per-level counts never exceed n, so
    sums of these weights order allocations exactly as signatures do."""
    n, m = instance.n_agents, instance.n_items
    table = []
    for i in instance.agents:
        row = []
        for o in instance.items:
            row.append((n + 1) ** (2 * m - 1 - instance.level_digits[i][o]))
        table.append(row)
    return table


def best_signature(instance: Instance, budget=None):
    """The lexicographically largest signature over all complete
    allocations, with the first allocation (in enumeration order) that
    attains it. Exhaustive by design: this is the ground truth that the
    rank-maximality checker builds on."""
    meter = _Meter(budget)
    n, m = instance.n_agents, instance.n_items
    if m == 0:
        empty = tuple(frozenset() for _ in instance.agents)
        return checkers.signature_of(instance, empty), empty
    W = _signature_weights(instance)

    digits = [0] * m
    enc = sum(W[0][o] for o in range(m))
    best_enc = enc
    best_code = 0
    code = 0
    while True:
        meter.tick("best_signature")
        k = 0
        while k < m and digits[k] == n - 1:
            enc += W[0][k] - W[n - 1][k]
            digits[k] = 0
            k += 1
        if k == m:
            break
        enc += W[digits[k] + 1][k] - W[digits[k]][k]
        digits[k] += 1
        code += 1
        if enc > best_enc:
            best_enc = enc
            best_code = code

    witness_digits = []
    c = best_code
    for _ in range(m):
        witness_digits.append(c % n)
        c //= n
    witness = _allocation_from_digits(instance, witness_digits, n)
    return checkers.signature_of(instance, witness), witness


def rank_maximal_levels(instance: Instance):
    """Per item, its minimum achievable signature digit and the agents that
    achieve it. An allocation is rank-maximal exactly when every item goes
    to one of its minimizing agents: moving any item to a smaller digit
    raises an earlier signature entry, and item contributions are
    independent, so the optimum is separable per item."""
    choices = []
    for o in instance.items:
        lowest = min(instance.level_digits[i][o] for i in instance.agents)
        agents = tuple(i for i in instance.agents if instance.level_digits[i][o] == lowest)
        choices.append((lowest, agents))
    return choices


# ---------------------------------------------------------------------------
# Existence queries
# ---------------------------------------------------------------------------


def _checker_for(prop: Property, budget):
    if prop is Property.EF:
        return checkers.check_ef
    if prop is Property.EF1:
        return checkers.check_ef1
    if prop is Property.EFX:
        return checkers.check_efx
    if prop is Property.EFX_G:
        return checkers.check_efx_g
    if prop is Property.EFX_C:
        return checkers.check_efx_c
    if prop is Property.MMS:
        return checkers.check_mms
    if prop is Property.SEQUENCIBLE:
        return checkers.check_sequencible
    if prop is Property.PO:
        return lambda inst, alloc: check_po_exhaustive(inst, alloc, budget=budget)
    if prop is Property.RM:
        return lambda inst, alloc: checkers.check_rm(inst, alloc, budget=budget)
    raise ValueError(f"no checker for {prop}")


def _canonical_properties(properties):
    order = list(Property)
    props = set(properties)
    return [p for p in order if p in props]


def decide_exists(instance: Instance, properties, budget=None) -> Allocation:
    """The first complete allocation (in enumeration order) satisfying all
    requested properties, or None.

    When rank-maximality is requested the scan visits only rank-maximal
    candidates — the per-item minimizing-agent product from
    :func:`rank_maximal_levels`, iterated in ascending code order so the
    returned witness is still the first satisfying allocation overall.
    """
    props = _canonical_properties(properties)
    others = [p for p in props if p is not Property.RM]
    checks = [(p, _checker_for(p, budget)) for p in others]

    if Property.RM in props:
        meter = _Meter(budget)
        n, m = instance.n_agents, instance.n_items
        options = [agents for _, agents in rank_maximal_levels(instance)]
        index = [0] * m
        while True:
            meter.tick("decide_exists")
            allocation = _allocation_from_digits(
                instance, [options[o][index[o]] for o in range(m)], n
            )
            if all(fn(instance, allocation).holds for _, fn in checks):
                return allocation
            k = 0
            while k < m and index[k] == len(options[k]) - 1:
                index[k] = 0
                k += 1
            if k == m:
                return None
            index[k] += 1

    for allocation in enumerate_allocations(instance, budget=budget):
        if all(fn(instance, allocation).holds for _, fn in checks):
            return allocation
    return None


def verify_counterexample(instance: Instance, properties, budget=None) -> Certificate:
    """Sweep every complete allocation, recording how many satisfy all the
    properties and, for the rest, which property fails first."""
    props = _canonical_properties(properties)
    checks = [(p, _checker_for(p, budget)) for p in props]
    histogram = {p.value: 0 for p in props}
    checked = 0
    satisfying = 0
    first = None
    for allocation in enumerate_allocations(instance, budget=budget):
        checked += 1
        for prop, fn in checks:
            if not fn(instance, allocation).holds:
                histogram[prop.value] += 1
                break
        else:
            satisfying += 1
            if first is None:
                first = allocation
    return Certificate(
        checked=checked,
        satisfying=satisfying,
        failure_histogram=histogram,
        first_satisfying=first,
    )


# ---------------------------------------------------------------------------
# Maximin share by partition search
# ---------------------------------------------------------------------------


def mms_partition_oracle(instance: Instance, agent: int, budget=None) -> Bundle:
    """The agent's maximin share found by brute force: over every labeled
    n-way split of the items, the best worst bundle in the agent's eyes.
    Distinct bundles always compare strictly, so the optimum is unique."""
    meter = _Meter(budget)
    n, m = instance.n_agents, instance.n_items
    w = _signed_weights(instance)[agent]

    digits = [0] * m
    cur = [0] * n
    cur[0] = sum(w)
    best_min = min(cur)
    best = (list(digits), min(range(n), key=lambda s: cur[s]))
    while True:
        meter.tick("mms_partition_oracle")
        k = 0
        while k < m and digits[k] == n - 1:
            cur[n - 1] -= w[k]
            cur[0] += w[k]
            digits[k] = 0
            k += 1
        if k == m:
            break
        cur[digits[k]] -= w[k]
        digits[k] += 1
        cur[digits[k]] += w[k]
        low_slot = min(range(n), key=lambda s: cur[s])
        if cur[low_slot] > best_min:
            best_min = cur[low_slot]
            best = (list(digits), low_slot)

    slot_digits, slot = best
    return frozenset(o for o in range(m) if slot_digits[o] == slot)


# ---------------------------------------------------------------------------
# Exact envy-free search for chores (backtracking)
# ---------------------------------------------------------------------------


def search_ef_allocation(instance: Instance, budget=None) -> Allocation:
    """Exact envy-free existence for chores-only instances, by backtracking
    instead of full enumeration (the reduction targets have up to 8 agents
    and 12 chores, far past enumerable scale).

    In a chores-only allocation, agent i does not envy agent h exactly when
    h's bundle holds an item more important to i than everything in i's own
    bundle. The search assigns items in a fixed order and abandons a branch
    once some ordered pair can no longer reach that state — i's own best
    rank can only sharpen, so if h's bundle doesn't already beat it and no
    remaining item could, the pair is beyond repair. A complete allocation
    also needs every bundle non-empty (an empty bundle is envied by
    everyone), which bounds how many agents may still be empty-handed.

    Returns the first allocation found (deterministic: items are processed
    most-universally-important first, agents tried in ascending order) or
    None. The result is re-validated through the public envy checker.
    """
    if not instance.is_chores_only():
        raise PreconditionViolatedError(
            REASON_NOT_CHORES_ONLY, "envy-free backtracking search expects chores only"
        )
    meter = _Meter(budget)
    n, m = instance.n_agents, instance.n_items
    if m == 0:
        return tuple(frozenset() for _ in instance.agents)
    if n > m:
        return None

    items = sorted(instance.items, key=lambda o: min(instance.ranks[i][o] for i in instance.agents))
    ranks = instance.ranks
    suffix_min = [[_INF] * (m + 1) for _ in range(n)]
    for i in range(n):
        for pos in range(m - 1, -1, -1):
            suffix_min[i][pos] = min(suffix_min[i][pos + 1], ranks[i][items[pos]])

    R = [[_INF] * n for _ in range(n)]  # R[i][h]: best rank_i inside bundle h
    bundles = [[] for _ in range(n)]
    empty_count = n

    def hopeless(pos: int) -> bool:
        for i in range(n):
            own = R[i][i]
            if suffix_min[i][pos] < own:
                continue  # a remaining item could still outrank i's bundle
            row = R[i]
            for h in range(n):
                if h != i and row[h] >= own:
                    return True
        return False

    def extend(pos: int):
        nonlocal empty_count
        meter.tick("search_ef_allocation")
        if pos == m:
            for i in range(n):
                own = R[i][i]
                for h in range(n):
                    if h != i and R[i][h] >= own:
                        return None
            allocation = tuple(frozenset(b) for b in bundles)
            report = checkers.check_ef(instance, allocation)
            assert report.holds, "backtracking leaf failed the envy checker"
            return allocation
        if empty_count > m - pos:
            return None
        if hopeless(pos):
            return None
        o = items[pos]
        for a in range(n):
            was_empty = not bundles[a]
            bundles[a].append(o)
            if was_empty:
                empty_count -= 1
            saved = [R[i][a] for i in range(n)]
            for i in range(n):
                if ranks[i][o] < R[i][a]:
                    R[i][a] = ranks[i][o]
            found = extend(pos + 1)
            for i in range(n):
                R[i][a] = saved[i]
            bundles[a].pop()
            if was_empty:
                empty_count += 1
            if found is not None:
                return found
        return None

    return extend(0)
