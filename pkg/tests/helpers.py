"""Test-side oracles and shared fixture instances.

Everything here is implemented independently of the package's internal
shortcuts so that the product code can be checked against structurally
different computations: a signed power-of-two utility comparator, a
clause-style preference test, plain brute-force enumeration of allocations
and picking sequences, a direct partition search for maximin shares, and a
per-item greedy signature bound.
"""

from __future__ import annotations

import itertools

from lexalloc.core import Comparison, Instance, make_instance, run_picking_sequence


# ---------------------------------------------------------------------------
# Independent preference oracles
# ---------------------------------------------------------------------------


def utility_key(instance: Instance, agent: int, bundle) -> int:
    """Signed additive surrogate: the item at rank k is worth +2^(m-k) if a
    good and -2^(m-k) if a chore. Lexicographic preference must order
    bundles exactly by this sum."""
    m = instance.n_items
    total = 0
    for o in bundle:
        weight = 1 << (m - instance.ranks[agent][o])
        total += weight if o in instance.goods[agent] else -weight
    return total


def utility_compare(instance: Instance, agent: int, x, y) -> Comparison:
    kx = utility_key(instance, agent, x)
    ky = utility_key(instance, agent, y)
    if kx > ky:
        return Comparison.STRICTLY_PREFERS
    if kx < ky:
        return Comparison.STRICTLY_DISPREFERRED
    return Comparison.EQUAL


def clause_prefers(instance: Instance, agent: int, x, y) -> bool:
    """Clause-style strict preference: some item favoring X (a good X holds
    exclusively, or a chore only Y holds) has every more important item in
    both bundles or in neither."""
    xs, ys = frozenset(x), frozenset(y)
    ranking = instance.rankings[agent]
    for o in instance.items:
        in_x, in_y = o in xs, o in ys
        if in_x == in_y:
            continue
        if in_x != (o in instance.goods[agent]):
            continue
        above = ranking[: instance.ranks[agent][o] - 1]
        if all((p in xs) == (p in ys) for p in above):
            return True
    return False


# ---------------------------------------------------------------------------
# Brute-force enumeration
# ---------------------------------------------------------------------------


def all_bundles(m: int):
    items = range(m)
    for size in range(m + 1):
        for combo in itertools.combinations(items, size):
            yield frozenset(combo)


def all_complete_allocations(n: int, m: int):
    """Every way of assigning each of m items to one of n agents."""
    for assignment in itertools.product(range(n), repeat=m):
        bundles = [set() for _ in range(n)]
        for item, agent in enumerate(assignment):
            bundles[agent].add(item)
        yield tuple(frozenset(b) for b in bundles)


def some_sequence_realizes(instance: Instance, allocation) -> bool:
    """Exhaustively try every complete picking sequence (n^m of them)."""
    n, m = instance.n_agents, instance.n_items
    target = tuple(frozenset(b) for b in allocation)
    for seq in itertools.product(range(n), repeat=m):
        if run_picking_sequence(instance, seq) == target:
            return True
    return False


def brute_mms_share(instance: Instance, agent: int):
    """Direct maximin share: over all labeled n-partitions, the best worst
    bundle by the utility surrogate. Returns the unique optimal bundle."""
    n = instance.n_agents
    best_bundle = None
    best_key = None
    for partition in all_complete_allocations(n, instance.n_items):
        worst = min(partition, key=lambda b: utility_key(instance, agent, b))
        key = utility_key(instance, agent, worst)
        if best_key is None or key > best_key:
            best_key, best_bundle = key, worst
    return best_bundle


def greedy_signature(instance: Instance):
    """Independent upper bound on the best signature: each item counted at
    its per-item minimum concatenated level (goods levels before chore
    levels). Returns (good_counts, chore_counts) tuples of length m."""
    m = instance.n_items
    counts = [0] * (2 * m)
    for o in instance.items:
        digit = min(instance.level_digits[i][o] for i in instance.agents)
        counts[digit] += 1
    return tuple(counts[:m]), tuple(counts[m:])


# ---------------------------------------------------------------------------
# Shared fixture instances (rows transcribed by hand)
# ---------------------------------------------------------------------------


def example1() -> Instance:
    """Two agents, one subjective chore each; the running demo instance."""
    return make_instance(
        [
            [("o1", "-"), ("o2", "+"), ("o3", "+"), ("o4", "+")],
            [("o2", "+"), ("o1", "-"), ("o3", "+"), ("o4", "-")],
        ],
        items=["o1", "o2", "o3", "o4"],
    )


def chain_instance() -> Instance:
    """Single agent, o1 good > o2 chore > o3 good; induces an eight-bundle
    strict chain."""
    return make_instance([[("o1", "+"), ("o2", "-"), ("o3", "+")]])


def prop2_instance() -> Instance:
    """Two agents, three items; has a sequencible allocation that is not
    Pareto optimal."""
    return make_instance(
        [
            [("o1", "+"), ("o2", "+"), ("o3", "-")],
            [("o3", "-"), ("o1", "+"), ("o2", "+")],
        ],
        items=["o1", "o2", "o3"],
    )


def efx_nonexistence_instance() -> Instance:
    """Four agents, seven items (one common good), no EFX allocation."""
    row_a = [("o2", "-"), ("o3", "-"), ("o4", "-"), ("o1", "+"), ("o5", "-"), ("o6", "-"), ("o7", "-")]
    row_b = [("o5", "-"), ("o6", "-"), ("o7", "-"), ("o1", "+"), ("o2", "-"), ("o3", "-"), ("o4", "-")]
    return make_instance(
        [row_a, row_a, row_b, row_b],
        items=["o1", "o2", "o3", "o4", "o5", "o6", "o7"],
    )


def mms_not_efx_instance() -> Instance:
    """Four agents, five chores; admits an MMS allocation that is not EFX."""
    shared = [("o5", "-"), ("o4", "-"), ("o3", "-"), ("o2", "-"), ("o1", "-")]
    return make_instance(
        [
            shared,
            shared,
            [("o5", "-"), ("o3", "-"), ("o2", "-"), ("o1", "-"), ("o4", "-")],
            [("o4", "-"), ("o3", "-"), ("o2", "-"), ("o1", "-"), ("o5", "-")],
        ],
        items=["o1", "o2", "o3", "o4", "o5"],
    )


def mms_not_efx_allocation():
    return (
        frozenset({0}),       # o1
        frozenset({1, 2}),    # o2, o3
        frozenset({3}),       # o4
        frozenset({4}),       # o5
    )


def ef1_not_mms_instance() -> Instance:
    """Four agents with identical chore orders."""
    shared = [("o5", "-"), ("o4", "-"), ("o3", "-"), ("o2", "-"), ("o1", "-")]
    return make_instance([shared] * 4, items=["o1", "o2", "o3", "o4", "o5"])


def ef1_not_mms_allocation():
    return (
        frozenset({0, 4}),    # o1, o5
        frozenset({2}),       # o3
        frozenset({1}),       # o2
        frozenset({3}),       # o4
    )


def mms_rm_nonexistence_instance() -> Instance:
    """Two agents, three chores; MMS and rank-maximality are incompatible."""
    return make_instance(
        [
            [("o1", "-"), ("o2", "-"), ("o3", "-")],
            [("o1", "-"), ("o3", "-"), ("o2", "-")],
        ],
        items=["o1", "o2", "o3"],
    )


def efxc_not_efxg_instance() -> Instance:
    """Identical agents, one leading chore then three goods."""
    row = [("o1", "-"), ("o2", "+"), ("o3", "+"), ("o4", "+")]
    return make_instance([row, row], items=["o1", "o2", "o3", "o4"])


def efxg_not_efxc_instance() -> Instance:
    """Identical agents, one leading good then three chores."""
    row = [("o1", "+"), ("o2", "-"), ("o3", "-"), ("o4", "-")]
    return make_instance([row, row], items=["o1", "o2", "o3", "o4"])


def split_first_two_allocation():
    """({o1,o2}, {o3,o4}) for the two instances above."""
    return (frozenset({0, 1}), frozenset({2, 3}))


def drr_demo_instance() -> Instance:
    """Two identical agents over an objective mixed instance."""
    row = [("o1", "+"), ("o2", "-"), ("o3", "+"), ("o4", "-"), ("o5", "+")]
    return make_instance([row, row], items=["o1", "o2", "o3", "o4", "o5"])


def labels_to_bundle(instance: Instance, labels):
    return frozenset(instance.label_index(lab) for lab in labels)


def bundle_labels(instance: Instance, bundle):
    return {instance.item_labels[o] for o in bundle}
