"""Constructive allocation procedures.

Every procedure returns an :class:`AlgorithmOutcome` holding a complete
allocation together with a trace of assignment events.  Traces exist for
auditing: replaying one (:func:`replay_trace`) reproduces the allocation
exactly.  Round numbers group steps that belong to the same conceptual
phase of a procedure — one serial turn, one round-robin cycle — and are
deterministic but otherwise carry no semantics.

Nondeterministic choices are resolved deterministically: wherever "any
agent" may act, the lowest-indexed qualifying agent does, and priority
orders default to the identity permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

from lexalloc.core import (
    Allocation,
    Instance,
    PreconditionViolatedError,
    REASON_COMMON_CHORE_EXISTS,
    REASON_NOT_CHORES_ONLY,
    REASON_NOT_OBJECTIVE,
    REASON_TOP_GOOD_MISSING,
    is_complete,
    rank_within,
    restrict,
)

TRACE_REASONS = frozenset(
    {"TopGood", "CommonChores", "Remainder", "SerialPick", "RoundRobinPick"}
)


@dataclass(frozen=True)
class TraceStep:
    """One assignment event: ``agent`` received ``items`` during ``round``."""

    round: int
    agent: int
    items: frozenset
    reason: str

    def __post_init__(self) -> None:
        if self.reason not in TRACE_REASONS:
            raise ValueError(f"unknown trace reason {self.reason!r}")
        if not self.items:
            raise ValueError("a trace step must assign at least one item")


@dataclass(frozen=True)
class AlgorithmOutcome:
    """A complete allocation plus the ordered trace that produced it."""

    allocation: Allocation
    trace: tuple


def replay_trace(trace, n_agents: int) -> Allocation:
    """Rebuild the allocation an ordered trace describes."""
    bundles = [set() for _ in range(n_agents)]
    seen = set()
    for step in trace:
        if step.items & seen:
            raise ValueError("trace assigns an item twice")
        seen |= step.items
        bundles[step.agent] |= step.items
    return tuple(frozenset(b) for b in bundles)


def _identity(instance: Instance, order, name: str) -> tuple:
    if order is None:
        return tuple(instance.agents)
    order = tuple(order)
    if sorted(order) != list(instance.agents):
        raise ValueError(f"{name} must be a permutation of the agents")
    return order


class _Builder:
    """Accumulates trace steps and bundles for one algorithm run."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.bundles = [set() for _ in instance.agents]
        self.remaining = set(instance.items)
        self.steps = []
        self.round = 0

    def next_round(self) -> None:
        self.round += 1

    def give(self, agent: int, items, reason: str) -> None:
        items = frozenset(items)
        if not items:
            return
        assert items <= self.remaining
        self.remaining -= items
        self.bundles[agent] |= items
        self.steps.append(TraceStep(self.round, agent, items, reason))

    def finish(self) -> AlgorithmOutcome:
        allocation = tuple(frozenset(b) for b in self.bundles)
        assert is_complete(self.instance, allocation)
        outcome = AlgorithmOutcome(allocation, tuple(self.steps))
        assert replay_trace(outcome.trace, self.instance.n_agents) == allocation
        return outcome


def _common_chores(instance: Instance, agents, items) -> set:
    """Items in ``items`` that every agent in ``agents`` perceives as a
    chore.  Empty when ``agents`` is empty."""
    agents = list(agents)
    if not agents:
        return set()
    out = set(items)
    for i in agents:
        out &= instance.chores[i]
    return out


def _serial_good_rounds(build: _Builder, active: list) -> None:
    """The shared elimination loop: while at least two agents remain, find
    the smallest position k such that some remaining agent's k-th ranked
    remaining item is its good; the lowest-indexed such agent takes that
    item and leaves, also collecting any items that just became common
    chores of the agents still active.  The last agent takes everything
    left.

    Precondition (maintained as an invariant): no remaining item is a chore
    for every active agent.
    """
    instance = build.instance
    while len(active) > 1 and build.remaining:
        picker = None
        picked = None
        for k in range(1, len(build.remaining) + 1):
            for i in active:
                o = rank_within(instance, i, k, build.remaining)
                if o in instance.goods[i]:
                    picker, picked = i, o
                    break
            if picker is not None:
                break
        assert picker is not None, "no remaining item is anyone's good"
        build.next_round()
        build.give(picker, {picked}, "SerialPick")
        active.remove(picker)
        build.give(picker, _common_chores(instance, active, build.remaining), "CommonChores")
    build.next_round()
    last = active[0] if len(active) == 1 else None
    if last is not None and build.remaining:
        build.give(last, set(build.remaining), "Remainder")


def efx_po_top_good(instance: Instance) -> AlgorithmOutcome:
    """Allocate mixed items so the outcome is EFX and Pareto optimal,
    provided some agent ranks one of its goods first.

    The lowest-indexed such agent opens: it takes that top good plus every
    item the *other* agents unanimously consider a chore.  From then on no
    remaining item is a common chore, so the serial elimination loop always
    finds an agent whose k-th ranked remaining item is a good.
    """
    first = None
    for i in instance.agents:
        top = instance.rankings[i][0] if instance.n_items else None
        if top is not None and top in instance.goods[i]:
            first = i
            break
    if first is None:
        raise PreconditionViolatedError(
            REASON_TOP_GOOD_MISSING, "no agent ranks one of its goods first"
        )
    build = _Builder(instance)
    active = list(instance.agents)
    if len(active) == 1:
        build.next_round()
        build.give(first, set(build.remaining), "Remainder")
        return build.finish()
    build.next_round()
    build.give(first, {instance.rankings[first][0]}, "TopGood")
    active.remove(first)
    build.give(first, _common_chores(instance, active, build.remaining), "CommonChores")
    _serial_good_rounds(build, active)
    return build.finish()


def efx_po_no_common_chore(instance: Instance) -> AlgorithmOutcome:
    """Allocate mixed items so the outcome is EFX and Pareto optimal,
    provided every item is a good for at least one agent.

    This is the serial elimination loop alone — with no common chore there
    is nothing for an opening agent to absorb.
    """
    if _common_chores(instance, instance.agents, instance.items):
        raise PreconditionViolatedError(
            REASON_COMMON_CHORE_EXISTS, "some item is a chore for every agent"
        )
    build = _Builder(instance)
    active = list(instance.agents)
    _serial_good_rounds(build, active)
    return build.finish()


def mms_mixed(instance: Instance, sigma=None, tau=None) -> AlgorithmOutcome:
    """Allocate mixed items so that every agent receives at least its
    maximin share.  Total: no precondition.

    When some agent ranks a good first this delegates wholesale to
    :func:`efx_po_top_good` (EFX implies the maximin guarantee).  Otherwise
    every agent's top item is its chore, and the procedure runs in two
    serial phases: the common chores are split by ``sigma`` (the first
    agent absorbing the surplus when there are more common chores than
    agents), any agent stuck with its very worst chore is compensated with
    all its remaining goods, and finally agents sweep up every remaining
    item they consider a good in ``tau`` order.
    """
    sigma = _identity(instance, sigma, "sigma")
    tau = _identity(instance, tau, "tau")
    if any(
        instance.rankings[i] and instance.rankings[i][0] in instance.goods[i]
        for i in instance.agents
    ):
        return efx_po_top_good(instance)
    build = _Builder(instance)
    n = instance.n_agents
    common = _common_chores(instance, instance.agents, instance.items)
    build.next_round()
    if len(common) >= n:
        leader = sigma[0]
        by_pref = [o for o in reversed(instance.rankings[leader]) if o in common]
        build.give(leader, set(by_pref[: len(common) - n + 1]), "CommonChores")
        for i in sigma[1:]:
            pool = common & build.remaining
            pick = max(pool, key=lambda o: instance.ranks[i][o])
            build.give(i, {pick}, "SerialPick")
    else:
        for i in sigma[: len(common)]:
            pool = common & build.remaining
            pick = max(pool, key=lambda o: instance.ranks[i][o])
            build.give(i, {pick}, "SerialPick")
    build.next_round()
    for i in sigma:
        if instance.rankings[i] and instance.rankings[i][0] in build.bundles[i]:
            goods_left = instance.goods[i] & build.remaining
            build.give(i, goods_left, "Remainder")
    for i in tau:
        goods_left = instance.goods[i] & build.remaining
        if goods_left:
            build.next_round()
            build.give(i, goods_left, "SerialPick")
    return build.finish()


def efx_po_chores(instance: Instance, sigma=None) -> AlgorithmOutcome:
    """Allocate a chores-only instance so the outcome is EFX and Pareto
    optimal.

    With more chores than agents, the first agent in ``sigma`` absorbs the
    surplus — its ``m - n`` most preferred (least important) chores — after
    which a single serial round lets each agent take its best remaining
    chore.  Every agent other than the first ends up with at most one
    chore, which is exactly the shape EFX requires of envied bundles.
    """
    if not instance.is_chores_only():
        raise PreconditionViolatedError(
            REASON_NOT_CHORES_ONLY, "instance has items perceived as goods"
        )
    sigma = _identity(instance, sigma, "sigma")
    build = _Builder(instance)
    n, m = instance.n_agents, instance.n_items
    if m > n:
        leader = sigma[0]
        by_pref = list(reversed(instance.rankings[leader]))
        build.next_round()
        build.give(leader, set(by_pref[: m - n]), "CommonChores")
    for i in sigma:
        if not build.remaining:
            break
        pick = max(build.remaining, key=lambda o: instance.ranks[i][o])
        build.next_round()
        build.give(i, {pick}, "SerialPick")
    return build.finish()


def mms_rm_chores(instance: Instance):
    """Find a chores-only allocation that is simultaneously rank-maximal
    and maximin-share feasible, or return None when no such allocation
    exists.

    Strategy: realize the best rank signature exhaustively.  If its witness
    gives nobody its own worst chore, the witness already qualifies.
    Otherwise that chore is necessarily *everyone's* worst chore, and any
    qualifying allocation must hand it to some agent as a singleton; each
    agent is tried in turn, accepting when the rest of the items can still
    realize the best signature on the remaining levels.  Trace steps tag
    searched bundles as Remainder since no picking order produced them.
    """
    from lexalloc import oracle

    if not instance.is_chores_only():
        raise PreconditionViolatedError(
            REASON_NOT_CHORES_ONLY, "instance has items perceived as goods"
        )
    n, m = instance.n_agents, instance.n_items

    def searched(allocation: Allocation) -> AlgorithmOutcome:
        steps = tuple(
            TraceStep(1, i, allocation[i], "Remainder")
            for i in instance.agents
            if allocation[i]
        )
        assert replay_trace(steps, n) == allocation
        return AlgorithmOutcome(allocation, steps)

    if n == 1:
        return searched((frozenset(instance.items),))
    best_sig, witness = oracle.best_signature(instance)
    offender = next(
        (
            i
            for i in instance.agents
            if instance.rankings[i] and instance.rankings[i][0] in witness[i]
        ),
        None,
    )
    if offender is None:
        return searched(witness)
    worst = instance.rankings[offender][0]
    # Rank maximality forces this chore to sit at everyone's top rank.
    assert all(instance.rankings[i][0] == worst for i in instance.agents)
    target = best_sig.chore_counts[: m - 1]
    other_items = [o for o in instance.items if o != worst]
    for i in instance.agents:
        others = [a for a in instance.agents if a != i]
        sub, kept_agents, kept_items = restrict(instance, others, other_items)
        sub_sig, sub_witness = oracle.best_signature(sub)
        if sub_sig.chore_counts != target:
            continue
        bundles = [frozenset()] * n
        bundles[i] = frozenset({worst})
        for a, bundle in zip(kept_agents, sub_witness):
            bundles[a] = frozenset(kept_items[o] for o in bundle)
        return searched(tuple(bundles))
    return None


def double_round_robin(instance: Instance, sigma=None) -> AlgorithmOutcome:
    """Allocate an objective mixed instance (every item a common good or a
    common chore) so the outcome is envy-free up to one item.

    Phase one cycles through ``sigma``, each agent taking its best (least
    important) remaining chore; the first ``(-|chores|) mod n`` agents sit
    out one turn so the chore count divides evenly into full cycles — this
    balanced sit-out, rather than letting the tail of ``sigma`` run out of
    chores, is what makes the outcome envy-free up to one item.  Phase two
    cycles through ``sigma`` reversed, each agent taking its most important
    remaining good until the goods run out.  Each full cycle is one trace
    round.
    """
    if not instance.is_objective():
        raise PreconditionViolatedError(
            REASON_NOT_OBJECTIVE, "some item is a good for one agent and a chore for another"
        )
    sigma = _identity(instance, sigma, "sigma")
    build = _Builder(instance)
    chores = _common_chores(instance, instance.agents, instance.items)
    goods = set(instance.items) - chores
    n = instance.n_agents
    sitting_out = (-len(chores)) % n
    for cycle in range((len(chores) + sitting_out) // n):
        build.next_round()
        for position, i in enumerate(sigma):
            if cycle == 0 and position < sitting_out:
                continue
            pool = chores & build.remaining
            pick = max(pool, key=lambda o: instance.ranks[i][o])
            build.give(i, {pick}, "RoundRobinPick")
    while goods & build.remaining:
        build.next_round()
        for i in reversed(sigma):
            pool = goods & build.remaining
            if not pool:
                break
            pick = min(pool, key=lambda o: instance.ranks[i][o])
            build.give(i, {pick}, "RoundRobinPick")
    return build.finish()
