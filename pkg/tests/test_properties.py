"""Cross-property implications and closed-form characterizations, validated
against exhaustive enumeration on small instances."""

from __future__ import annotations

import random

import helpers
from lexalloc.checkers import (
    Property,
    check_ef,
    check_ef1,
    check_efx,
    check_efx_c,
    check_efx_g,
    check_mms,
    check_rm,
    check_sequencible,
)
from lexalloc.core import make_instance, rank_of
from lexalloc.oracle import check_po_exhaustive, enumerate_allocations


def random_instance(rng, n, m, chores_only=False, goods_only=False):
    labels = [f"o{k+1}" for k in range(m)]
    rows = []
    for _ in range(n):
        order = labels[:]
        rng.shuffle(order)
        if chores_only:
            tags = ["-"] * m
        elif goods_only:
            tags = ["+"] * m
        else:
            tags = [rng.choice("+-") for _ in range(m)]
        rows.append(list(zip(order, tags)))
    return make_instance(rows, items=labels)


def sweep(rng, count, n_max, m_max, **kinds):
    for _ in range(count):
        yield random_instance(rng, rng.randint(1, n_max), rng.randint(1, m_max), **kinds)


# ---------------------------------------------------------------------------
# Implication chain EF => EFX => EF1, and the EFX split
# ---------------------------------------------------------------------------


def test_implication_chain_and_efx_split():
    rng = random.Random(61)
    for inst in sweep(rng, 30, 3, 4):
        for alloc in enumerate_allocations(inst):
            ef = check_ef(inst, alloc).holds
            efx = check_efx(inst, alloc).holds
            ef1 = check_ef1(inst, alloc).holds
            efx_g = check_efx_g(inst, alloc).holds
            efx_c = check_efx_c(inst, alloc).holds
            if ef:
                assert efx
            if efx:
                assert ef1
            assert efx == (efx_g and efx_c)


def test_empty_removal_union_forces_envy_freedom():
    """If the one-removal candidate set for a pair is empty, that pair cannot
    be envious: i's own bundle has no chores-for-i and h's has no goods-for-i,
    so i's bundle is weakly better item by item."""
    from lexalloc.core import Comparison, lex_prefers

    rng = random.Random(67)
    for inst in sweep(rng, 30, 3, 4):
        for alloc in enumerate_allocations(inst):
            for i in inst.agents:
                for h in inst.agents:
                    if i == h:
                        continue
                    candidates = {o for o in alloc[i] if o not in inst.goods[i]}
                    candidates |= {o for o in alloc[h] if o in inst.goods[i]}
                    if not candidates:
                        assert (
                            lex_prefers(inst, i, alloc[h], alloc[i])
                            is not Comparison.STRICTLY_PREFERS
                        )


# ---------------------------------------------------------------------------
# Chores-only characterizations
# ---------------------------------------------------------------------------


def test_chores_efx_iff_every_envious_agent_holds_one_chore():
    rng = random.Random(71)
    for inst in sweep(rng, 25, 3, 5, chores_only=True):
        for alloc in enumerate_allocations(inst):
            envious = {
                i
                for i in inst.agents
                for h in inst.agents
                if i != h and not check_ef(inst, alloc).holds
            }
            # recompute envy precisely per agent
            from lexalloc.core import Comparison, lex_prefers

            envious = {
                i
                for i in inst.agents
                if any(
                    lex_prefers(inst, i, alloc[h], alloc[i])
                    is Comparison.STRICTLY_PREFERS
                    for h in inst.agents
                    if h != i
                )
            }
            characterized = all(len(alloc[i]) == 1 for i in envious)
            assert check_efx(inst, alloc).holds == characterized


def test_chores_mms_iff_worst_chore_held_alone():
    """For n >= 2 chores-only instances: MMS holds iff every agent that holds
    its single worst chore holds nothing else."""
    rng = random.Random(73)
    for inst in sweep(rng, 25, 3, 5, chores_only=True):
        if inst.n_agents < 2:
            continue
        for alloc in enumerate_allocations(inst):
            ok = True
            for i in inst.agents:
                worst = inst.rankings[i][0]  # rank 1 = most important = worst chore
                assert rank_of(inst, i, worst) == 1
                if worst in alloc[i] and len(alloc[i]) > 1:
                    ok = False
            assert check_mms(inst, alloc).holds == ok


def test_chores_ef_iff_min_rank_gap():
    """Chores-only: i envies h iff the worst (most important) chore across
    both bundles sits in i's own bundle."""
    from lexalloc.core import Comparison, lex_prefers

    rng = random.Random(79)
    for inst in sweep(rng, 25, 3, 5, chores_only=True):
        for alloc in enumerate_allocations(inst):
            for i in inst.agents:
                for h in inst.agents:
                    if i == h:
                        continue
                    envies = (
                        lex_prefers(inst, i, alloc[h], alloc[i])
                        is Comparison.STRICTLY_PREFERS
                    )
                    if not alloc[i]:
                        assert not envies
                    elif not alloc[h]:
                        assert envies
                    else:
                        mine = min(rank_of(inst, i, o) for o in alloc[i])
                        theirs = min(rank_of(inst, i, o) for o in alloc[h])
                        assert envies == (mine < theirs)


# ---------------------------------------------------------------------------
# Efficiency: PO vs sequencible, RM => PO
# ---------------------------------------------------------------------------


def test_chores_po_iff_sequencible():
    rng = random.Random(83)
    for inst in sweep(rng, 15, 3, 4, chores_only=True):
        for alloc in enumerate_allocations(inst):
            assert (
                check_po_exhaustive(inst, alloc).holds
                == check_sequencible(inst, alloc).holds
            )


def test_mixed_po_implies_sequencible_but_not_conversely():
    rng = random.Random(89)
    strict_gap_seen = False
    for inst in sweep(rng, 15, 3, 4):
        for alloc in enumerate_allocations(inst):
            po = check_po_exhaustive(inst, alloc).holds
            seq = check_sequencible(inst, alloc).holds
            if po:
                assert seq
            if seq and not po:
                strict_gap_seen = True
    # the canonical gap witness
    inst = helpers.prop2_instance()
    alloc = (
        helpers.labels_to_bundle(inst, ["o1"]),
        helpers.labels_to_bundle(inst, ["o3", "o2"]),
    )
    assert check_sequencible(inst, alloc).holds
    assert not check_po_exhaustive(inst, alloc).holds
    assert strict_gap_seen


def test_rm_implies_po():
    rng = random.Random(97)
    for inst in sweep(rng, 15, 3, 4):
        for alloc in enumerate_allocations(inst):
            if check_rm(inst, alloc).holds:
                assert check_po_exhaustive(inst, alloc).holds


# ---------------------------------------------------------------------------
# Mixed instances: EFX implies MMS
# ---------------------------------------------------------------------------


def test_efx_implies_mms():
    rng = random.Random(101)
    for inst in sweep(rng, 25, 3, 6):
        for alloc in enumerate_allocations(inst):
            if check_efx(inst, alloc).holds:
                assert check_mms(inst, alloc).holds


def test_efx_without_mms_counterexample():
    """Pinned instance on which an EFX allocation misses the MMS guarantee.

    Agent 3 never envies agent 1: o1 is a chore for agent 3 ranked above
    every good inside agent 1's bundle, so the hoarded bundle is unenviable
    and EFX constrains only the two curable envy edges (3->2 and 2->3).
    Meanwhile agent 3's maximin share is {o4}, which beats its empty bundle.
    """
    inst = make_instance(
        [
            [("o4", "+"), ("o3", "-"), ("o2", "+"), ("o1", "+"), ("o5", "+")],
            [("o1", "-"), ("o3", "-"), ("o4", "-"), ("o2", "-"), ("o5", "-")],
            [("o3", "+"), ("o1", "-"), ("o5", "+"), ("o2", "-"), ("o4", "+")],
        ],
        items=["o1", "o2", "o3", "o4", "o5"],
    )
    alloc = (frozenset({0, 1, 3, 4}), frozenset({2}), frozenset())

    assert check_efx(inst, alloc).holds
    report = check_mms(inst, alloc)
    assert not report.holds
    assert report.witness.agent == 2
    assert report.witness.share == frozenset({3})
    from lexalloc.checkers import mms_share
    from lexalloc.oracle import mms_partition_oracle

    for agent in range(inst.n_agents):
        assert mms_share(inst, agent) == mms_partition_oracle(inst, agent)


# ---------------------------------------------------------------------------
# Witness soundness: every failing report carries a replayable witness
# ---------------------------------------------------------------------------


def test_failing_reports_carry_checkable_witnesses():
    from lexalloc.checkers import EnvyWitness, MmsShortfallWitness
    from lexalloc.core import Comparison, lex_prefers

    rng = random.Random(103)
    checkers_by_prop = {
        Property.EF: check_ef,
        Property.EF1: check_ef1,
        Property.EFX: check_efx,
        Property.EFX_G: check_efx_g,
        Property.EFX_C: check_efx_c,
        Property.MMS: check_mms,
    }
    for inst in sweep(rng, 20, 3, 4):
        for alloc in enumerate_allocations(inst):
            for prop, fn in checkers_by_prop.items():
                report = fn(inst, alloc)
                assert report.property is prop
                if report.holds:
                    continue
                w = report.witness
                if isinstance(w, EnvyWitness):
                    if w.item is not None and w.removed_from is not None:
                        source = alloc[w.envious] if w.removed_from == "own" else alloc[w.envied]
                        assert w.item in source
                        mine = alloc[w.envious] - {w.item}
                        theirs = alloc[w.envied] - {w.item}
                        assert (
                            lex_prefers(inst, w.envious, theirs, mine)
                            is Comparison.STRICTLY_PREFERS
                        )
                    else:
                        assert (
                            lex_prefers(inst, w.envious, alloc[w.envied], alloc[w.envious])
                            is Comparison.STRICTLY_PREFERS
                        )
                elif isinstance(w, MmsShortfallWitness):
                    assert (
                        lex_prefers(inst, w.agent, w.share, alloc[w.agent])
                        is Comparison.STRICTLY_PREFERS
                    )
