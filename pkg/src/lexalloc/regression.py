"""The built-in regression matrix behind the ``verify`` subcommand.

Every bundled fixture is replayed against its expected verdict: the
picking-sequence demo must reproduce its pinned allocation and fail EFX
and Pareto optimality with the pinned witnesses, the four-agent instance
must admit no EFX (or EFX-c) allocation across all 16384 candidates, the
characterization fixtures must separate their property pairs, the solvers
must reproduce their hand-executed runs, and the hardness gadgets must
round-trip witnesses.  Each check is timed and reported individually.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from lexalloc import algorithms, checkers, fixtures, oracle
from lexalloc.checkers import Property
from lexalloc.core import Comparison, lex_prefers, run_picking_sequence
from lexalloc.reductions import (
    CnfFormula,
    Hypergraph,
    all_colorings,
    extract_witness,
    rainbow_to_ef_rm,
    sat_to_ef_chores,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    seconds: float
    detail: str


class _Mismatch(Exception):
    pass


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise _Mismatch(message)


def _bundle(instance, labels):
    return frozenset(instance.label_index(label) for label in labels)


def _pick_sequence_demo(fixture_dir):
    doc = fixtures.load_fixture("pick-sequence-demo", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    sequence = tuple(a - 1 for a in doc["sequence"])
    allocation = run_picking_sequence(instance, sequence)
    expected = tuple(_bundle(instance, b) for b in doc["expected_bundles"])
    _expect(allocation == expected, "picking sequence deviates from pinned bundles")

    efx = checkers.check_efx(instance, allocation)
    _expect(not efx.holds, "EFX unexpectedly holds")
    witness = efx.witness
    _expect(
        (witness.envious, witness.item, witness.removed_from)
        == (1, instance.label_index("o4"), "own"),
        f"EFX witness moved: agent {witness.envious + 1}, "
        f"item {instance.item_labels[witness.item]}, side {witness.removed_from}",
    )

    po = oracle.check_po_exhaustive(instance, allocation)
    _expect(not po.holds, "Pareto optimality unexpectedly holds")
    dominator = po.witness.dominator
    everything = frozenset(instance.items)
    _expect(
        dominator == (frozenset(), everything),
        "dominating allocation is not the all-to-agent-2 reassignment",
    )
    return "pinned bundles, EFX witness, and dominator all match"


def _seq_not_po(fixture_dir):
    doc = fixtures.load_fixture("seq-not-po", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    allocation = fixtures.fixture_allocation(doc, instance)
    seq = checkers.check_sequencible(instance, allocation)
    _expect(seq.holds, "fixture allocation is not sequencible")
    po = oracle.check_po_exhaustive(instance, allocation)
    _expect(not po.holds, "fixture allocation is unexpectedly Pareto optimal")
    return "sequencible allocation dominated as expected"


def _efx_nonexistence(fixture_dir):
    doc = fixtures.load_fixture("efx-nonexistence", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    total = instance.n_agents**instance.n_items
    for prop in (Property.EFX, Property.EFX_C):
        certificate = oracle.verify_counterexample(instance, [prop])
        _expect(
            certificate.checked == total,
            f"expected {total} allocations checked, saw {certificate.checked}",
        )
        _expect(
            certificate.satisfying == 0,
            f"{certificate.satisfying} allocations unexpectedly satisfy {prop.value}",
        )
    return f"{total} allocations certified for EFX and EFX-c nonexistence"


def _mms_not_efx(fixture_dir):
    doc = fixtures.load_fixture("mms-not-efx", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    allocation = fixtures.fixture_allocation(doc, instance)
    _expect(checkers.check_mms(instance, allocation).holds, "MMS fails")
    _expect(not checkers.check_efx(instance, allocation).holds, "EFX holds")
    return "allocation is MMS but not EFX"


def _ef1_not_mms(fixture_dir):
    doc = fixtures.load_fixture("ef1-not-mms", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    allocation = fixtures.fixture_allocation(doc, instance)
    _expect(checkers.check_ef1(instance, allocation).holds, "EF1 fails")
    _expect(not checkers.check_mms(instance, allocation).holds, "MMS holds")
    return "allocation is EF1 but not MMS"


def _mms_characterization(fixture_dir):
    doc = fixtures.load_fixture("mms-not-efx", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    for agent in instance.agents:
        share = checkers.mms_share(instance, agent)
        via_partition = oracle.mms_partition_oracle(instance, agent)
        _expect(
            share == via_partition,
            f"share formula and partition search disagree for agent {agent + 1}",
        )
    return f"shares confirmed by partition search for {instance.n_agents} agents"


def _mms_rm_nonexistence(fixture_dir):
    doc = fixtures.load_fixture("mms-rm-nonexistence", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    _expect(
        algorithms.mms_rm_chores(instance) is None,
        "solver unexpectedly found an MMS and rank-maximal allocation",
    )
    _expect(
        oracle.decide_exists(instance, [Property.MMS, Property.RM]) is None,
        "exhaustive search unexpectedly found an MMS and rank-maximal allocation",
    )
    _expect(
        oracle.decide_exists(instance, [Property.MMS]) is not None,
        "MMS alone should be achievable",
    )
    return "no MMS+RM allocation, while MMS alone exists"


def _efx_sides(fixture_dir):
    doc = fixtures.load_fixture("efxc-not-efxg", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    allocation = fixtures.fixture_allocation(doc, instance)
    _expect(checkers.check_efx_c(instance, allocation).holds, "EFX-c fails")
    _expect(not checkers.check_efx_g(instance, allocation).holds, "EFX-g holds")

    doc = fixtures.load_fixture("efxg-not-efxc", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    allocation = fixtures.fixture_allocation(doc, instance)
    _expect(checkers.check_efx_g(instance, allocation).holds, "EFX-g fails")
    _expect(not checkers.check_efx_c(instance, allocation).holds, "EFX-c holds")
    return "one-sided EFX variants separate in both directions"


def _double_round_robin(fixture_dir):
    doc = fixtures.load_fixture("double-round-robin-demo", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    sigma = tuple(a - 1 for a in doc["sigma"])
    outcome = algorithms.double_round_robin(instance, sigma=sigma)
    expected = tuple(_bundle(instance, b) for b in doc["expected_bundles"])
    _expect(outcome.allocation == expected, "allocation deviates from pinned bundles")
    _expect(checkers.check_ef1(instance, outcome.allocation).holds, "EF1 fails")
    _expect(
        not checkers.check_efx(instance, outcome.allocation).holds,
        "EFX unexpectedly holds",
    )
    return "pinned run is EF1 but not EFX"


def _lex_chain(fixture_dir):
    doc = fixtures.load_fixture("lex-chain", fixture_dir)
    instance = fixtures.fixture_instance(doc)
    chain = [_bundle(instance, labels) for labels in doc["chain"]]
    for better, worse in zip(chain, chain[1:]):
        _expect(
            lex_prefers(instance, 0, better, worse) is Comparison.STRICTLY_PREFERS,
            f"chain order broken between {sorted(better)} and {sorted(worse)}",
        )
    return f"all {len(chain) - 1} strict comparisons reproduce"


def _reduction_round_trips(fixture_dir):
    satisfiable = CnfFormula(variables=1, clauses=((1,),))
    out = sat_to_ef_chores(satisfiable)
    found = oracle.search_ef_allocation(out.instance)
    _expect(found is not None, "satisfiable formula yielded no envy-free allocation")
    _expect(
        satisfiable.satisfied_by(extract_witness(out, found)),
        "extracted assignment does not satisfy the formula",
    )
    unsat = CnfFormula(variables=1, clauses=((1,), (-1,)))
    _expect(
        oracle.search_ef_allocation(sat_to_ef_chores(unsat).instance) is None,
        "unsatisfiable formula yielded an envy-free allocation",
    )

    colorable = Hypergraph(vertices=3, edges=((1, 2, 3),))
    out = rainbow_to_ef_rm(colorable)
    found = oracle.decide_exists(out.instance, [Property.EF, Property.RM])
    _expect(found is not None, "colorable hypergraph yielded no EF+RM allocation")
    coloring = extract_witness(out, found)
    _expect(
        colorable.is_rainbow_coloring(coloring),
        "extracted coloring is not rainbow",
    )
    uncolorable = Hypergraph(vertices=2, edges=((1, 2),))
    _expect(
        not any(uncolorable.is_rainbow_coloring(c) for c in all_colorings(2)),
        "two-vertex edge should be uncolorable",
    )
    _expect(
        oracle.decide_exists(
            rainbow_to_ef_rm(uncolorable).instance, [Property.EF, Property.RM]
        )
        is None,
        "uncolorable hypergraph yielded an EF+RM allocation",
    )
    return "witnesses round-trip; nonexistence sides agree"


CHECKS = (
    ("pick-sequence-demo", _pick_sequence_demo),
    ("seq-not-po", _seq_not_po),
    ("efx-nonexistence", _efx_nonexistence),
    ("mms-not-efx", _mms_not_efx),
    ("ef1-not-mms", _ef1_not_mms),
    ("mms-characterization", _mms_characterization),
    ("mms-rm-nonexistence", _mms_rm_nonexistence),
    ("efx-one-sided", _efx_sides),
    ("double-round-robin-demo", _double_round_robin),
    ("lex-chain", _lex_chain),
    ("reduction-round-trips", _reduction_round_trips),
)


def run_all(fixture_dir=None):
    """Run every regression check, returning a list of CheckResults."""
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            detail = check(fixture_dir)
            passed = True
        except _Mismatch as exc:
            detail = str(exc)
            passed = False
        except Exception as exc:  # unexpected breakage is still a mismatch
            detail = f"{type(exc).__name__}: {exc}"
            passed = False
        results.append(
            CheckResult(name, passed, time.perf_counter() - start, detail)
        )
    return results
