"""Tests for the hardness-gadget constructors and witness translation."""

from __future__ import annotations

import pytest

from lexalloc import checkers, core, oracle
from lexalloc.checkers import Property
from lexalloc.core import (
    BudgetExceededError,
    InvalidFormulaError,
    InvalidHypergraphError,
    InvalidWitnessError,
    Not223FormulaError,
)
from lexalloc.oracle import SearchBudget
from lexalloc.reductions import (
    CnfFormula,
    Hypergraph,
    all_assignments,
    all_colorings,
    extract_witness,
    rainbow_to_ef1_rm,
    rainbow_to_ef_rm,
    sat223_to_efx_rm,
    sat_to_ef_chores,
)


Y1 = CnfFormula(variables=1, clauses=((1,),))
Y1_AND_NOT_Y1 = CnfFormula(variables=1, clauses=((1,), (-1,)))
TRIANGLE_EDGE = Hypergraph(vertices=3, edges=(frozenset({1, 2, 3}),))
PAIR_EDGE = Hypergraph(vertices=2, edges=(frozenset({1, 2}),))
LOOP_EDGE = Hypergraph(vertices=1, edges=(frozenset({1}),))
# The smallest formula with three literals per clause and every variable
# twice positive, twice negative; satisfied by the all-true assignment.
SMALLEST_223 = CnfFormula(
    variables=3,
    clauses=((1, 2, 3), (1, -2, -3), (-1, 2, -3), (-1, -2, 3)),
)


def rm_by_levels(instance, allocation) -> bool:
    """Rank-maximality via separability: every item sits at an agent
    achieving that item's minimum level digit."""
    levels = oracle.rank_maximal_levels(instance)
    holder = {o: a for a, bundle in enumerate(allocation) for o in bundle}
    return all(
        instance.level_digits[holder[o]][o] == levels[o][0] for o in instance.items
    )


# ---------------------------------------------------------------------------
# Source-problem types
# ---------------------------------------------------------------------------


def test_formula_validation():
    """Empty clauses and out-of-range literals are rejected up front."""
    with pytest.raises(InvalidFormulaError):
        CnfFormula(variables=0, clauses=())
    with pytest.raises(InvalidFormulaError):
        CnfFormula(variables=2, clauses=((1,), ()))
    with pytest.raises(InvalidFormulaError):
        CnfFormula(variables=2, clauses=((3,),))
    with pytest.raises(InvalidFormulaError):
        CnfFormula(variables=2, clauses=((0,),))


def test_formula_satisfaction():
    """Clause evaluation matches the obvious semantics, and assignments of
    the wrong length are rejected."""
    f = CnfFormula(variables=2, clauses=((1, -2),))
    assert f.satisfied_by((True, True))
    assert f.satisfied_by((False, False))
    assert not f.satisfied_by((False, True))
    with pytest.raises(InvalidWitnessError):
        f.satisfied_by((True,))
    assert not any(Y1_AND_NOT_Y1.satisfied_by(a) for a in all_assignments(1))


def test_hypergraph_validation():
    """Empty edges and out-of-range vertices are rejected; edges are
    normalized to frozensets."""
    with pytest.raises(InvalidHypergraphError):
        Hypergraph(vertices=0, edges=())
    with pytest.raises(InvalidHypergraphError):
        Hypergraph(vertices=2, edges=((),))
    with pytest.raises(InvalidHypergraphError):
        Hypergraph(vertices=2, edges=((1, 3),))
    h = Hypergraph(vertices=3, edges=([1, 2, 2],))
    assert h.edges == (frozenset({1, 2}),)
    assert h.max_edge_size == 2


def test_rainbow_coloring_predicate():
    """An edge is rainbow only when it carries all three colors, so edges
    with fewer than three vertices make the hypergraph uncolorable."""
    assert TRIANGLE_EDGE.is_rainbow_coloring((0, 1, 2))
    assert TRIANGLE_EDGE.is_rainbow_coloring((2, 0, 1))
    assert not TRIANGLE_EDGE.is_rainbow_coloring((0, 0, 2))
    assert not any(PAIR_EDGE.is_rainbow_coloring(c) for c in all_colorings(2))
    assert not any(LOOP_EDGE.is_rainbow_coloring(c) for c in all_colorings(1))
    with pytest.raises(InvalidWitnessError):
        TRIANGLE_EDGE.is_rainbow_coloring((0, 1, 3))


# ---------------------------------------------------------------------------
# CNF satisfiability -> envy-free chores
# ---------------------------------------------------------------------------


def test_sat_reduction_shape():
    """One variable and one clause produce four agents and six chores with
    the exact hand-checked rankings."""
    out = sat_to_ef_chores(Y1)
    inst = out.instance
    assert (inst.n_agents, inst.n_items) == (4, 6)
    assert inst.item_labels == ("C1", "x1", "one1", "zero1", "onestar1", "zerostar1")
    assert out.agent_names == ("X1", "notX1", "Xstar1", "notXstar1")
    assert inst.rankings == (
        (0, 4, 5, 3, 1, 2),
        (0, 4, 5, 2, 1, 3),
        (3, 5, 1, 0, 2, 4),
        (0, 2, 4, 1, 3, 5),
    )
    assert all(not goods for goods in inst.goods)
    assert out.target_properties == (Property.EF,)


def test_sat_reduction_forward_is_ef_and_sequencible():
    """The allocation encoding a satisfying assignment is envy-free and
    realizable by a picking sequence."""
    for formula, witness in [
        (Y1, (True,)),
        (CnfFormula(2, ((1, 2), (-1, -2))), (True, False)),
        (CnfFormula(2, ((1, -1),)), (False, False)),
        (CnfFormula(2, ((-1,), (-2,), (-1, -2))), (False, False)),
    ]:
        out = sat_to_ef_chores(formula)
        allocation = out.forward_hint(witness)
        assert checkers.check_ef(out.instance, allocation).holds
        assert checkers.check_sequencible(out.instance, allocation).holds
        assert out.backward_hint(allocation) == witness
        assert extract_witness(out, allocation) == witness


def test_sat_reduction_forward_rejects_bad_witness():
    """Non-satisfying and ill-shaped assignments never produce allocations."""
    out = sat_to_ef_chores(Y1)
    with pytest.raises(InvalidWitnessError):
        out.forward_hint((False,))
    with pytest.raises(InvalidWitnessError):
        out.forward_hint((True, True))


def test_sat_reduction_existence_matches_satisfiability():
    """Over a spread of small formulas, an envy-free allocation of the
    reduced instance exists exactly when the formula is satisfiable, and
    any found allocation decodes to a satisfying assignment."""
    formulas = [
        Y1,
        Y1_AND_NOT_Y1,
        CnfFormula(2, ((1,), (2,))),
        CnfFormula(2, ((1, 2), (-1, -2))),
        CnfFormula(2, ((1,), (-1, 2), (-2,))),
        CnfFormula(2, ((-1, -2), (1,), (2,))),
    ]
    for formula in formulas:
        satisfiable = any(
            formula.satisfied_by(a) for a in all_assignments(formula.variables)
        )
        out = sat_to_ef_chores(formula)
        found = oracle.search_ef_allocation(out.instance)
        assert (found is not None) == satisfiable, formula
        if found is not None:
            assert formula.satisfied_by(extract_witness(out, found))


def test_sat_reduction_deterministic():
    """Rebuilding the reduction yields an identical instance."""
    a, b = sat_to_ef_chores(SMALLEST_223), sat_to_ef_chores(SMALLEST_223)
    assert a.instance == b.instance
    assert a.agent_names == b.agent_names


# ---------------------------------------------------------------------------
# Rainbow coloring -> envy-free + rank-maximal
# ---------------------------------------------------------------------------


def test_rainbow_ef_rm_shape():
    """A single full edge on three vertices yields four agents and ten
    chores: the edge chore, three signature chores, three vertex chores,
    and three dummy chores."""
    out = rainbow_to_ef_rm(TRIANGLE_EDGE)
    inst = out.instance
    assert (inst.n_agents, inst.n_items) == (4, 10)
    assert inst.item_labels == (
        "E1", "S1.1", "S1.2", "S1.3", "V1", "V2", "V3", "D1", "D2", "D3",
    )
    assert out.agent_names == ("e1", "d1", "d2", "d3")
    assert out.target_properties == (Property.EF, Property.RM)
    # The edge agent ranks its own vertex chores worst-first, then the edge
    # chore, dummies, foreign vertex chores, and finally its signature block.
    assert inst.rankings[0] == (6, 5, 4, 0, 7, 8, 9, 1, 2, 3)
    # A dummy ranks its own dummy chore below the other two and vertex
    # chores last.
    assert inst.rankings[1] == (0, 1, 2, 3, 8, 9, 7, 6, 5, 4)


def test_rainbow_ef_rm_forward_passes_targets():
    """Allocations encoding rainbow colorings are envy-free and
    rank-maximal, with the signature block and edge chore on the edge agent
    and each vertex chore on the dummy of its color."""
    out = rainbow_to_ef_rm(TRIANGLE_EDGE)
    inst = out.instance
    for coloring in [(0, 1, 2), (1, 2, 0), (2, 1, 0)]:
        allocation = out.forward_hint(coloring)
        assert checkers.check_ef(inst, allocation).holds
        assert rm_by_levels(inst, allocation)
        assert checkers.check_rm(inst, allocation).holds
        assert allocation[0] == frozenset({0, 1, 2, 3})
        for v in range(3):
            dummy = 1 + coloring[v]
            assert (4 + v) in allocation[dummy]
        assert extract_witness(out, allocation) == coloring
    with pytest.raises(InvalidWitnessError):
        out.forward_hint((0, 0, 2))


def test_rainbow_ef_rm_necessary_conditions():
    """Rank maximality alone pins every signature chore and the edge chore
    to the edge agent, and every vertex chore to some dummy."""
    out = rainbow_to_ef_rm(TRIANGLE_EDGE)
    inst = out.instance
    levels = oracle.rank_maximal_levels(inst)
    for o in inst.items:
        label = inst.item_labels[o]
        _, achievers = levels[o]
        if label.startswith(("E", "S")):
            assert achievers == (0,), label
        if label.startswith("V"):
            assert all(a >= 1 for a in achievers), label


def all_single_edges(q):
    """All nonempty edges over vertices 1..q."""
    from itertools import combinations

    for size in range(1, q + 1):
        for combo in combinations(range(1, q + 1), size):
            yield frozenset(combo)


def test_rainbow_ef_rm_existence_matches_colorability():
    """A single edge is rainbow-colorable exactly when it has at least
    three vertices; the reduced instance's EF+RM existence agrees."""
    budget = SearchBudget(5_000_000, 600.0)
    for q in (1, 2, 3):
        for edge in all_single_edges(q):
            h = Hypergraph(q, (edge,))
            colorable = any(h.is_rainbow_coloring(c) for c in all_colorings(q))
            out = rainbow_to_ef_rm(h)
            found = oracle.decide_exists(
                out.instance, {Property.EF, Property.RM}, budget=budget
            )
            assert (found is not None) == colorable, (q, sorted(edge))
            if found is not None:
                coloring = extract_witness(out, found, budget=budget)
                assert h.is_rainbow_coloring(coloring)


def test_rainbow_backward_requires_dummy_holders():
    """Decoding fails loudly when a vertex chore sits with the edge agent."""
    out = rainbow_to_ef_rm(TRIANGLE_EDGE)
    allocation = out.forward_hint((0, 1, 2))
    bundles = [set(b) for b in allocation]
    bundles[1].discard(4)
    bundles[0].add(4)
    moved = tuple(frozenset(b) for b in bundles)
    with pytest.raises(InvalidWitnessError):
        out.backward_hint(moved)


# ---------------------------------------------------------------------------
# (2/2/3)-SAT -> EFX + rank-maximal
# ---------------------------------------------------------------------------


def test_223_validation():
    """Clause arity, duplicate literals, and occurrence counts are all
    enforced before any construction happens."""
    with pytest.raises(Not223FormulaError):
        sat223_to_efx_rm(CnfFormula(2, ((1, 2), (-1, -2))))
    with pytest.raises(Not223FormulaError):
        sat223_to_efx_rm(CnfFormula(2, ((1, 1, 2), (-1, -2, 2), (1, -1, -2), (2, -2, 1))))
    # correct arity but variable 1 appears three times positively
    with pytest.raises(Not223FormulaError):
        sat223_to_efx_rm(
            CnfFormula(3, ((1, 2, 3), (1, -2, -3), (1, 2, -3), (-1, -2, 3)))
        )
    # plain validation errors surface too, as the same exception family
    with pytest.raises(InvalidFormulaError):
        sat223_to_efx_rm(CnfFormula(1, ((2, 3, 4),)))


def test_223_reduction_shape():
    """The smallest valid formula (three variables, four clauses) yields
    ten agents and twenty-one chores."""
    out = sat223_to_efx_rm(SMALLEST_223)
    inst = out.instance
    assert (inst.n_agents, inst.n_items) == (10, 21)
    assert out.agent_names == (
        "x1", "notx1", "x2", "notx2", "x3", "notx3", "d1", "d2", "d3", "d4",
    )
    assert out.target_properties == (Property.EFX, Property.RM)
    assert all(not goods for goods in inst.goods)
    # Every dummy row ends with its own pinned pair.
    for ell in range(4):
        row = inst.rankings[6 + ell]
        assert inst.item_labels[row[-2]] == f"Dbar{ell+1}"
        assert inst.item_labels[row[-1]] == f"D{ell+1}"
    # Every literal-agent row ends with that variable's top chore.
    for i in range(3):
        assert inst.item_labels[inst.rankings[2 * i][-1]] == f"T{i+1}"
        assert inst.item_labels[inst.rankings[2 * i + 1][-1]] == f"T{i+1}"


def test_223_forward_passes_targets():
    """Encodings of satisfying assignments are EFX (checked directly and
    via the one-chore envy characterization) and rank-maximal (via the
    separable level criterion; full enumeration is out of reach here)."""
    out = sat223_to_efx_rm(SMALLEST_223)
    inst = out.instance
    satisfying = [
        a for a in all_assignments(3) if SMALLEST_223.satisfied_by(a)
    ]
    assert satisfying
    for witness in satisfying:
        allocation = out.forward_hint(witness)
        report = checkers.check_efx(inst, allocation)
        assert report.holds, report.detail
        # chores-only characterization: every envious agent holds one chore
        for envious in inst.agents:
            for envied in inst.agents:
                if envious == envied:
                    continue
                comparison = core.lex_prefers(
                    inst, envious, allocation[envied], allocation[envious]
                )
                if comparison is core.Comparison.STRICTLY_PREFERS:
                    assert len(allocation[envious]) == 1
        assert rm_by_levels(inst, allocation)
        assert out.backward_hint(allocation) == witness


def test_223_extract_respects_budget():
    """Witness extraction verifies rank maximality against the exhaustive
    search, so a small budget must surface as budget exhaustion rather
    than a bogus verdict."""
    out = sat223_to_efx_rm(SMALLEST_223)
    allocation = out.forward_hint((True, True, True))
    with pytest.raises(BudgetExceededError):
        extract_witness(out, allocation, budget=SearchBudget(1_000, 60.0))


# ---------------------------------------------------------------------------
# Rainbow coloring -> EF1 + rank-maximal
# ---------------------------------------------------------------------------


def test_rainbow_ef1_rm_shape():
    """The single-vertex loop gives four agents and seven chores in the
    hand-checked layout."""
    out = rainbow_to_ef1_rm(LOOP_EDGE)
    inst = out.instance
    assert (inst.n_agents, inst.n_items) == (4, 7)
    assert inst.item_labels == ("S1.1", "Sp1", "E1", "V1", "D1", "D2", "D3")
    assert inst.rankings == (
        (2, 3, 1, 4, 5, 6, 0),
        (2, 1, 0, 5, 6, 3, 4),
        (2, 1, 0, 4, 6, 3, 5),
        (2, 1, 0, 4, 5, 3, 6),
    )
    assert out.target_properties == (Property.EF1, Property.RM)
    big = rainbow_to_ef1_rm(TRIANGLE_EDGE)
    assert (big.instance.n_agents, big.instance.n_items) == (4, 11)


def test_rainbow_ef1_rm_forward_passes_targets():
    """Encodings of rainbow colorings satisfy both target properties and
    decode back to the same coloring."""
    out = rainbow_to_ef1_rm(TRIANGLE_EDGE)
    inst = out.instance
    budget = SearchBudget(5_000_000, 600.0)
    allocation = out.forward_hint((2, 0, 1))
    assert checkers.check_ef1(inst, allocation).holds
    assert rm_by_levels(inst, allocation)
    assert extract_witness(out, allocation, budget=budget) == (2, 0, 1)


def test_rainbow_ef1_rm_known_unfaithful_case():
    """The published construction is not sound on the single-vertex loop:
    an EF1 and rank-maximal allocation exists although the hypergraph is
    uncolorable, because the dummies can split the pinned chores and park
    the vertex chore at no lexicographic cost.  The exploit allocation is
    recorded here; witness extraction correctly refuses to decode it."""
    out = rainbow_to_ef1_rm(LOOP_EDGE)
    inst = out.instance
    exploit = (
        frozenset({0, 1}),  # e1 takes its signature pair
        frozenset({3, 4}),  # d1 takes V1 next to its own dummy chore
        frozenset({5}),
        frozenset({2, 6}),  # d3 absorbs the edge chore
    )
    assert checkers.check_ef1(inst, exploit).holds
    assert checkers.check_rm(inst, exploit).holds
    assert not any(LOOP_EDGE.is_rainbow_coloring(c) for c in all_colorings(1))
    with pytest.raises(InvalidWitnessError):
        extract_witness(out, exploit)


# ---------------------------------------------------------------------------
# Witness extraction
# ---------------------------------------------------------------------------


def test_extract_rejects_property_failures():
    """An allocation that misses a target property is refused with the
    failing property named, before any decoding happens."""
    out = sat_to_ef_chores(Y1)
    lopsided = (
        frozenset({0, 1}),
        frozenset({2, 3}),
        frozenset({4}),
        frozenset({5}),
    )
    assert not checkers.check_ef(out.instance, lopsided).holds
    with pytest.raises(InvalidWitnessError, match="EF"):
        extract_witness(out, lopsided)


def test_extract_rejects_non_satisfying_decode():
    """Even a property-satisfying allocation is refused when its decoded
    witness does not solve the source problem.  (No such allocation exists
    for the faithful constructions, so this exercises the guard directly
    on the known-unfaithful one; see the exploit test above.)"""
    out = rainbow_to_ef1_rm(LOOP_EDGE)
    exploit = (
        frozenset({0, 1}),
        frozenset({3, 4}),
        frozenset({5}),
        frozenset({2, 6}),
    )
    with pytest.raises(InvalidWitnessError, match="rainbow"):
        extract_witness(out, exploit)


def test_checker_registry_covers_budgetless_properties():
    """The public checker registry exposes exactly the budget-free
    checks; PO and RM route through the oracle with budgets."""
    assert set(checkers.CHECKERS) == {
        Property.EF,
        Property.EF1,
        Property.EFX,
        Property.EFX_G,
        Property.EFX_C,
        Property.MMS,
        Property.SEQUENCIBLE,
    }
