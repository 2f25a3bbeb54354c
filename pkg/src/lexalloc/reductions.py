"""Hardness-gadget instance constructors with bidirectional witness maps.

Each constructor turns a source problem (a CNF formula or a hypergraph
rainbow-coloring instance) into a chores-only allocation instance whose
fair allocations encode source witnesses.  The returned
:class:`ReductionOutput` carries two hints: ``forward_hint`` maps a valid
source witness to a concrete allocation, and ``backward_hint`` decodes an
allocation back into a source witness.  :func:`extract_witness` wraps the
backward direction with full validation on both sides.

Everywhere a construction calls for an unordered block of items, the block
is laid out in ascending item index, except vertex-chore blocks (descending
vertex id) and the dummy rows' edge/signature blocks (descending agent,
ascending position within an agent) — one fixed order is as good as
another, but fixtures need determinism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from lexalloc import checkers
from lexalloc.core import (
    Allocation,
    Instance,
    InvalidFormulaError,
    InvalidHypergraphError,
    InvalidWitnessError,
    Not223FormulaError,
    validate_allocation,
)


# ---------------------------------------------------------------------------
# Source problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula: ``variables`` counts variables Y1..Yt; each clause is
    a tuple of nonzero signed 1-based variable indices."""

    variables: int
    clauses: tuple

    def __post_init__(self) -> None:
        if not isinstance(self.variables, int) or self.variables < 1:
            raise InvalidFormulaError("a formula needs at least one variable")
        for clause in self.clauses:
            if not clause:
                raise InvalidFormulaError("empty clause")
            for lit in clause:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > self.variables:
                    raise InvalidFormulaError(f"literal {lit!r} out of range")

    def satisfied_by(self, assignment) -> bool:
        values = list(assignment)
        if len(values) != self.variables:
            raise InvalidWitnessError(
                f"assignment covers {len(values)} of {self.variables} variables"
            )
        return all(
            any(values[abs(lit) - 1] == (lit > 0) for lit in clause)
            for clause in self.clauses
        )


@dataclass(frozen=True)
class Hypergraph:
    """A hypergraph on vertices 1..``vertices`` with nonempty edges."""

    vertices: int
    edges: tuple

    def __post_init__(self) -> None:
        if not isinstance(self.vertices, int) or self.vertices < 1:
            raise InvalidHypergraphError("a hypergraph needs at least one vertex")
        object.__setattr__(self, "edges", tuple(frozenset(e) for e in self.edges))
        for edge in self.edges:
            if not edge:
                raise InvalidHypergraphError("empty edge")
            for v in edge:
                if not isinstance(v, int) or not 1 <= v <= self.vertices:
                    raise InvalidHypergraphError(f"vertex {v!r} out of range")

    @property
    def max_edge_size(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    def is_rainbow_coloring(self, coloring) -> bool:
        """True when ``coloring`` (one of 3 colors per vertex) paints every
        edge with all three colors."""
        colors = list(coloring)
        if len(colors) != self.vertices or any(c not in (0, 1, 2) for c in colors):
            raise InvalidWitnessError("coloring must give every vertex a color in 0..2")
        return all({colors[v - 1] for v in edge} == {0, 1, 2} for edge in self.edges)


def all_assignments(variables: int):
    """All truth assignments, lowest variable flipping fastest."""
    for code in range(2**variables):
        yield tuple(bool((code >> i) & 1) for i in range(variables))


def all_colorings(vertices: int):
    """All 3-colorings, lowest vertex changing fastest."""
    for code in range(3**vertices):
        coloring = []
        for _ in range(vertices):
            coloring.append(code % 3)
            code //= 3
        yield tuple(coloring)


# ---------------------------------------------------------------------------
# Reduction plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReductionOutput:
    """A reduced instance plus the witness translation hints."""

    kind: str
    instance: Instance
    source: object
    agent_names: tuple
    target_properties: tuple
    forward_hint: object = field(repr=False)
    backward_hint: object = field(repr=False)


def _chores_instance(labels, rows) -> Instance:
    return Instance(
        item_labels=tuple(labels),
        rankings=tuple(tuple(row) for row in rows),
        goods=tuple(frozenset() for _ in rows),
    )


def _others_first(m: int, tail) -> tuple:
    """A full ranking: every unnamed item in ascending index, then ``tail``."""
    named = set(tail)
    assert len(named) == len(tail)
    return tuple([o for o in range(m) if o not in named] + list(tail))


# ---------------------------------------------------------------------------
# CNF satisfiability -> envy-free chores allocation
# ---------------------------------------------------------------------------


def sat_to_ef_chores(formula: CnfFormula) -> ReductionOutput:
    """Encode CNF satisfiability as existence of an envy-free chores-only
    allocation.

    For each variable Yi there are four agents — two literal agents and two
    starred collectors — and five private chores (a shared marker x_i,
    value markers one_i/zero_i, and one pad chore per collector); each
    clause contributes one chore.  Every row ends with a short named tail
    (the gadget), preceded by all other chores in ascending index.  An
    envy-free allocation exists exactly when the formula is satisfiable,
    and the variable values can be read off from who holds each x_i.
    """
    t, s = formula.variables, len(formula.clauses)
    labels = [f"C{j+1}" for j in range(s)]
    for i in range(t):
        labels += [f"x{i+1}", f"one{i+1}", f"zero{i+1}", f"onestar{i+1}", f"zerostar{i+1}"]
    m = s + 5 * t

    def x(i):
        return s + 5 * i

    def one(i):
        return s + 5 * i + 1

    def zero(i):
        return s + 5 * i + 2

    def onestar(i):
        return s + 5 * i + 3

    def zerostar(i):
        return s + 5 * i + 4

    pos_clauses = [
        [j for j, clause in enumerate(formula.clauses) if (i + 1) in clause]
        for i in range(t)
    ]
    neg_clauses = [
        [j for j, clause in enumerate(formula.clauses) if -(i + 1) in clause]
        for i in range(t)
    ]

    rows = []
    agent_names = []
    for i in range(t):
        rows.append(_others_first(m, [zero(i), x(i), one(i)]))
        rows.append(_others_first(m, [one(i), x(i), zero(i)]))
        rows.append(_others_first(m, [x(i), *pos_clauses[i], one(i), onestar(i)]))
        rows.append(_others_first(m, [x(i), *neg_clauses[i], zero(i), zerostar(i)]))
        agent_names += [f"X{i+1}", f"notX{i+1}", f"Xstar{i+1}", f"notXstar{i+1}"]
    instance = _chores_instance(labels, rows)

    def forward(assignment) -> Allocation:
        values = tuple(bool(v) for v in assignment)
        if not formula.satisfied_by(values):
            raise InvalidWitnessError("assignment does not satisfy the formula")
        bundles = [set() for _ in range(4 * t)]
        for i in range(t):
            bundles[4 * i] = {one(i), x(i)} if values[i] else {one(i)}
            bundles[4 * i + 1] = {zero(i)} if values[i] else {zero(i), x(i)}
            bundles[4 * i + 2] = {onestar(i)}
            bundles[4 * i + 3] = {zerostar(i)}
        for j, clause in enumerate(formula.clauses):
            collector = None
            for i in range(t):
                if values[i] and (i + 1) in clause:
                    collector = 4 * i + 2
                    break
                if not values[i] and -(i + 1) in clause:
                    collector = 4 * i + 3
                    break
            assert collector is not None
            bundles[collector].add(j)
        return tuple(frozenset(b) for b in bundles)

    def backward(allocation) -> tuple:
        return tuple(x(i) in allocation[4 * i] for i in range(t))

    return ReductionOutput(
        kind="sat-ef",
        instance=instance,
        source=formula,
        agent_names=tuple(agent_names),
        target_properties=(checkers.Property.EF,),
        forward_hint=forward,
        backward_hint=backward,
    )


# ---------------------------------------------------------------------------
# Rainbow 3-coloring -> envy-free + rank-maximal chores allocation
# ---------------------------------------------------------------------------


def _rainbow_backward(h: Hypergraph, vertex_item, r: int):
    def backward(allocation) -> tuple:
        coloring = []
        for v in range(1, h.vertices + 1):
            holder = next(
                (a for a, bundle in enumerate(allocation) if vertex_item(v) in bundle),
                None,
            )
            if holder is None or holder < r:
                raise InvalidWitnessError(
                    f"vertex chore V{v} is not held by a dummy agent"
                )
            coloring.append(holder - r)
        return tuple(coloring)

    return backward


def rainbow_to_ef_rm(h: Hypergraph) -> ReductionOutput:
    """Encode rainbow 3-colorability as existence of an allocation that is
    simultaneously envy-free and rank-maximal.

    One agent per edge plus three dummies; each edge agent owns a block of
    signature chores pinned to it by rank maximality, and the three dummies
    absorb the vertex chores — which dummy takes a vertex chore is the
    vertex's color.
    """
    q, r = h.vertices, len(h.edges)
    delta_blocks = q  # one signature chore per vertex count, per edge agent

    def e_item(i):
        return i

    def s_item(i, k):
        return r + q * i + k

    def v_item(v):
        return r + q * r + (v - 1)

    def d_item(ell):
        return r + q * r + q + ell

    labels = [f"E{i+1}" for i in range(r)]
    labels += [f"S{i+1}.{k+1}" for i in range(r) for k in range(q)]
    labels += [f"V{v}" for v in range(1, q + 1)]
    labels += [f"D{ell+1}" for ell in range(3)]
    m = (q + 1) * r + q + 3

    all_vertices_desc = list(range(q, 0, -1))
    rows = []
    agent_names = []
    for i, edge in enumerate(h.edges):
        row = [v_item(v) for v in all_vertices_desc if v in edge]
        row += [e_item(j) for j in range(r) if j != i]
        row += [e_item(i)]
        row += [d_item(ell) for ell in range(3)]
        row += [s_item(j, k) for j in range(r) if j != i for k in range(q)]
        row += [v_item(v) for v in all_vertices_desc if v not in edge]
        row += [s_item(i, k) for k in range(q)]
        rows.append(row)
        agent_names.append(f"e{i+1}")
    for ell in range(3):
        row = [e_item(j) for j in range(r - 1, -1, -1)]
        row += [s_item(j, k) for j in range(r - 1, -1, -1) for k in range(q)]
        row += [d_item(x) for x in range(3) if x != ell]
        row += [d_item(ell)]
        row += [v_item(v) for v in all_vertices_desc]
        rows.append(row)
        agent_names.append(f"d{ell+1}")
    instance = _chores_instance(labels, rows)
    del delta_blocks, m

    def forward(coloring) -> Allocation:
        colors = tuple(coloring)
        if not h.is_rainbow_coloring(colors):
            raise InvalidWitnessError("coloring is not rainbow on every edge")
        bundles = [set() for _ in range(r + 3)]
        for i in range(r):
            bundles[i] = {e_item(i)} | {s_item(i, k) for k in range(q)}
        for ell in range(3):
            bundles[r + ell] = {d_item(ell)} | {
                v_item(v) for v in range(1, q + 1) if colors[v - 1] == ell
            }
        return tuple(frozenset(b) for b in bundles)

    return ReductionOutput(
        kind="rainbow-ef-rm",
        instance=instance,
        source=h,
        agent_names=tuple(agent_names),
        target_properties=(checkers.Property.EF, checkers.Property.RM),
        forward_hint=forward,
        backward_hint=_rainbow_backward(h, v_item, r),
    )


# ---------------------------------------------------------------------------
# (2/2/3)-SAT -> EFX + rank-maximal chores allocation
# ---------------------------------------------------------------------------


def _validate_223(formula: CnfFormula) -> None:
    r, clauses = formula.variables, formula.clauses
    pos = [0] * r
    neg = [0] * r
    for clause in clauses:
        if len(clause) != 3:
            raise Not223FormulaError("every clause must have exactly three literals")
        if len(set(clause)) != 3:
            raise Not223FormulaError("a clause may not repeat a literal")
        for lit in clause:
            if lit > 0:
                pos[lit - 1] += 1
            else:
                neg[-lit - 1] += 1
    for i in range(r):
        if pos[i] != 2 or neg[i] != 2:
            raise Not223FormulaError(
                f"variable Y{i+1} occurs {pos[i]} times positively and "
                f"{neg[i]} negatively; exactly two of each required"
            )
    assert 3 * len(clauses) == 4 * r


def sat223_to_efx_rm(formula: CnfFormula) -> ReductionOutput:
    """Encode satisfiability of a (2/2/3) formula — three literals per
    clause, each variable twice positive and twice negative — as existence
    of an EFX and rank-maximal chores-only allocation.

    Each variable gets two literal agents sharing a pinned signature pair
    (S, Sbar) and a top chore T; each clause gets a dummy agent holding a
    pinned pair (D, Dbar).  All rows are carved from one shared reference
    order: a literal agent hoists its own five named chores out of the
    reference order and re-seats them so that the clause chores of its two
    occurrences sit exactly s-k and s-j positions from the T block, the
    remaining items pouring through in reference order.
    """
    _validate_223(formula)
    r, s = formula.variables, len(formula.clauses)

    def s_item(i):
        return 2 * i

    def sbar_item(i):
        return 2 * i + 1

    def c_item(j):
        return 2 * r + j

    def d_item(ell):
        return 2 * r + s + ell

    def dbar_item(ell):
        return 2 * r + 2 * s + ell

    def t_item(i):
        return 2 * r + 3 * s + i

    labels = []
    for i in range(r):
        labels += [f"S{i+1}", f"Sbar{i+1}"]
    labels += [f"C{j+1}" for j in range(s)]
    labels += [f"D{ell+1}" for ell in range(s)]
    labels += [f"Dbar{ell+1}" for ell in range(s)]
    labels += [f"T{i+1}" for i in range(r)]
    m = 3 * r + 3 * s

    reference = [dbar_item(ell) for ell in range(s - 1, -1, -1)]
    reference += [c_item(j) for j in range(s - 1, -1, -1)]
    reference += [t_item(i) for i in range(r - 1, -1, -1)]
    for i in range(r - 1, -1, -1):
        reference += [sbar_item(i), s_item(i)]
    reference += [d_item(ell) for ell in range(s - 1, -1, -1)]
    assert len(reference) == m

    occurrences = {}
    for i in range(r):
        occurrences[i + 1] = sorted(
            j + 1 for j, clause in enumerate(formula.clauses) if (i + 1) in clause
        )
        occurrences[-(i + 1)] = sorted(
            j + 1 for j, clause in enumerate(formula.clauses) if -(i + 1) in clause
        )

    def literal_row(i: int, literal: int) -> list:
        j, k = occurrences[literal]  # 1-based clause indices, j < k
        named = {sbar_item(i), s_item(i), c_item(k - 1), c_item(j - 1), t_item(i)}
        pool = iter([o for o in reference if o not in named])

        def pour(count):
            return [next(pool) for _ in range(count)]

        row = pour(m - s - 3)
        row += [sbar_item(i), s_item(i)]
        row += pour(s - k)
        row += [c_item(k - 1)]
        row += pour(k - j - 1)
        row += [c_item(j - 1)]
        row += pour(j - 1)
        row += [t_item(i)]
        return row

    rows = []
    agent_names = []
    for i in range(r):
        rows.append(literal_row(i, i + 1))
        rows.append(literal_row(i, -(i + 1)))
        agent_names += [f"x{i+1}", f"notx{i+1}"]
    for ell in range(s):
        pinned = {dbar_item(ell), d_item(ell)}
        rows.append(
            [o for o in reference if o not in pinned] + [dbar_item(ell), d_item(ell)]
        )
        agent_names.append(f"d{ell+1}")
    instance = _chores_instance(labels, rows)

    def forward(assignment) -> Allocation:
        values = tuple(bool(v) for v in assignment)
        if not formula.satisfied_by(values):
            raise InvalidWitnessError("assignment does not satisfy the formula")
        bundles = [set() for _ in range(2 * r + s)]
        for i in range(r):
            if values[i]:
                bundles[2 * i] = {t_item(i), s_item(i)}
                bundles[2 * i + 1] = {sbar_item(i)}
            else:
                bundles[2 * i] = {sbar_item(i)}
                bundles[2 * i + 1] = {t_item(i), s_item(i)}
        for ell in range(s):
            bundles[2 * r + ell] = {d_item(ell), dbar_item(ell)}
        for j, clause in enumerate(formula.clauses):
            holder = None
            for i in range(r):
                if values[i] and (i + 1) in clause:
                    holder = 2 * i
                    break
                if not values[i] and -(i + 1) in clause:
                    holder = 2 * i + 1
                    break
            assert holder is not None
            bundles[holder].add(c_item(j))
        return tuple(frozenset(b) for b in bundles)

    def backward(allocation) -> tuple:
        return tuple(sbar_item(i) not in allocation[2 * i] for i in range(r))

    return ReductionOutput(
        kind="sat223-efx-rm",
        instance=instance,
        source=formula,
        agent_names=tuple(agent_names),
        target_properties=(checkers.Property.EFX, checkers.Property.RM),
        forward_hint=forward,
        backward_hint=backward,
    )


# ---------------------------------------------------------------------------
# Rainbow 3-coloring -> EF1 + rank-maximal chores allocation
# ---------------------------------------------------------------------------


def rainbow_to_ef1_rm(h: Hypergraph) -> ReductionOutput:
    """Encode rainbow 3-colorability as existence of an allocation that is
    envy-free up to one item and rank-maximal.

    The layout follows the envy-free variant but splits each edge agent's
    signature block into a type-I block (one chore per vertex of the
    largest edge size) and a single type-II chore wedged between the
    agent's own vertex chores and the rest.
    """
    q, r = h.vertices, len(h.edges)
    delta = h.max_edge_size

    def s_item(i, k):
        return delta * i + k

    def sp_item(i):
        return delta * r + i

    def e_item(i):
        return delta * r + r + i

    def v_item(v):
        return delta * r + 2 * r + (v - 1)

    def d_item(ell):
        return delta * r + 2 * r + q + ell

    labels = [f"S{i+1}.{k+1}" for i in range(r) for k in range(delta)]
    labels += [f"Sp{i+1}" for i in range(r)]
    labels += [f"E{i+1}" for i in range(r)]
    labels += [f"V{v}" for v in range(1, q + 1)]
    labels += [f"D{ell+1}" for ell in range(3)]

    all_vertices_desc = list(range(q, 0, -1))
    rows = []
    agent_names = []
    for i, edge in enumerate(h.edges):
        row = [sp_item(j) for j in range(r) if j != i]
        row += [s_item(j, k) for j in range(r) if j != i for k in range(delta)]
        row += [e_item(j) for j in range(r) if j != i]
        row += [e_item(i)]
        row += [v_item(v) for v in all_vertices_desc if v in edge]
        row += [sp_item(i)]
        row += [v_item(v) for v in all_vertices_desc if v not in edge]
        row += [d_item(ell) for ell in range(3)]
        row += [s_item(i, k) for k in range(delta)]
        rows.append(row)
        agent_names.append(f"e{i+1}")
    for ell in range(3):
        row = [e_item(j) for j in range(r - 1, -1, -1)]
        row += [sp_item(j) for j in range(r - 1, -1, -1)]
        row += [s_item(j, k) for j in range(r - 1, -1, -1) for k in range(delta)]
        row += [d_item(x) for x in range(3) if x != ell]
        row += [v_item(v) for v in all_vertices_desc]
        row += [d_item(ell)]
        rows.append(row)
        agent_names.append(f"d{ell+1}")
    instance = _chores_instance(labels, rows)

    def forward(coloring) -> Allocation:
        colors = tuple(coloring)
        if not h.is_rainbow_coloring(colors):
            raise InvalidWitnessError("coloring is not rainbow on every edge")
        bundles = [set() for _ in range(r + 3)]
        for i in range(r):
            bundles[i] = {e_item(i), sp_item(i)} | {s_item(i, k) for k in range(delta)}
        for ell in range(3):
            bundles[r + ell] = {d_item(ell)} | {
                v_item(v) for v in range(1, q + 1) if colors[v - 1] == ell
            }
        return tuple(frozenset(b) for b in bundles)

    return ReductionOutput(
        kind="rainbow-ef1-rm",
        instance=instance,
        source=h,
        agent_names=tuple(agent_names),
        target_properties=(checkers.Property.EF1, checkers.Property.RM),
        forward_hint=forward,
        backward_hint=_rainbow_backward(h, v_item, r),
    )


REDUCTIONS = {
    "sat-ef": sat_to_ef_chores,
    "rainbow-ef-rm": rainbow_to_ef_rm,
    "sat223-efx-rm": sat223_to_efx_rm,
    "rainbow-ef1-rm": rainbow_to_ef1_rm,
}


# ---------------------------------------------------------------------------
# Witness extraction
# ---------------------------------------------------------------------------


def extract_witness(output: ReductionOutput, allocation, budget=None):
    """Decode a source witness from an allocation of the reduced instance.

    The allocation must satisfy every target property of the reduction
    (rank maximality is verified against the exhaustive search, subject to
    ``budget``), and the decoded witness must solve the source problem;
    anything less raises :class:`InvalidWitnessError`.
    """
    instance = output.instance
    validate_allocation(instance, allocation)
    for prop in output.target_properties:
        if prop is checkers.Property.RM:
            report = checkers.check_rm(instance, allocation, budget=budget)
        else:
            report = checkers.CHECKERS[prop](instance, allocation)
        if not report.holds:
            raise InvalidWitnessError(
                f"allocation fails {prop.value} on the reduced instance: {report.detail}"
            )
    witness = output.backward_hint(allocation)
    source = output.source
    if isinstance(source, CnfFormula):
        if not source.satisfied_by(witness):
            raise InvalidWitnessError("decoded assignment does not satisfy the formula")
    elif isinstance(source, Hypergraph):
        if not source.is_rainbow_coloring(witness):
            raise InvalidWitnessError("decoded coloring is not rainbow on every edge")
    return witness
