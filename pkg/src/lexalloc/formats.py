"""File formats: instance and allocation documents, DIMACS CNF, and
hypergraph edge lists.

Instance and allocation documents are versioned JSON.  Serialization is
canonical — sorted keys, two-space indent, integers only, trailing
newline — so identical objects produce identical bytes and golden tests
can compare files directly.  Rankings are listed most important first as
``[label, polarity]`` pairs; polarity is spelled out (``"good"`` /
``"chore"``) rather than encoded in the label.

The hypergraph format needs a vertex count up front because isolated
vertices never appear in any edge yet still change the size of reduced
instances: the first non-comment line is the vertex count, each following
non-comment line is one edge as whitespace-separated 1-based vertex ids,
and ``#`` starts a comment anywhere on a line.
"""

from __future__ import annotations

import json

from lexalloc.core import Allocation, Instance, ParseError
from lexalloc.reductions import REDUCTIONS, CnfFormula, Hypergraph, ReductionOutput

FORMAT_VERSION = "1"

GOOD = "good"
CHORE = "chore"


def _canonical(document) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _load_json(text: str, what: str) -> dict:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(document, dict):
        raise ParseError(f"{what}: top level must be an object")
    return document


def _require(document: dict, field: str, what: str):
    if field not in document:
        raise ParseError(f"{what}: missing field '{field}'")
    return document[field]


def _check_version(document: dict, what: str) -> None:
    version = _require(document, "version", what)
    if version != FORMAT_VERSION:
        raise ParseError(
            f"{what}: unsupported version {version!r} (expected {FORMAT_VERSION!r})"
        )


# ---------------------------------------------------------------------------
# Instance documents
# ---------------------------------------------------------------------------


def parse_instance(text: str) -> Instance:
    """Parse an instance document, with field-level diagnostics."""
    doc = _load_json(text, "instance")
    _check_version(doc, "instance")
    agents = _require(doc, "agents", "instance")
    items = _require(doc, "items", "instance")
    orderings = _require(doc, "orderings", "instance")

    if not isinstance(agents, int) or agents < 1:
        raise ParseError(f"instance: 'agents' must be a positive integer, got {agents!r}")
    if not isinstance(items, list) or not all(
        isinstance(label, str) and label for label in items
    ):
        raise ParseError("instance: 'items' must be a list of nonempty labels")
    if len(set(items)) != len(items):
        raise ParseError("instance: duplicate item label in 'items'")
    if not isinstance(orderings, list) or len(orderings) != agents:
        raise ParseError(
            f"instance: 'orderings' must list one ordering per agent "
            f"({agents}), got {len(orderings) if isinstance(orderings, list) else orderings!r}"
        )

    index = {label: o for o, label in enumerate(items)}
    rankings = []
    goods = []
    for i, ordering in enumerate(orderings):
        if not isinstance(ordering, list) or len(ordering) != len(items):
            raise ParseError(
                f"instance: orderings[{i}] must rank all {len(items)} items"
            )
        row = []
        agent_goods = set()
        seen = set()
        for slot, entry in enumerate(ordering):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not isinstance(entry[0], str)
            ):
                raise ParseError(
                    f"instance: orderings[{i}][{slot}] must be a [label, polarity] pair"
                )
            label, polarity = entry
            if label not in index:
                raise ParseError(f"instance: orderings[{i}] names unknown item {label!r}")
            if label in seen:
                raise ParseError(f"instance: orderings[{i}] lists item {label!r} twice")
            seen.add(label)
            if polarity not in (GOOD, CHORE):
                raise ParseError(
                    f"instance: orderings[{i}][{slot}] has polarity {polarity!r}; "
                    f"expected '{GOOD}' or '{CHORE}'"
                )
            row.append(index[label])
            if polarity == GOOD:
                agent_goods.add(index[label])
        rankings.append(tuple(row))
        goods.append(frozenset(agent_goods))
    return Instance(
        item_labels=tuple(items), rankings=tuple(rankings), goods=tuple(goods)
    )


def instance_document(instance: Instance) -> dict:
    orderings = []
    for i in instance.agents:
        orderings.append(
            [
                [
                    instance.item_labels[o],
                    GOOD if o in instance.goods[i] else CHORE,
                ]
                for o in instance.rankings[i]
            ]
        )
    return {
        "version": FORMAT_VERSION,
        "agents": instance.n_agents,
        "items": list(instance.item_labels),
        "orderings": orderings,
    }


def serialize_instance(instance: Instance) -> str:
    return _canonical(instance_document(instance))


# ---------------------------------------------------------------------------
# Allocation documents
# ---------------------------------------------------------------------------


def parse_allocation(text: str, instance: Instance) -> Allocation:
    """Parse an allocation document against ``instance``.  Unknown keys
    (such as an embedded trace) are ignored so solver output can be fed
    straight back in."""
    doc = _load_json(text, "allocation")
    _check_version(doc, "allocation")
    bundles = _require(doc, "bundles", "allocation")
    if not isinstance(bundles, list) or len(bundles) != instance.n_agents:
        raise ParseError(
            f"allocation: 'bundles' must list one bundle per agent "
            f"({instance.n_agents})"
        )
    index = {label: o for o, label in enumerate(instance.item_labels)}
    seen = set()
    allocation = []
    for i, bundle in enumerate(bundles):
        if not isinstance(bundle, list):
            raise ParseError(f"allocation: bundles[{i}] must be a list of labels")
        items = set()
        for label in bundle:
            if label not in index:
                raise ParseError(f"allocation: bundles[{i}] names unknown item {label!r}")
            if index[label] in seen:
                raise ParseError(f"allocation: item {label!r} assigned more than once")
            seen.add(index[label])
            items.add(index[label])
        allocation.append(frozenset(items))
    return tuple(allocation)


def allocation_document(instance: Instance, allocation, trace=None) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "agents": instance.n_agents,
        "bundles": [
            [instance.item_labels[o] for o in sorted(bundle)] for bundle in allocation
        ],
    }
    if trace is not None:
        doc["trace"] = [
            {
                "round": step.round,
                "agent": step.agent + 1,
                "items": [instance.item_labels[o] for o in sorted(step.items)],
                "reason": step.reason,
            }
            for step in trace
        ]
    return doc


def serialize_allocation(instance: Instance, allocation, trace=None) -> str:
    return _canonical(allocation_document(instance, allocation, trace))


# ---------------------------------------------------------------------------
# DIMACS CNF
# ---------------------------------------------------------------------------


def parse_dimacs(text: str) -> CnfFormula:
    """Parse a DIMACS CNF file: ``c`` comment lines, one ``p cnf V C``
    header, then whitespace-separated clause literals terminated by 0."""
    variables = None
    clause_count = None
    clauses = []
    current = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if variables is not None:
                raise ParseError(f"dimacs line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"dimacs line {lineno}: malformed header {line!r}")
            try:
                variables, clause_count = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"dimacs line {lineno}: non-integer header counts")
            continue
        if variables is None:
            raise ParseError(f"dimacs line {lineno}: clause before 'p cnf' header")
        for token in line.split():
            try:
                literal = int(token)
            except ValueError:
                raise ParseError(f"dimacs line {lineno}: bad literal {token!r}")
            if literal == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(literal)
    if variables is None:
        raise ParseError("dimacs: missing 'p cnf' header")
    if current:
        raise ParseError("dimacs: last clause is not 0-terminated")
    if len(clauses) != clause_count:
        raise ParseError(
            f"dimacs: header declares {clause_count} clauses, found {len(clauses)}"
        )
    return CnfFormula(variables=variables, clauses=tuple(clauses))


def serialize_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.variables} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Hypergraph edge lists
# ---------------------------------------------------------------------------


def parse_hypergraph(text: str) -> Hypergraph:
    """Parse a hypergraph: vertex count first, one edge per line after."""
    vertices = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            numbers = [int(token) for token in line.split()]
        except ValueError:
            raise ParseError(f"hypergraph line {lineno}: non-integer vertex id")
        if vertices is None:
            if len(numbers) != 1:
                raise ParseError(
                    f"hypergraph line {lineno}: first line must be the vertex count"
                )
            vertices = numbers[0]
        else:
            edges.append(tuple(numbers))
    if vertices is None:
        raise ParseError("hypergraph: missing vertex-count line")
    return Hypergraph(vertices=vertices, edges=tuple(edges))


def serialize_hypergraph(h: Hypergraph) -> str:
    lines = [str(h.vertices)]
    for edge in h.edges:
        lines.append(" ".join(str(v) for v in sorted(edge)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reduction hint sidecars
# ---------------------------------------------------------------------------


def hints_document(output: ReductionOutput) -> dict:
    if isinstance(output.source, CnfFormula):
        source = {
            "variables": output.source.variables,
            "clauses": [list(clause) for clause in output.source.clauses],
        }
    else:
        source = {
            "vertices": output.source.vertices,
            "edges": [sorted(edge) for edge in output.source.edges],
        }
    return {
        "version": FORMAT_VERSION,
        "kind": output.kind,
        "agents": list(output.agent_names),
        "target_properties": [prop.value for prop in output.target_properties],
        "source": source,
    }


def serialize_hints(output: ReductionOutput) -> str:
    return _canonical(hints_document(output))


def parse_hints(text: str) -> ReductionOutput:
    """Rebuild a reduction (deterministically) from its hint sidecar."""
    doc = _load_json(text, "hints")
    _check_version(doc, "hints")
    kind = _require(doc, "kind", "hints")
    if kind not in REDUCTIONS:
        raise ParseError(f"hints: unknown reduction kind {kind!r}")
    source_doc = _require(doc, "source", "hints")
    if "clauses" in source_doc:
        source = CnfFormula(
            variables=source_doc.get("variables", 0),
            clauses=tuple(tuple(clause) for clause in source_doc["clauses"]),
        )
    elif "edges" in source_doc:
        source = Hypergraph(
            vertices=source_doc.get("vertices", 0),
            edges=tuple(tuple(edge) for edge in source_doc["edges"]),
        )
    else:
        raise ParseError("hints: source must carry 'clauses' or 'edges'")
    return REDUCTIONS[kind](source)
