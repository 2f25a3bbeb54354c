"""Command-line front end.

Subcommands: ``solve`` (run an allocation procedure), ``check`` (verify
properties of a given allocation), ``decide`` (exhaustive existence
queries), ``reduce`` (build hardness-gadget instances from CNF or
hypergraph files), ``generate`` (seeded random instances), and ``verify``
(replay the bundled regression fixtures).

Conventions at this boundary: agents are numbered from 1 (``--sigma 3,1,2``
and all report text), items are referred to by label, documents are
canonical JSON (sorted keys, two-space indent), and reports come in
``--format human`` (default for check/decide/verify) or ``--format json``.

Exit codes: 0 success / all properties hold; 1 a property fails or no
allocation exists; 2 input or parse error; 3 precondition or constraint
violation; 4 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from lexalloc import algorithms, checkers, fixtures, generators, oracle, regression
from lexalloc.checkers import (
    DominationWitness,
    EnvyWitness,
    LeftoverWitness,
    MmsShortfallWitness,
    Property,
    PropertyReport,
    SignatureWitness,
)
from lexalloc.core import (
    BudgetExceededError,
    IncompleteAllocationError,
    IndexOutOfRangeError,
    InvalidFormulaError,
    InvalidHypergraphError,
    InvalidInstanceError,
    InvalidItemError,
    InvalidWitnessError,
    ParseError,
    PreconditionViolatedError,
    validate_allocation,
)
from lexalloc.formats import (
    allocation_document,
    parse_allocation,
    parse_dimacs,
    parse_hypergraph,
    parse_instance,
    serialize_allocation,
    serialize_hints,
    serialize_instance,
)
from lexalloc.oracle import SearchBudget
from lexalloc.reductions import REDUCTIONS

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_CONSTRAINT = 3
EXIT_BUDGET = 4

#: CLI property tokens.  "po" routes by instance shape (see _check_po);
#: "po-exhaustive" always runs the dominance scan.
PROPERTY_TOKENS = (
    "ef",
    "ef1",
    "efx",
    "efx-g",
    "efx-c",
    "mms",
    "po",
    "po-exhaustive",
    "rm",
    "seq",
)

_PLAIN_PROPERTIES = {
    "ef": Property.EF,
    "ef1": Property.EF1,
    "efx": Property.EFX,
    "efx-g": Property.EFX_G,
    "efx-c": Property.EFX_C,
    "mms": Property.MMS,
    "seq": Property.SEQUENCIBLE,
}

SOLVE_ALGORITHMS = (
    "efx-po-top-good",
    "efx-po-no-common-chore",
    "mms-mixed",
    "efx-po-chores",
    "mms-rm-chores",
    "double-round-robin",
    "rank-maximal",
)


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _emit(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def _emit_json(document: dict) -> None:
    sys.stdout.write(json.dumps(document, indent=2, sort_keys=True) + "\n")


def _budget(args):
    if args.budget is None and args.time_limit is None:
        return None
    default = oracle.DEFAULT_BUDGET
    return SearchBudget(
        max_allocations=args.budget
        if args.budget is not None
        else default.max_allocations,
        max_seconds=args.time_limit
        if args.time_limit is not None
        else default.max_seconds,
    )


def _parse_order(text: str, n: int, flag: str):
    """A 1-indexed comma-separated agent order -> 0-indexed tuple."""
    try:
        order = tuple(int(part) - 1 for part in text.split(","))
    except ValueError:
        raise ParseError(f"{flag}: expected comma-separated integers, got {text!r}")
    if sorted(order) != list(range(n)):
        raise ParseError(
            f"{flag}: {text!r} is not a permutation of agents 1..{n}"
        )
    return order


def _parse_properties(text: str):
    tokens = [token.strip() for token in text.split(",") if token.strip()]
    if not tokens:
        raise ParseError("--properties: no property named")
    for token in tokens:
        if token not in PROPERTY_TOKENS:
            raise ParseError(
                f"--properties: unknown property {token!r} "
                f"(choose from {', '.join(PROPERTY_TOKENS)})"
            )
    return tokens


def _bundle_labels(instance, bundle):
    return [instance.item_labels[o] for o in sorted(bundle)]


def _format_bundle(instance, bundle) -> str:
    return "{" + ", ".join(_bundle_labels(instance, bundle)) + "}"


def _witness_document(instance, witness):
    if witness is None:
        return None
    if isinstance(witness, EnvyWitness):
        return {
            "type": "envy",
            "envious": witness.envious + 1,
            "envied": witness.envied + 1,
            "item": None if witness.item is None else instance.item_labels[witness.item],
            "removed_from": witness.removed_from,
        }
    if isinstance(witness, MmsShortfallWitness):
        return {
            "type": "mms-shortfall",
            "agent": witness.agent + 1,
            "share": _bundle_labels(instance, witness.share),
        }
    if isinstance(witness, DominationWitness):
        return {
            "type": "domination",
            "dominator": [
                _bundle_labels(instance, bundle) for bundle in witness.dominator
            ],
        }
    if isinstance(witness, SignatureWitness):
        return {
            "type": "signature",
            "actual": {
                "good_counts": list(witness.actual.good_counts),
                "chore_counts": list(witness.actual.chore_counts),
            },
            "best": {
                "good_counts": list(witness.best.good_counts),
                "chore_counts": list(witness.best.chore_counts),
            },
            "better_allocation": [
                _bundle_labels(instance, bundle)
                for bundle in witness.better_allocation
            ],
        }
    if isinstance(witness, LeftoverWitness):
        return {
            "type": "leftover",
            "items": [instance.item_labels[o] for o in witness.items],
        }
    return {"type": type(witness).__name__}


def _witness_text(instance, witness) -> str:
    if isinstance(witness, EnvyWitness):
        pair = f"agent {witness.envious + 1} envies agent {witness.envied + 1}"
        if witness.item is None:
            return pair
        label = instance.item_labels[witness.item]
        side = "its own" if witness.removed_from == "own" else "the envied"
        return f"{pair} even after removing {label} from {side} bundle"
    if isinstance(witness, MmsShortfallWitness):
        return (
            f"agent {witness.agent + 1} falls short of its maximin share "
            f"{_format_bundle(instance, witness.share)}"
        )
    if isinstance(witness, DominationWitness):
        bundles = ", ".join(
            f"agent {i + 1}: {_format_bundle(instance, bundle)}"
            for i, bundle in enumerate(witness.dominator)
        )
        return f"dominated by [{bundles}]"
    if isinstance(witness, SignatureWitness):
        return "a lexicographically better signature exists"
    if isinstance(witness, LeftoverWitness):
        labels = ", ".join(instance.item_labels[o] for o in witness.items)
        return f"no picking sequence can deliver: {labels}"
    return ""


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def _rank_maximal_outcome(instance, budget):
    """Realize the signature-optimal allocation found by exhaustive search
    as an AlgorithmOutcome (one bulk trace step per nonempty bundle)."""
    _, allocation = oracle.best_signature(instance, budget=budget)
    steps = [
        algorithms.TraceStep(round=1, agent=i, items=frozenset(bundle), reason="Remainder")
        for i, bundle in enumerate(allocation)
        if bundle
    ]
    return algorithms.AlgorithmOutcome(allocation=allocation, trace=tuple(steps))


def cmd_solve(args) -> int:
    instance = parse_instance(_read(args.instance))
    sigma = (
        None
        if args.sigma is None
        else _parse_order(args.sigma, instance.n_agents, "--sigma")
    )
    tau = (
        None
        if args.tau is None
        else _parse_order(args.tau, instance.n_agents, "--tau")
    )
    name = args.algorithm
    if sigma is not None and name not in (
        "mms-mixed",
        "efx-po-chores",
        "double-round-robin",
    ):
        raise ParseError(f"--sigma is not accepted by {name}")
    if tau is not None and name != "mms-mixed":
        raise ParseError(f"--tau is not accepted by {name}")

    if name == "efx-po-top-good":
        outcome = algorithms.efx_po_top_good(instance)
    elif name == "efx-po-no-common-chore":
        outcome = algorithms.efx_po_no_common_chore(instance)
    elif name == "mms-mixed":
        outcome = algorithms.mms_mixed(instance, sigma=sigma, tau=tau)
    elif name == "efx-po-chores":
        outcome = algorithms.efx_po_chores(instance, sigma=sigma)
    elif name == "double-round-robin":
        outcome = algorithms.double_round_robin(instance, sigma=sigma)
    elif name == "rank-maximal":
        outcome = _rank_maximal_outcome(instance, _budget(args))
    else:  # mms-rm-chores
        outcome = algorithms.mms_rm_chores(instance)
        if outcome is None:
            print("none exists: no allocation is both MMS and rank-maximal")
            return EXIT_FAIL

    if args.format == "human":
        for i, bundle in enumerate(outcome.allocation):
            print(f"agent {i + 1}: {_format_bundle(instance, bundle)}")
        for step in outcome.trace:
            labels = ", ".join(_bundle_labels(instance, step.items))
            print(
                f"round {step.round}: agent {step.agent + 1} takes "
                f"{labels} ({step.reason})"
            )
    else:
        _emit(
            serialize_allocation(instance, outcome.allocation, outcome.trace),
            args.output,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def _check_po(instance, allocation, budget):
    """The routed Pareto check: the sequencibility characterization decides
    chores-only instances outright; mixed instances fall back to the
    exhaustive dominance scan (where sequencibility is only necessary)."""
    chores_only = all(not goods for goods in instance.goods)
    if chores_only:
        report = checkers.check_sequencible(instance, allocation)
        rerouted = PropertyReport(
            Property.PO,
            holds=report.holds,
            witness=report.witness,
            detail=report.detail,
            sequence=report.sequence,
        )
        return rerouted, "sequencibility characterization (chores-only)"
    return (
        oracle.check_po_exhaustive(instance, allocation, budget=budget),
        "exhaustive dominance scan",
    )


def _run_property(token, instance, allocation, budget):
    """-> (display name, PropertyReport, route note or None)."""
    if token == "po":
        report, route = _check_po(instance, allocation, budget)
        return "po", report, route
    if token == "po-exhaustive":
        report = oracle.check_po_exhaustive(instance, allocation, budget=budget)
        return "po-exhaustive", report, None
    if token == "rm":
        return "rm", checkers.check_rm(instance, allocation, budget=budget), None
    prop = _PLAIN_PROPERTIES[token]
    return token, checkers.CHECKERS[prop](instance, allocation), None


def cmd_check(args) -> int:
    instance = parse_instance(_read(args.instance))
    allocation = parse_allocation(_read(args.allocation), instance)
    try:
        validate_allocation(instance, allocation)
    except (
        InvalidInstanceError,
        InvalidItemError,
        IndexOutOfRangeError,
        IncompleteAllocationError,
    ) as exc:
        raise ParseError(f"allocation: {exc}")
    budget = _budget(args)
    tokens = _parse_properties(args.properties)

    rows = []
    for token in tokens:
        name, report, route = _run_property(token, instance, allocation, budget)
        rows.append((name, report, route))

    all_hold = all(report.holds for _, report, _ in rows)
    if args.format == "json":
        _emit_json(
            {
                "all_hold": all_hold,
                "properties": [
                    {
                        "requested": name,
                        "property": report.property.value,
                        "holds": report.holds,
                        "route": route,
                        "witness": _witness_document(instance, report.witness),
                        "sequence": None
                        if report.sequence is None
                        else [a + 1 for a in report.sequence],
                    }
                    for name, report, route in rows
                ],
            }
        )
    else:
        for name, report, route in rows:
            verdict = "holds" if report.holds else "FAILS"
            line = f"{name}: {verdict}"
            if route:
                line += f" [{route}]"
            if not report.holds:
                line += f" — {_witness_text(instance, report.witness)}"
            elif report.sequence is not None:
                line += (
                    " — picking sequence "
                    + ",".join(str(a + 1) for a in report.sequence)
                )
            print(line)
    return EXIT_OK if all_hold else EXIT_FAIL


# ---------------------------------------------------------------------------
# decide
# ---------------------------------------------------------------------------


def _decide_properties(tokens):
    """Existence queries quantify over complete allocations, where the
    routed "po" and the exhaustive scan coincide; both map to PO."""
    props = []
    for token in tokens:
        if token in ("po", "po-exhaustive"):
            props.append(Property.PO)
        elif token == "rm":
            props.append(Property.RM)
        else:
            props.append(_PLAIN_PROPERTIES[token])
    return props


def _search_space(instance, props) -> int:
    if Property.RM in props:
        total = 1
        for _, agents in oracle.rank_maximal_levels(instance):
            total *= len(agents)
        return total
    return instance.n_agents**instance.n_items


def cmd_decide(args) -> int:
    instance = parse_instance(_read(args.instance))
    tokens = _parse_properties(args.properties)
    props = _decide_properties(tokens)
    budget = _budget(args)
    witness = oracle.decide_exists(instance, props, budget=budget)
    names = ",".join(tokens)
    if witness is not None:
        if args.format == "json":
            document = allocation_document(instance, witness)
            document["exists"] = True
            document["properties"] = names.split(",")
            _emit_json(document)
        else:
            print(f"an allocation satisfying {names} exists:")
            for i, bundle in enumerate(witness):
                print(f"agent {i + 1}: {_format_bundle(instance, bundle)}")
        return EXIT_OK
    checked = _search_space(instance, props)
    if args.format == "json":
        _emit_json({"exists": False, "properties": names.split(","), "checked": checked})
    else:
        print(f"no allocation satisfies {names}; checked {checked} candidates")
    return EXIT_FAIL


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------


def _default_hints_path(args) -> str:
    base = args.output if args.output is not None else args.source
    stem, _ = os.path.splitext(base)
    return stem + ".hints.json"


def cmd_reduce(args) -> int:
    kind = args.reduction
    text = _read(args.source)
    source = parse_dimacs(text) if kind.startswith("sat") else parse_hypergraph(text)
    output = REDUCTIONS[kind](source)
    _emit(serialize_instance(output.instance), args.output)
    hints_path = args.hints if args.hints is not None else _default_hints_path(args)
    with open(hints_path, "w", encoding="utf-8") as handle:
        handle.write(serialize_hints(output))
    print(f"witness-translation hints written to {hints_path}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    if not 0 <= args.seed < 2**64:
        raise ParseError(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
    instance = generators.generate_instance(args.kind, args.agents, args.items, args.seed)
    _emit(serialize_instance(instance), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    results = regression.run_all(fixture_dir=args.fixture_dir)
    all_passed = all(result.passed for result in results)
    if args.format == "json":
        _emit_json(
            {
                "all_passed": all_passed,
                "checks": [
                    {
                        "name": result.name,
                        "passed": result.passed,
                        "seconds": round(result.seconds, 6),
                        "detail": result.detail,
                    }
                    for result in results
                ],
            }
        )
    else:
        for result in results:
            status = "ok  " if result.passed else "FAIL"
            print(f"{status} {result.name:28} {result.seconds:8.3f}s  {result.detail}")
        passed = sum(1 for r in results if r.passed)
        print(f"{passed}/{len(results)} checks passed")
    if not all_passed:
        first = next(result for result in results if not result.passed)
        print(f"first mismatch: {first.name} — {first.detail}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------


def _add_budget_flags(parser) -> None:
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        help="cap on allocations visited by exhaustive searches",
    )
    parser.add_argument(
        "--time-limit",
        type=float,
        default=None,
        help="cap in seconds on exhaustive searches",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexalloc",
        description=(
            "Fair allocation of indivisible goods and chores under "
            "lexicographic preferences: solvers, property checkers, "
            "existence search, and hardness-gadget constructions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run an allocation procedure")
    solve.add_argument("instance", help="instance document path")
    solve.add_argument("--algorithm", required=True, choices=SOLVE_ALGORITHMS)
    solve.add_argument("--sigma", default=None, help="1-indexed agent order, e.g. 3,1,2")
    solve.add_argument("--tau", default=None, help="1-indexed agent order for the goods sweep")
    solve.add_argument("--output", default=None, help="write the allocation document here")
    solve.add_argument("--format", choices=("human", "json"), default="json")
    _add_budget_flags(solve)
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", help="check properties of an allocation")
    check.add_argument("instance")
    check.add_argument("allocation")
    check.add_argument(
        "--properties",
        required=True,
        help="comma-separated subset of: " + ",".join(PROPERTY_TOKENS),
    )
    check.add_argument("--format", choices=("human", "json"), default="human")
    _add_budget_flags(check)
    check.set_defaults(func=cmd_check)

    decide = sub.add_parser("decide", help="decide whether a satisfying allocation exists")
    decide.add_argument("instance")
    decide.add_argument("--properties", required=True)
    decide.add_argument("--format", choices=("human", "json"), default="human")
    _add_budget_flags(decide)
    decide.set_defaults(func=cmd_decide)

    reduce_parser = sub.add_parser(
        "reduce", help="build a hardness-gadget instance from a CNF or hypergraph"
    )
    reduce_parser.add_argument("source", help="DIMACS CNF or hypergraph edge-list path")
    reduce_parser.add_argument(
        "--from",
        dest="reduction",
        required=True,
        choices=tuple(REDUCTIONS),
    )
    reduce_parser.add_argument("--output", default=None)
    reduce_parser.add_argument(
        "--hints", default=None, help="where to write the witness-translation sidecar"
    )
    reduce_parser.set_defaults(func=cmd_reduce)

    generate = sub.add_parser("generate", help="generate a seeded random instance")
    generate.add_argument("--kind", required=True, choices=generators.KINDS)
    generate.add_argument("-n", "--agents", type=int, required=True)
    generate.add_argument("-m", "--items", type=int, required=True)
    generate.add_argument("--seed", type=int, required=True)
    generate.add_argument("--output", default=None)
    generate.set_defaults(func=cmd_generate)

    verify = sub.add_parser("verify", help="replay the bundled regression fixtures")
    verify.add_argument(
        "--fixture-dir",
        default=None,
        help="load fixtures from this directory instead of the packaged data",
    )
    verify.add_argument("--format", choices=("human", "json"), default="human")
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionViolatedError as exc:
        print(f"error: {exc.reason}: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (InvalidFormulaError, InvalidHypergraphError, InvalidWitnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def console_main() -> None:  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
