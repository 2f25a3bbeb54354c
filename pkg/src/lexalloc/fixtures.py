"""Bundled regression fixtures.

Each fixture is a JSON document packaged under ``lexalloc/data`` holding
an instance and, depending on the fixture, a pinned allocation, picking
sequence, agent order, or preference chain.  The ``verify`` subcommand
replays them against their expected verdicts; ``fixture_dir`` lets tests
point the loader at modified copies for negative controls.
"""

from __future__ import annotations

import json
import os
from importlib import resources

from lexalloc.core import Instance, ParseError
from lexalloc.formats import parse_allocation, parse_instance

FIXTURE_NAMES = (
    "pick-sequence-demo",
    "seq-not-po",
    "efx-nonexistence",
    "mms-not-efx",
    "ef1-not-mms",
    "mms-rm-nonexistence",
    "efxc-not-efxg",
    "efxg-not-efxc",
    "double-round-robin-demo",
    "lex-chain",
)


def fixture_text(name: str, fixture_dir=None) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}")
    if fixture_dir is not None:
        path = os.path.join(fixture_dir, f"{name}.json")
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    return (
        resources.files("lexalloc").joinpath("data", f"{name}.json").read_text("utf-8")
    )


def load_fixture(name: str, fixture_dir=None) -> dict:
    text = fixture_text(name, fixture_dir)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"fixture {name}: invalid JSON at line {exc.lineno}: {exc.msg}")


def fixture_instance(document: dict) -> Instance:
    return parse_instance(json.dumps(document["instance"]))


def fixture_allocation(document: dict, instance: Instance, key: str = "allocation"):
    bundles = document[key]
    return parse_allocation(
        json.dumps(
            {"version": "1", "agents": instance.n_agents, "bundles": bundles}
        ),
        instance,
    )
