"""Fair allocation of indivisible goods and chores under lexicographic
preferences: property checkers, constructive solvers, exhaustive ground-truth
search, and hardness reductions, with a command-line front end."""

from lexalloc.core import (
    Allocation,
    Bundle,
    Comparison,
    Instance,
    Polarity,
    lex_prefers,
    make_instance,
    rank_of,
    rank_within,
    run_picking_sequence,
)

__all__ = [
    "Allocation",
    "Bundle",
    "Comparison",
    "Instance",
    "Polarity",
    "lex_prefers",
    "make_instance",
    "rank_of",
    "rank_within",
    "run_picking_sequence",
]

__version__ = "1.0.0"
