"""Bundled example models.

The oil wildcatter problem with a budget that constrains drilling, in several
encodings:

  wildcatter_irid              budget-constrained model with relevance arrows
                               into the drill decision; canonical file, with
                               opportunity-loss payoffs (not drilling a wet
                               well books the foregone revenue as a loss)
  wildcatter_irid_alt_probs     same, except the advanced test misreads a dry
                               well slightly less often:
                               P(R=o | O=y, T=t2) = 0.90 instead of 0.95
  wildcatter_irid_payoff_values
                               same structure, payoffs as plain net payoff
                               minus test cost (not drilling costs only the
                               test, whatever the well holds)
  wildcatter_info_only         the budget is informational only: no relevance
                               arrows into decisions, no constraint
  wildcatter_deterministic_workaround   plain influence diagram emulating the budget
                               constraint with a deterministic "drilling
                               actually happens" chance node
"""

from __future__ import annotations

from importlib import resources

from .model import IridModel
from .modelfile import parse_model

BUNDLED = (
    "wildcatter_irid",
    "wildcatter_irid_alt_probs",
    "wildcatter_irid_payoff_values",
    "wildcatter_info_only",
    "wildcatter_deterministic_workaround",
)


def bundled_bytes(name: str) -> bytes:
    if name not in BUNDLED:
        raise KeyError(f"no bundled model {name!r}; available: {BUNDLED}")
    return resources.files("irid").joinpath("data", f"{name}.json").read_bytes()


def load_bundled(name: str) -> IridModel:
    return parse_model(bundled_bytes(name))
