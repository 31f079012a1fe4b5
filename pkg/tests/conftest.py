import pytest

from irid.data import load_bundled
from irid.model import (
    ArrowSpec,
    Constraint,
    Frame,
    NodeSpec,
    Policy,
    ValueTable,
    build_model,
    iter_configs,
)


@pytest.fixture(scope="session")
def wildcatter():
    """Budget-constrained wildcatter model (canonical bundled file)."""
    return load_bundled("wildcatter_irid")


@pytest.fixture(scope="session")
def wildcatter_info_only():
    return load_bundled("wildcatter_info_only")


@pytest.fixture(scope="session")
def wildcatter_workaround():
    return load_bundled("wildcatter_deterministic_workaround")


@pytest.fixture(scope="session")
def wildcatter_payoff():
    return load_bundled("wildcatter_irid_payoff_values")


@pytest.fixture
def minimal_model():
    """One unconstrained decision feeding the value node."""
    return build_model(
        nodes=(
            NodeSpec("D", "decision", Frame(("d", "nd"))),
            NodeSpec("V", "value"),
        ),
        arrows=(ArrowSpec("D", "V", "relevance"),),
        cpts=(),
        constraints=(Constraint("D", (), {(): ("d", "nd")}),),
        value_table=ValueTable(("D",), {("d",): 1.0, ("nd",): 0.0}),
    )


def constrained_constant_policy(model, decision, preferred):
    """Constant policy that falls back to the first admissible alternative
    wherever the constraint rules the preferred one out."""
    scope = model.parents(decision)
    table = {}
    for cfg in iter_configs(scope, model.frames):
        allowed = model.admissible(decision, dict(zip(scope, cfg)))
        table[cfg] = preferred if preferred in allowed else allowed[0]
    return Policy(decision, scope, table)


@pytest.fixture
def const_policy():
    return constrained_constant_policy
