import numpy as np
import pytest

from irid.errors import BudgetExceeded, ZeroNormalizer
from irid.graph_ops import compute_partition, moralize, relevance_subgraph, build_stage_context
from irid.model import (
    ArrowSpec,
    Constraint,
    Cpt,
    Frame,
    NodeSpec,
    Policy,
    ValueTable,
    build_model,
)
from irid.oracle import (
    EnumerationBudget,
    exact_expectation,
    exact_stage_expectation,
    exhaustive_policy_search,
)
from irid.solver import SolveOptions, solve

from conftest import constrained_constant_policy
from model_gen import random_model, random_policies


def stage2(wildcatter):
    part = compute_partition(wildcatter)
    moral = moralize(relevance_subgraph(wildcatter, part))
    return build_stage_context(wildcatter, part, moral, 2)


class TestExactExpectation:
    def test_no_test_and_drill(self, wildcatter):
        policies = {
            "T": constrained_constant_policy(wildcatter, "T", "nt"),
            "D": constrained_constant_policy(wildcatter, "D", "d"),
        }
        assert exact_expectation(wildcatter, policies) == 250000.0

    def test_no_test_no_drill(self, wildcatter):
        policies = {
            "T": constrained_constant_policy(wildcatter, "T", "nt"),
            "D": constrained_constant_policy(wildcatter, "D", "nd"),
        }
        assert exact_expectation(wildcatter, policies) == -1200000.0

    def test_constant_value(self):
        m = build_model(
            nodes=(
                NodeSpec("D", "decision", Frame(("a", "b"))),
                NodeSpec("V", "value"),
            ),
            arrows=(ArrowSpec("D", "V", "relevance"),),
            cpts=(),
            constraints=(),
            value_table=ValueTable(("D",), {("a",): 7.0, ("b",): 7.0}),
        )
        pol = Policy("D", (), {(): "b"})
        assert exact_expectation(m, {"D": pol}) == 7.0

    def test_budget(self, wildcatter):
        policies = {
            "T": constrained_constant_policy(wildcatter, "T", "nt"),
            "D": constrained_constant_policy(wildcatter, "D", "d"),
        }
        with pytest.raises(BudgetExceeded):
            exact_expectation(wildcatter, policies, EnumerationBudget(max_joint_configs=10))


class TestExactStageExpectation:
    def test_posterior_weighted_value(self, wildcatter):
        ctx = stage2(wildcatter)
        got = exact_stage_expectation(
            ctx, {"B": "$2M", "T": "t1", "R": "c", "D": "d"}
        )
        assert got == pytest.approx(846153.85, abs=0.01)

    def test_impossible_evidence(self, wildcatter):
        ctx = stage2(wildcatter)
        with pytest.raises(ZeroNormalizer):
            exact_stage_expectation(ctx, {"B": "$2M", "T": "nt", "R": "c", "D": "d"})

    def test_constant_value_slice(self, wildcatter_payoff):
        # with payoff-style values, not drilling after a test costs the test
        # price regardless of the oil, so the expectation is that constant
        ctx = stage2(wildcatter_payoff)
        got = exact_stage_expectation(
            ctx, {"B": "$2M", "T": "t1", "R": "c", "D": "nd"}
        )
        assert got == -50000.0

    def test_budget(self, wildcatter):
        ctx = stage2(wildcatter)
        with pytest.raises(BudgetExceeded):
            exact_stage_expectation(
                ctx,
                {"B": "$2M", "T": "t1", "R": "c", "D": "d"},
                EnumerationBudget(max_joint_configs=1),
            )


class TestExhaustivePolicySearch:
    def test_wildcatter_matches_backward_induction(self, wildcatter):
        policies, value = exhaustive_policy_search(wildcatter)
        solution = solve(wildcatter, SolveOptions(backend="exact"))
        assert abs(value - solution.expected_value) <= 1e-9
        for d in wildcatter.decisions:
            assert policies[d].table == solution.policies[d].table

    def test_single_unconstrained_decision(self, minimal_model):
        policies, value = exhaustive_policy_search(minimal_model)
        assert value == 1.0
        assert policies["D"].table == {(): "d"}

    def test_constraints_leaving_single_policy(self):
        m = build_model(
            nodes=(
                NodeSpec("X", "chance", Frame(("x0", "x1"))),
                NodeSpec("D", "decision", Frame(("a", "b"))),
                NodeSpec("V", "value"),
            ),
            arrows=(
                ArrowSpec("X", "D", "relevance"),
                ArrowSpec("D", "V", "relevance"),
                ArrowSpec("X", "V", "relevance"),
            ),
            cpts=(Cpt("X", (), {(): {"x0": 0.5, "x1": 0.5}}),),
            constraints=(
                Constraint("D", ("X",), {("x0",): ("a",), ("x1",): ("b",)}),
            ),
            value_table=ValueTable(
                ("X", "D"),
                {
                    ("x0", "a"): 1.0,
                    ("x0", "b"): 100.0,
                    ("x1", "a"): 100.0,
                    ("x1", "b"): 2.0,
                },
            ),
        )
        policies, value = exhaustive_policy_search(m)
        assert policies["D"].table == {("x0",): "a", ("x1",): "b"}
        assert value == pytest.approx(1.5)

    def test_minimize_objective(self):
        m = build_model(
            nodes=(
                NodeSpec("D", "decision", Frame(("a", "b"))),
                NodeSpec("V", "value"),
            ),
            arrows=(ArrowSpec("D", "V", "relevance"),),
            cpts=(),
            constraints=(),
            value_table=ValueTable(("D",), {("a",): 5.0, ("b",): -2.0}),
            objective="minimize",
        )
        policies, value = exhaustive_policy_search(m)
        assert value == -2.0
        assert policies["D"].table == {(): "b"}

    def test_policy_budget(self, wildcatter):
        with pytest.raises(BudgetExceeded):
            exhaustive_policy_search(
                wildcatter, EnumerationBudget(max_policy_combinations=100)
            )

    @pytest.mark.parametrize("name", ["wildcatter", "wildcatter_workaround"])
    def test_dominates_random_policies(self, name, request):
        model = request.getfixturevalue(name)
        budget = EnumerationBudget(max_policy_combinations=10**7)
        _, best = exhaustive_policy_search(model, budget)
        rng = np.random.default_rng(99)
        for _ in range(1000):
            policies = random_policies(model, rng)
            assert exact_expectation(model, policies) <= best + 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_dominates_random_policies_on_random_models(self, seed):
        model = random_model(seed + 70, n_decisions=(1, 2))
        _, best = exhaustive_policy_search(model)
        rng = np.random.default_rng(seed)
        sign = 1.0 if model.objective == "maximize" else -1.0
        for _ in range(100):
            policies = random_policies(model, rng)
            assert sign * exact_expectation(model, policies) <= sign * best + 1e-9
