"""Backward dynamic programming over decision stages.

Stages are solved last decision first.  For each configuration of the
variables the stage's decision depends on, the conditional expectation of the
value node is evaluated for every admissible alternative (exactly, or by Gibbs
sampling), the best one is chosen (ties to frame order), and the solved
decision function is absorbed into the diagram before the next stage.  After
the first decision is absorbed the remaining chance-only network yields the
terminal expected value.

Cells whose conditioning event has probability zero cannot be ranked: Eq-style
conditional expectations are undefined there.  They still get a deterministic
choice (first admissible alternative) and are flagged in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import gibbs, oracle
from .errors import InvalidModel, NoPositiveState, ZeroNormalizer
from .gibbs import SamplerConfig
from .graph_ops import (
    StageContext,
    build_stage_context,
    compute_partition,
    absorb_decision,
    moralize,
    relevance_subgraph,
    remove_barren,
    terminal_stage_context,
)
from .model import MAXIMIZE, OBJECTIVES, IridModel, Policy, iter_configs

BACKEND_EXACT = "exact"
BACKEND_GIBBS = "gibbs"


@dataclass(frozen=True)
class SolveOptions:
    backend: str = BACKEND_EXACT
    sampler: SamplerConfig | None = None
    objective_override: str | None = None
    common_random_numbers: bool = False

    def __post_init__(self):
        if self.backend not in (BACKEND_EXACT, BACKEND_GIBBS):
            raise InvalidModel(f"unknown backend {self.backend!r}")
        if (self.sampler is not None) != (self.backend == BACKEND_GIBBS):
            raise InvalidModel("a sampler configuration is required iff backend='gibbs'")
        if self.objective_override is not None and self.objective_override not in OBJECTIVES:
            raise InvalidModel(f"objective must be one of {OBJECTIVES}")


@dataclass(frozen=True)
class CellDiagnostic:
    """One evaluated (stage, predecessor configuration, alternative)."""

    stage: int
    decision: str
    config: tuple[tuple[str, str], ...]
    alternative: str
    value: float | None
    std_error: float | None
    n: int | None
    chosen: bool
    zero_probability: bool


@dataclass(frozen=True)
class Solution:
    policies: dict[str, Policy]
    expected_value: float
    per_cell_diagnostics: tuple[CellDiagnostic, ...]
    backend_used: str
    objective: str
    sampler: SamplerConfig | None
    model_hash: str
    expected_value_std_error: float | None = None
    expected_value_n: int | None = None


class ExactBackend:
    """Evaluates stage cells by normalized enumeration over the free variables."""

    name = BACKEND_EXACT

    def __init__(self, budget: oracle.EnumerationBudget = oracle.DEFAULT_BUDGET):
        self.budget = budget

    def evaluate(self, ctx: StageContext, fixed: Mapping[str, str], cell_key=None):
        value = oracle.exact_stage_expectation(ctx, fixed, self.budget)
        return value, None, None


class GibbsBackend:
    """Evaluates stage cells by seeded Gibbs estimation.

    Each (stage, cell, alternative) derives its own seed from the base seed,
    so cells are independent and reproducible regardless of evaluation order.
    With common random numbers, alternatives of the same cell share a seed
    stream, which sharpens their comparison at the cost of coupling them.
    """

    name = BACKEND_GIBBS

    def __init__(self, sampler: SamplerConfig, common_random_numbers: bool = False):
        self.sampler = sampler
        self.crn = common_random_numbers

    def derived_seed(self, stage: int, cell_index: int, alt_index: int) -> int:
        if self.crn:
            alt_index = 0
        ss = np.random.SeedSequence(
            entropy=self.sampler.seed & ((1 << 64) - 1),
            spawn_key=(stage, cell_index, alt_index),
        )
        return int(ss.generate_state(1, np.uint64)[0])

    def evaluate(self, ctx: StageContext, fixed: Mapping[str, str], cell_key=(0, 0, 0)):
        stage, cell_index, alt_index = cell_key
        cfg = SamplerConfig(
            seed=self.derived_seed(stage, cell_index, alt_index),
            burn_in=self.sampler.burn_in,
            samples=self.sampler.samples,
            thinning=self.sampler.thinning,
        )
        value_factor = ctx.value_factor
        if value_factor is None:
            raise InvalidModel("stage context has no value factor")
        est = gibbs.estimate_expectation(ctx, fixed, value_factor, cfg)
        return est.mean, est.std_error, est.n


def _make_backend(options: SolveOptions):
    if options.backend == BACKEND_EXACT:
        return ExactBackend()
    return GibbsBackend(options.sampler, options.common_random_numbers)


def optimize_cell(
    stage_context: StageContext,
    predecessor_config: Mapping[str, str],
    admissible_set: Sequence[str],
    backend,
    cell_index: int = 0,
    objective: str = MAXIMIZE,
) -> tuple[str, float | None]:
    """Pick the best admissible alternative for one predecessor configuration.

    Only admissible alternatives are evaluated.  Alternatives whose
    conditioning event has probability zero are excluded from the comparison;
    when every alternative is excluded the first admissible one is returned
    with value None.  Exact ties go to the earliest alternative in frame
    order.
    """
    alt, value, _diags = _optimize_cell_impl(
        stage_context, predecessor_config, admissible_set, backend, cell_index, objective
    )
    return alt, value


def _optimize_cell_impl(
    ctx: StageContext,
    predecessor_config: Mapping[str, str],
    admissible_set: Sequence[str],
    backend,
    cell_index: int,
    objective: str,
):
    if not admissible_set:
        raise InvalidModel("admissible set is empty")  # unreachable on validated models
    decision = ctx.decision
    results: list[tuple[str, float | None, float | None, int | None]] = []
    for alt_index, alt in enumerate(admissible_set):
        fixed = dict(predecessor_config)
        fixed[decision] = alt
        try:
            value, se, n = backend.evaluate(
                ctx, fixed, cell_key=(ctx.stage, cell_index, alt_index)
            )
        except (ZeroNormalizer, NoPositiveState):
            results.append((alt, None, None, None))
            continue
        results.append((alt, value, se, n))

    best_alt = None
    best_value = None
    for alt, value, _se, _n in results:
        if value is None:
            continue
        if best_value is None or (
            value > best_value if objective == MAXIMIZE else value < best_value
        ):
            best_alt, best_value = alt, value
    if best_alt is None:
        best_alt = admissible_set[0]
    return best_alt, best_value, results


def solve(model: IridModel, options: SolveOptions = SolveOptions()) -> Solution:
    """Optimize every decision by backward induction and return the policies,
    the terminal expected value, and per-cell diagnostics."""
    from .modelfile import model_content_hash

    backend = _make_backend(options)
    objective = options.objective_override or model.objective
    original_decisions = model.decisions

    working = remove_barren(model)

    policies: dict[str, Policy] = {}
    # decisions dropped as barren cannot influence the value node: give them
    # the first admissible alternative per cell so the solution stays total
    for d in original_decisions:
        if d not in working.variables:
            policies[d] = _default_policy(model, d)

    diagnostics: list[CellDiagnostic] = []
    while working.decisions:
        partition = compute_partition(working)
        stage = partition.stage_count
        moral = moralize(relevance_subgraph(working, partition))
        ctx = build_stage_context(working, partition, moral, stage)
        decision = ctx.decision
        order = {v: i for i, v in enumerate(working.variables)}
        dep_vars = tuple(sorted(ctx.dependency_set, key=order.__getitem__))

        choices: dict[tuple[str, ...], str] = {}
        for cell_index, dep_cfg in enumerate(iter_configs(dep_vars, working.frames)):
            cfg_map = dict(zip(dep_vars, dep_cfg))
            adm = working.admissible(decision, cfg_map)
            alt, value, results = _optimize_cell_impl(
                ctx, cfg_map, adm, backend, cell_index, objective
            )
            zero_cell = all(v is None for _, v, _, _ in results)
            for a, v, se, n in results:
                diagnostics.append(
                    CellDiagnostic(
                        stage=stage,
                        decision=decision,
                        config=tuple(zip(dep_vars, dep_cfg)),
                        alternative=a,
                        value=v,
                        std_error=se,
                        n=n,
                        chosen=a == alt,
                        zero_probability=zero_cell,
                    )
                )
            choices[dep_cfg] = alt

        policies[decision] = _materialize_policy(working, decision, dep_vars, choices)
        working = absorb_decision(working, decision, policies[decision])

    ev, ev_se, ev_n = _terminal_value(working, backend)
    ordered_policies = {d: policies[d] for d in original_decisions}
    return Solution(
        policies=ordered_policies,
        expected_value=ev,
        per_cell_diagnostics=tuple(diagnostics),
        backend_used=backend.name,
        objective=objective,
        sampler=options.sampler,
        model_hash=model_content_hash(model),
        expected_value_std_error=ev_se,
        expected_value_n=ev_n,
    )


def terminal_expected_value(model: IridModel, backend) -> float:
    """Expected value of a model whose decisions have all been absorbed."""
    value, _se, _n = _terminal_value(model, backend)
    return value


def _terminal_value(model: IridModel, backend):
    if model.decisions:
        raise InvalidModel("terminal expectation requires all decisions absorbed")
    ctx = terminal_stage_context(model)
    if isinstance(backend, ExactBackend):
        return backend.evaluate(ctx, {})
    return backend.evaluate(ctx, {}, cell_key=(0, 0, 0))


def _default_policy(model: IridModel, decision: str) -> Policy:
    scope = model.parents(decision)
    table = {}
    for cfg in iter_configs(scope, model.frames):
        table[cfg] = model.admissible(decision, dict(zip(scope, cfg)))[0]
    return Policy(decision=decision, scope=scope, table=table)


def _materialize_policy(
    model: IridModel,
    decision: str,
    dep_vars: tuple[str, ...],
    choices: Mapping[tuple[str, ...], str],
) -> Policy:
    """Extend per-dependency-set choices to the decision's full parent scope.

    The choice only ranges over the dependency set; other parents get the same
    alternative replicated, which keeps the zero-one conditional well defined
    over all parents.
    """
    scope = model.parents(decision)
    dep_pos = [scope.index(v) for v in dep_vars]
    table = {}
    for cfg in iter_configs(scope, model.frames):
        key = tuple(cfg[i] for i in dep_pos)
        table[cfg] = choices[key]
    return Policy(decision=decision, scope=scope, table=table)
