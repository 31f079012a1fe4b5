"""Brute-force ground truth at desk scale.

Nothing here is clever on purpose: expectations come from summing the full
joint, and optimal policies from enumerating every constraint-respecting
deterministic policy combination.  The solver's backward dynamic program and
the Gibbs estimates are validated against these routines; budgets turn
accidental large inputs into hard errors instead of long silences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import BudgetExceeded, InvalidModel, ZeroNormalizer
from .graph_ops import StageContext
from .model import IridModel, Policy, fix_policies, iter_configs


@dataclass(frozen=True)
class EnumerationBudget:
    max_joint_configs: int = 10**7
    max_policy_combinations: int = 10**6

    def __post_init__(self):
        if self.max_joint_configs <= 0 or self.max_policy_combinations <= 0:
            raise InvalidModel("budgets must be positive")


DEFAULT_BUDGET = EnumerationBudget()


def _joint_config_count(model: IridModel) -> int:
    n = 1
    for v in model.variables:
        if v != model.value_var:
            n *= len(model.frame(v))
    return n


def exact_expectation(
    model: IridModel,
    policies: Mapping[str, Policy],
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> float:
    """Expected value of the value node under the given policies, by full
    enumeration of the joint distribution (chance conditionals times the
    zero-one policy conditionals)."""
    n = _joint_config_count(model)
    if n > budget.max_joint_configs:
        raise BudgetExceeded(f"{n} joint configurations exceed {budget.max_joint_configs}")
    view = fix_policies(model, policies)
    variables = view.variables
    conditionals = [view.conditionals[v] for v in variables]
    value_factor = view.value_factor
    total = 0.0
    for cfg in iter_configs(variables, model.frames):
        assign = dict(zip(variables, cfg))
        p = 1.0
        for f in conditionals:
            p *= f.evaluate(assign)
            if p == 0.0:
                break
        if p == 0.0:
            continue
        total += p * value_factor.evaluate(assign)
    return total


def exact_stage_expectation(
    stage_context: StageContext,
    fixed_config: Mapping[str, str],
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> float:
    """Exact counterpart of the Gibbs estimate: normalize the product of the
    stage's probability factors over the free variables and average the value
    factor under those weights."""
    ctx = stage_context
    value_factor = ctx.value_factor
    if value_factor is None:
        raise InvalidModel("stage context has no value factor")
    frames = [ctx.cpt_of(v).frame_of(v) for v in ctx.free_vars]
    n = 1
    for f in frames:
        n *= len(f)
    if n > budget.max_joint_configs:
        raise BudgetExceeded(f"{n} free configurations exceed {budget.max_joint_configs}")
    prob_factors = ctx.probability_factors
    normalizer = 0.0
    weighted = 0.0
    base = dict(fixed_config)
    for combo in itertools.product(*(f.labels for f in frames)):
        assign = base | dict(zip(ctx.free_vars, combo))
        w = 1.0
        for f in prob_factors:
            w *= f.evaluate(assign)
            if w == 0.0:
                break
        if w == 0.0:
            continue
        normalizer += w
        weighted += w * value_factor.evaluate(assign)
    if normalizer == 0.0:
        raise ZeroNormalizer("the conditioning event has probability zero")
    return weighted / normalizer


# --------------------------------------------------------------------------
# exhaustive policy search


def exhaustive_policy_search(
    model: IridModel, budget: EnumerationBudget = DEFAULT_BUDGET
) -> tuple[dict[str, Policy], float]:
    """Globally optimal policies by enumerating every admissible combination.

    Each decision's policy space is the product, over configurations of its
    full parent set, of the admissible alternatives there.  Every combination
    is evaluated exactly; ties go to the combination that enumerates first
    (cells row-major, alternatives in frame order, decisions in their temporal
    order).
    """
    decisions = model.decisions
    if not decisions:
        return {}, exact_expectation(model, {}, budget)

    n_joint = _joint_config_count(model)
    if n_joint > budget.max_joint_configs:
        raise BudgetExceeded(f"{n_joint} joint configurations exceed {budget.max_joint_configs}")

    scopes = {d: model.parents(d) for d in decisions}
    cells = {d: list(iter_configs(scopes[d], model.frames)) for d in decisions}
    admissible_idx: dict[str, list[list[int]]] = {}
    for d in decisions:
        frame = model.frame(d)
        admissible_idx[d] = [
            [frame.index(a) for a in model.admissible(d, dict(zip(scopes[d], cfg)))]
            for cfg in cells[d]
        ]
    combos = 1
    for d in decisions:
        for adm in admissible_idx[d]:
            combos *= len(adm)
            if combos > budget.max_policy_combinations:
                raise BudgetExceeded(
                    f"policy combinations exceed {budget.max_policy_combinations}"
                )

    # tabulate the joint once: chance-only probability, value, and for every
    # decision the cell index and the alternative each configuration demands
    variables = [v for v in model.variables if v != model.value_var]
    chance_factors = [model.cpt_factor(v) for v in model.chance_vars]
    value_factor = model.value_factor
    cell_pos = {d: {cfg: i for i, cfg in enumerate(cells[d])} for d in decisions}

    probs: list[float] = []
    values: list[float] = []
    cell_ids: dict[str, list[int]] = {d: [] for d in decisions}
    alt_ids: dict[str, list[int]] = {d: [] for d in decisions}
    dec_frames = {d: model.frame(d) for d in decisions}
    for cfg in iter_configs(variables, model.frames):
        assign = dict(zip(variables, cfg))
        p = 1.0
        for f in chance_factors:
            p *= f.evaluate(assign)
            if p == 0.0:
                break
        if p == 0.0:
            continue
        probs.append(p)
        values.append(value_factor.evaluate(assign))
        for d in decisions:
            key = tuple(assign[v] for v in scopes[d])
            cell_ids[d].append(cell_pos[d][key])
            alt_ids[d].append(dec_frames[d].index(assign[d]))

    w = np.asarray(probs, dtype=float) * np.asarray(values, dtype=float)
    cid = {d: np.asarray(cell_ids[d], dtype=np.intp) for d in decisions}
    aid = {d: np.asarray(alt_ids[d], dtype=np.intp) for d in decisions}

    maximize = model.objective == "maximize"
    best: dict = {"value": None, "choices": None}

    def better(candidate: float, incumbent: float | None) -> bool:
        if incumbent is None:
            return True
        return candidate > incumbent if maximize else candidate < incumbent

    def recurse(level: int, mask: np.ndarray, chosen: tuple[tuple[int, ...], ...]):
        d = decisions[level]
        n_cells = len(cells[d])
        if level == len(decisions) - 1:
            # per-cell partial sums; every configuration falls in exactly one
            # cell, so a policy's expectation is the sum of its cell picks
            sums = [
                {a: 0.0 for a in adm} for adm in admissible_idx[d]
            ]
            c_arr = cid[d][mask]
            a_arr = aid[d][mask]
            w_arr = w[mask]
            for c, a, wv in zip(c_arr.tolist(), a_arr.tolist(), w_arr.tolist()):
                slot = sums[c]
                if a in slot:
                    slot[a] += wv
            ev = np.zeros((), dtype=float)
            for c in range(n_cells):
                table = np.array([sums[c][a] for a in admissible_idx[d][c]])
                ev = ev[..., None] + table
            flat = ev.ravel()
            pick = int(np.argmax(flat) if maximize else np.argmin(flat))
            candidate = float(flat[pick])
            if better(candidate, best["value"]):
                per_cell = np.unravel_index(pick, ev.shape) if ev.shape else ()
                choice = tuple(
                    admissible_idx[d][c][j] for c, j in enumerate(per_cell)
                )
                best["value"] = candidate
                best["choices"] = chosen + (choice,)
            return
        for combo in itertools.product(*admissible_idx[d]):
            choice_per_cell = np.asarray(combo, dtype=np.intp)
            sub = mask & (choice_per_cell[cid[d]] == aid[d])
            recurse(level + 1, sub, chosen + (tuple(combo),))

    recurse(0, np.ones(len(w), dtype=bool), ())

    policies: dict[str, Policy] = {}
    for d, choice in zip(decisions, best["choices"]):
        frame = dec_frames[d]
        table = {
            cfg: frame.labels[choice[i]] for i, cfg in enumerate(cells[d])
        }
        policies[d] = Policy(decision=d, scope=scopes[d], table=table)
    return policies, float(best["value"])
