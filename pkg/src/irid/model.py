"""Domain types and validation for influence diagrams with constrained decisions.

A model is a DAG of chance, decision, and value nodes.  Arrows into chance and
value nodes are relevance arrows.  Arrows into a decision are relevance arrows
exactly when they come from the decision's constraint scope; every other arrow
into a decision is informational (the value is known at decision time but does
not restrict the choice).  Each chance node carries a conditional probability
table, each decision a constraint mapping scope configurations to nonempty
sets of permitted alternatives, and the single value node a real-valued table.

Models are immutable after `build_model` and safe to share across threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx

from .errors import (
    ArrowKindMismatch,
    ConstraintScopeNotParents,
    CptParentsMismatch,
    CptRowNotNormalized,
    CycleDetected,
    DecisionsNotTotallyOrdered,
    DuplicateVariable,
    EmptyConstraintCell,
    IncompleteConfig,
    IncompletePolicy,
    InvalidModel,
    MissingPolicy,
    MissingTableEntry,
    MissingValueNode,
    MultipleValueNodes,
    NoForgettingViolated,
    NonFiniteValue,
    PolicyViolatesConstraint,
    UnknownDecision,
    UnknownVariable,
    ValueNodeNotSink,
    ValueNotInFrame,
)
from .factors import Factor

CHANCE = "chance"
DECISION = "decision"
VALUE = "value"
NODE_KINDS = (CHANCE, DECISION, VALUE)

RELEVANCE = "relevance"
INFORMATIONAL = "informational"
ARROW_KINDS = (RELEVANCE, INFORMATIONAL)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
OBJECTIVES = (MAXIMIZE, MINIMIZE)

#: absolute tolerance for CPT row normalization
PROB_TOL = 1e-9

Config = Mapping[str, str]


@dataclass(frozen=True)
class Frame:
    """Ordered set of values a variable can take.

    The ordering is fixed at construction and used for deterministic iteration
    and argmax tie-breaking everywhere in the package.
    """

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 1:
            raise InvalidModel("frame must have at least one value")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidModel(f"frame labels not unique: {self.labels!r}")
        for lab in self.labels:
            if not isinstance(lab, str):
                raise InvalidModel(f"frame labels must be strings, got {lab!r}")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueNotInFrame(f"{label!r} not in frame {self.labels!r}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: str
    frame: Frame | None = None

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise InvalidModel(f"unknown node kind {self.kind!r} for {self.id!r}")
        if self.kind == VALUE and self.frame is not None:
            raise InvalidModel(f"value node {self.id!r} must not declare a frame")
        if self.kind != VALUE and self.frame is None:
            raise InvalidModel(f"{self.kind} node {self.id!r} needs a frame")


@dataclass(frozen=True)
class ArrowSpec:
    source: str
    target: str
    kind: str

    def __post_init__(self):
        if self.kind not in ARROW_KINDS:
            raise InvalidModel(f"unknown arrow kind {self.kind!r}")


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table: one probability row per parent configuration."""

    child: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], Mapping[str, float]]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        rows = {
            tuple(cfg): {str(v): float(p) for v, p in row.items()}
            for cfg, row in self.rows.items()
        }
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class Constraint:
    """Maps configurations of the scope to the alternatives the decision may take."""

    decision: str
    scope: tuple[str, ...]
    cells: Mapping[tuple[str, ...], tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        cells = {tuple(cfg): tuple(allowed) for cfg, allowed in self.cells.items()}
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class ValueTable:
    parents: tuple[str, ...]
    cells: Mapping[tuple[str, ...], float]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        cells = {tuple(cfg): float(v) for cfg, v in self.cells.items()}
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class Policy:
    """Deterministic decision function: one chosen alternative per scope configuration.

    The scope is the decision's full parent list; the table must pick an
    admissible alternative for every configuration.
    """

    decision: str
    scope: tuple[str, ...]
    table: Mapping[tuple[str, ...], str]

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(
            self, "table", {tuple(cfg): str(v) for cfg, v in self.table.items()}
        )

    def choice(self, config: Config) -> str:
        try:
            key = tuple(config[v] for v in self.scope)
        except KeyError as e:
            raise IncompleteConfig(f"policy for {self.decision!r} needs {e.args[0]!r}") from None
        try:
            return self.table[key]
        except KeyError:
            raise IncompletePolicy(
                f"policy for {self.decision!r} has no entry at {key!r}"
            ) from None


def iter_configs(scope: Sequence[str], frames: Mapping[str, Frame]) -> Iterator[tuple[str, ...]]:
    """Row-major iteration over all configurations of `scope`."""
    return itertools.product(*(frames[v].labels for v in scope))


@dataclass(frozen=True)
class IridModel:
    """Validated influence diagram; construct through `build_model`."""

    nodes: tuple[NodeSpec, ...]
    arrows: tuple[ArrowSpec, ...]
    cpts: tuple[Cpt, ...]
    constraints: tuple[Constraint, ...]
    value: ValueTable
    objective: str = MAXIMIZE

    # -- structure ---------------------------------------------------------

    @cached_property
    def _node_index(self) -> dict[str, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def _node_map(self) -> dict[str, NodeSpec]:
        return {n.id: n for n in self.nodes}

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, var: str) -> NodeSpec:
        try:
            return self._node_map[var]
        except KeyError:
            raise UnknownVariable(f"no node {var!r}") from None

    def kind(self, var: str) -> str:
        return self.node(var).kind

    def frame(self, var: str) -> Frame:
        fr = self.node(var).frame
        if fr is None:
            raise InvalidModel(f"value node {var!r} has no frame")
        return fr

    @cached_property
    def frames(self) -> dict[str, Frame]:
        return {n.id: n.frame for n in self.nodes if n.frame is not None}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        by_target: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a in self.arrows:
            by_target[a.target].append(a.source)
        idx = self._node_index
        return {v: tuple(sorted(ps, key=idx.__getitem__)) for v, ps in by_target.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        by_source: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a in self.arrows:
            by_source[a.source].append(a.target)
        idx = self._node_index
        return {v: tuple(sorted(cs, key=idx.__getitem__)) for v, cs in by_source.items()}

    def parents(self, var: str) -> tuple[str, ...]:
        self.node(var)
        return self._parents[var]

    def children(self, var: str) -> tuple[str, ...]:
        self.node(var)
        return self._children[var]

    @cached_property
    def chance_vars(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind == CHANCE)

    @cached_property
    def decisions(self) -> tuple[str, ...]:
        """Decision variables in their (unique) temporal order."""
        decs = [n.id for n in self.nodes if n.kind == DECISION]
        if len(decs) <= 1:
            return tuple(decs)
        # valid models have a decision chain, so successor counts are distinct
        return tuple(sorted(decs, key=lambda d: -len(self._dec_reach(d))))

    def _dec_reach(self, d: str) -> set[str]:
        # decisions reachable from d along decision-to-decision arrows
        seen: set[str] = set()
        stack = [d]
        while stack:
            cur = stack.pop()
            for c in self._children[cur]:
                if self.kind(c) == DECISION and c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    @cached_property
    def value_var(self) -> str:
        for n in self.nodes:
            if n.kind == VALUE:
                return n.id
        raise MissingValueNode("model has no value node")

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        g.add_edges_from((a.source, a.target) for a in self.arrows)
        idx = self._node_index
        return tuple(nx.lexicographical_topological_sort(g, key=idx.__getitem__))

    # -- tables ------------------------------------------------------------

    @cached_property
    def _cpt_map(self) -> dict[str, Cpt]:
        return {c.child: c for c in self.cpts}

    def cpt(self, var: str) -> Cpt:
        try:
            return self._cpt_map[var]
        except KeyError:
            raise UnknownVariable(f"no CPT for {var!r}") from None

    @cached_property
    def _constraint_map(self) -> dict[str, Constraint]:
        return {c.decision: c for c in self.constraints}

    def constraint(self, decision: str) -> Constraint:
        if decision not in self._constraint_map:
            if decision in self._node_map:
                raise UnknownDecision(f"{decision!r} is not a decision node")
            raise UnknownDecision(f"no decision {decision!r}")
        return self._constraint_map[decision]

    def cpt_factor(self, var: str) -> Factor:
        return self._cpt_factors[var]

    @cached_property
    def _cpt_factors(self) -> dict[str, Factor]:
        out = {}
        for c in self.cpts:
            scope = c.parents + (c.child,)
            frames = tuple(self.frame(v) for v in scope)
            child_frame = frames[-1]
            values = [
                c.rows[cfg][lab]
                for cfg in iter_configs(c.parents, self.frames)
                for lab in child_frame.labels
            ]
            out[c.child] = Factor.from_flat(scope, frames, values)
        return out

    @cached_property
    def value_factor(self) -> Factor:
        scope = self.value.parents
        frames = tuple(self.frame(v) for v in scope)
        values = [self.value.cells[cfg] for cfg in iter_configs(scope, self.frames)]
        return Factor.from_flat(scope, frames, values)

    # -- behaviour ---------------------------------------------------------

    def admissible(self, decision: str, config: Config) -> tuple[str, ...]:
        """Alternatives the constraint permits given `config`.

        `config` must assign a value to every variable in the constraint scope
        (it may assign more, e.g. the full parent configuration).
        """
        con = self.constraint(decision)
        key = []
        for v in con.scope:
            if v not in config:
                raise IncompleteConfig(
                    f"admissible({decision!r}) needs a value for {v!r}"
                )
            label = config[v]
            if label not in self.frame(v):
                raise ValueNotInFrame(f"{label!r} not in frame of {v!r}")
            key.append(label)
        return con.cells[tuple(key)]


# --------------------------------------------------------------------------
# construction / validation


def build_model(
    nodes: Iterable[NodeSpec],
    arrows: Iterable[ArrowSpec],
    cpts: Iterable[Cpt],
    constraints: Iterable[Constraint] = (),
    value_table: ValueTable | None = None,
    objective: str = MAXIMIZE,
) -> IridModel:
    """Assemble and fully validate a model.

    Raises a specific ModelError subclass for each violated invariant; on
    success every structural and numerical invariant holds and the model is
    immutable.
    """
    nodes = tuple(nodes)
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateVariable(f"duplicate node ids: {dupes}")
    known = set(ids)

    if objective not in OBJECTIVES:
        raise InvalidModel(f"objective must be one of {OBJECTIVES}, got {objective!r}")

    value_nodes = [n.id for n in nodes if n.kind == VALUE]
    if len(value_nodes) > 1:
        raise MultipleValueNodes(f"more than one value node: {value_nodes}")
    if not value_nodes:
        raise MissingValueNode("model needs exactly one value node")
    value_var = value_nodes[0]

    arrows = tuple(arrows)
    for a in arrows:
        for end in (a.source, a.target):
            if end not in known:
                raise UnknownVariable(f"arrow {a.source!r}->{a.target!r} references unknown {end!r}")
    if len({(a.source, a.target) for a in arrows}) != len(arrows):
        raise InvalidModel("duplicate arrows")

    node_index = {v: i for i, v in enumerate(ids)}
    arrows = tuple(
        sorted(arrows, key=lambda a: (node_index[a.target], node_index[a.source]))
    )

    g = nx.DiGraph()
    g.add_nodes_from(ids)
    g.add_edges_from((a.source, a.target) for a in arrows)
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise CycleDetected(f"cycle through {[e[0] for e in cycle]}")

    if g.out_degree(value_var) != 0:
        raise ValueNodeNotSink(f"value node {value_var!r} has outgoing arrows")

    parents = {v: tuple(sorted(g.predecessors(v), key=node_index.__getitem__)) for v in ids}
    kinds = {n.id: n.kind for n in nodes}
    frames = {n.id: n.frame for n in nodes if n.frame is not None}

    decision_ids = [n.id for n in nodes if n.kind == DECISION]
    dec_order = _decision_chain(decision_ids, g)
    _check_no_forgetting(dec_order, parents)

    # constraints: normalize, one per decision, auto-fill unconstrained
    con_map: dict[str, Constraint] = {}
    for con in constraints:
        if con.decision not in known or kinds[con.decision] != DECISION:
            raise UnknownDecision(f"constraint on non-decision {con.decision!r}")
        if con.decision in con_map:
            raise InvalidModel(f"duplicate constraint for {con.decision!r}")
        con_map[con.decision] = con
    for d in decision_ids:
        if d not in con_map:
            con_map[d] = Constraint(d, (), {(): tuple(frames[d].labels)})
    normalized_constraints = tuple(
        _validate_constraint(con_map[d], parents[d], frames) for d in dec_order
    )

    # arrow kinds follow from node kinds and constraint scopes
    scope_of = {c.decision: set(c.scope) for c in normalized_constraints}
    for a in arrows:
        target_kind = kinds[a.target]
        if target_kind in (CHANCE, VALUE):
            if a.kind != RELEVANCE:
                raise ArrowKindMismatch(
                    f"arrow {a.source!r}->{a.target!r} into a {target_kind} node must be relevance"
                )
        else:
            expected = RELEVANCE if a.source in scope_of[a.target] else INFORMATIONAL
            if a.kind != expected:
                raise ArrowKindMismatch(
                    f"arrow {a.source!r}->{a.target!r} must be {expected} "
                    f"(constraint scope of {a.target!r} is {sorted(scope_of[a.target])})"
                )

    # CPTs: exactly one per chance node, matching graph parents, normalized rows
    cpt_map: dict[str, Cpt] = {}
    for c in cpts:
        if c.child not in known:
            raise UnknownVariable(f"CPT for unknown variable {c.child!r}")
        if kinds[c.child] != CHANCE:
            raise InvalidModel(f"CPT given for non-chance node {c.child!r}")
        if c.child in cpt_map:
            raise InvalidModel(f"duplicate CPT for {c.child!r}")
        cpt_map[c.child] = c
    chance_ids = [n.id for n in nodes if n.kind == CHANCE]
    for v in chance_ids:
        if v not in cpt_map:
            raise CptParentsMismatch(f"chance node {v!r} has no CPT")
        _validate_cpt(cpt_map[v], parents[v], frames)
    ordered_cpts = tuple(cpt_map[v] for v in chance_ids)

    if value_table is None:
        raise InvalidModel("a value table is required")
    _validate_value_table(value_table, value_var, parents[value_var], frames)

    model = IridModel(
        nodes=nodes,
        arrows=arrows,
        cpts=ordered_cpts,
        constraints=normalized_constraints,
        value=value_table,
        objective=objective,
    )
    # force the decision order cache so later accessors agree with validation
    assert model.decisions == tuple(dec_order)
    return model


def _decision_chain(decision_ids: list[str], g: nx.DiGraph) -> list[str]:
    """Order decisions along the required decision-only path, or fail."""
    if len(decision_ids) <= 1:
        return list(decision_ids)
    sub = g.subgraph(decision_ids)
    order = list(nx.topological_sort(sub))
    for a, b in zip(order, order[1:]):
        if not sub.has_edge(a, b):
            raise DecisionsNotTotallyOrdered(
                f"no arrow between consecutive decisions {a!r} and {b!r}"
            )
    return order


def _check_no_forgetting(dec_order: list[str], parents: Mapping[str, tuple[str, ...]]):
    for earlier, later in zip(dec_order, dec_order[1:]):
        missing = set(parents[earlier]) - set(parents[later])
        if missing:
            raise NoForgettingViolated(
                f"{later!r} does not inherit parents {sorted(missing)} of {earlier!r}"
            )


def _validate_cpt(cpt: Cpt, graph_parents: tuple[str, ...], frames: Mapping[str, Frame]):
    if set(cpt.parents) != set(graph_parents):
        raise CptParentsMismatch(
            f"CPT for {cpt.child!r} declares parents {list(cpt.parents)}, "
            f"graph has {list(graph_parents)}"
        )
    if len(set(cpt.parents)) != len(cpt.parents):
        raise CptParentsMismatch(f"CPT for {cpt.child!r} repeats a parent")
    child_frame = frames[cpt.child]
    for cfg in iter_configs(cpt.parents, frames):
        if cfg not in cpt.rows:
            raise MissingTableEntry("cpt", cpt.child, cfg)
    for cfg, row in cpt.rows.items():
        if len(cfg) != len(cpt.parents):
            raise InvalidModel(f"CPT row key {cfg!r} does not match parents of {cpt.child!r}")
        for v, lab in zip(cpt.parents, cfg):
            if lab not in frames[v]:
                raise ValueNotInFrame(f"{lab!r} not in frame of {v!r} (CPT of {cpt.child!r})")
        if set(row) != set(child_frame.labels):
            extra = set(row) - set(child_frame.labels)
            if extra:
                raise ValueNotInFrame(
                    f"CPT row of {cpt.child!r} mentions {sorted(extra)} outside the frame"
                )
            raise CptRowNotNormalized(cpt.child, cfg, "missing probabilities")
        total = 0.0
        for lab in child_frame.labels:
            p = row[lab]
            if not (0.0 <= p <= 1.0):
                raise CptRowNotNormalized(cpt.child, cfg, f"P={p!r} outside [0,1]")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise CptRowNotNormalized(cpt.child, cfg, f"row sums to {total!r}")


def _validate_constraint(
    con: Constraint, dec_parents: tuple[str, ...], frames: Mapping[str, Frame]
) -> Constraint:
    extra = set(con.scope) - set(dec_parents)
    if extra:
        raise ConstraintScopeNotParents(
            f"constraint scope of {con.decision!r} includes non-parents {sorted(extra)}"
        )
    if len(set(con.scope)) != len(con.scope):
        raise ConstraintScopeNotParents(f"constraint scope of {con.decision!r} repeats a variable")
    dec_frame = frames[con.decision]
    cells = {}
    for cfg in iter_configs(con.scope, frames):
        if cfg not in con.cells:
            raise MissingTableEntry("constraint", con.decision, cfg)
    for cfg, allowed in con.cells.items():
        if len(cfg) != len(con.scope):
            raise InvalidModel(
                f"constraint cell key {cfg!r} does not match scope of {con.decision!r}"
            )
        for v, lab in zip(con.scope, cfg):
            if lab not in frames[v]:
                raise ValueNotInFrame(f"{lab!r} not in frame of {v!r} (constraint of {con.decision!r})")
        for alt in allowed:
            if alt not in dec_frame:
                raise ValueNotInFrame(
                    f"constraint of {con.decision!r} permits {alt!r} outside the frame"
                )
        ordered = tuple(lab for lab in dec_frame.labels if lab in set(allowed))
        if not ordered:
            raise EmptyConstraintCell(con.decision, cfg)
        cells[cfg] = ordered
    return Constraint(con.decision, con.scope, cells)


def _validate_value_table(
    vt: ValueTable, value_var: str, graph_parents: tuple[str, ...], frames: Mapping[str, Frame]
):
    if set(vt.parents) != set(graph_parents):
        raise InvalidModel(
            f"value table declares parents {list(vt.parents)}, graph has {list(graph_parents)}"
        )
    if len(set(vt.parents)) != len(vt.parents):
        raise InvalidModel("value table repeats a parent")
    for cfg in iter_configs(vt.parents, frames):
        if cfg not in vt.cells:
            raise MissingTableEntry("value", value_var, cfg)
    for cfg, v in vt.cells.items():
        if len(cfg) != len(vt.parents):
            raise InvalidModel(f"value cell key {cfg!r} does not match value parents")
        for var, lab in zip(vt.parents, cfg):
            if lab not in frames[var]:
                raise ValueNotInFrame(f"{lab!r} not in frame of {var!r} (value table)")
        if not math.isfinite(v):
            raise NonFiniteValue(f"value table entry at {cfg!r} is {v!r}")


# --------------------------------------------------------------------------
# operations


def admissible(model: IridModel, decision: str, parent_config: Config) -> tuple[str, ...]:
    """Alternatives permitted for `decision` under `parent_config` (never empty)."""
    return model.admissible(decision, parent_config)


def validate_policy(model: IridModel, policy: Policy) -> None:
    """Raise unless `policy` is a total, constraint-respecting decision function."""
    if policy.decision not in model.variables or model.kind(policy.decision) != DECISION:
        raise UnknownDecision(f"no decision {policy.decision!r}")
    want = set(model.parents(policy.decision))
    if set(policy.scope) != want:
        raise IncompletePolicy(
            f"policy scope for {policy.decision!r} is {sorted(policy.scope)}, "
            f"parents are {sorted(want)}"
        )
    frame = model.frame(policy.decision)
    for cfg in iter_configs(policy.scope, model.frames):
        if cfg not in policy.table:
            raise IncompletePolicy(f"policy for {policy.decision!r} misses {cfg!r}")
        chosen = policy.table[cfg]
        if chosen not in frame:
            raise ValueNotInFrame(f"policy picks {chosen!r} outside frame of {policy.decision!r}")
        allowed = model.admissible(policy.decision, dict(zip(policy.scope, cfg)))
        if chosen not in allowed:
            raise PolicyViolatesConstraint(
                f"policy picks {chosen!r} at {cfg!r} but constraint allows {list(allowed)}"
            )


def policy_to_conditional(model: IridModel, policy: Policy) -> Factor:
    """Zero-one conditional for a decision: each row is one-hot on the chosen alternative."""
    validate_policy(model, policy)
    dec = policy.decision
    frame = model.frame(dec)
    scope = policy.scope + (dec,)
    frames = tuple(model.frame(v) for v in scope)
    values = []
    for cfg in iter_configs(policy.scope, model.frames):
        chosen = policy.table[cfg]
        values.extend(1.0 if lab == chosen else 0.0 for lab in frame.labels)
    return Factor.from_flat(scope, frames, values)


@dataclass(frozen=True)
class BayesNetView:
    """The belief network obtained by fixing a policy for every decision.

    `conditionals` holds one probability factor per non-value variable (chance
    CPTs plus the zero-one policy conditionals); their product is the joint
    distribution.  The value table stays separate: it is real-valued, not a
    probability.
    """

    model: IridModel
    conditionals: Mapping[str, Factor]
    value_factor: Factor

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v in self.model.variables if v != self.model.value_var)

    def joint_probability(self, config: Config) -> float:
        p = 1.0
        for v in self.variables:
            p *= self.conditionals[v].evaluate(config)
            if p == 0.0:
                return 0.0
        return p


def fix_policies(model: IridModel, policies: Mapping[str, Policy]) -> BayesNetView:
    """Turn the diagram into a belief network by fixing one policy per decision."""
    conditionals: dict[str, Factor] = {v: model.cpt_factor(v) for v in model.chance_vars}
    for d in model.decisions:
        if d not in policies:
            raise MissingPolicy(d)
        conditionals[d] = policy_to_conditional(model, policies[d])
    return BayesNetView(model=model, conditionals=conditionals, value_factor=model.value_factor)
