"""Single-site Gibbs sampler over a stage's factor set.

For a fixed configuration of the variables the stage's decision depends on
(and a fixed decision alternative), the chain sweeps the free variables in
model order, resampling each from its full conditional given everything else.
Averaging the value table over the visited states estimates the conditional
expectation of the value node for that cell.

Zeros in the tables are handled by support restriction, not smoothing: a full
conditional never proposes a zero-probability value, and initialization
forward-samples a positive-probability state (raising NoPositiveState when the
fixed configuration admits none).  Support restriction does not repair
reducibility: if table zeros split the positive support into disconnected
components (this can happen in the terminal, nothing-fixed chain after solved
decisions are substituted into the tables), a single chain explores only the
component it starts in.  Stage cells fix the variables the decision depends
on, which is what keeps desk-scale stage chains connected.

Reproducibility is strict: a given seed yields a bit-identical estimate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import AllZeroSupport, IncompleteConfig, InvalidModel, NoPositiveState
from .factors import Factor
from .graph_ops import ROLE_VALUE, StageContext

#: forward-sampling attempts before falling back to exhaustive search
_INIT_ATTEMPTS = 100

#: number of batches for the batch-means standard error
_BATCHES = 20


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length knobs.  `samples` sweeps are run after `burn_in`; every
    `thinning`-th one contributes to the estimate."""

    seed: int
    burn_in: int = 1000
    samples: int = 20000
    thinning: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise InvalidModel("burn_in must be >= 0")
        if self.samples < 1:
            raise InvalidModel("samples must be >= 1")
        if self.thinning < 1:
            raise InvalidModel("thinning must be >= 1")
        if self.samples // self.thinning < 1:
            raise InvalidModel("samples // thinning must be >= 1")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int


@dataclass(frozen=True)
class ChainState:
    """Current assignment of the free variables plus the fixed conditioning
    configuration.  The product of the probability factors at
    assignment | fixed is strictly positive."""

    assignment: Mapping[str, str]
    fixed: Mapping[str, str]
    _cell: "_CompiledCell" = field(repr=False, compare=False)
    _ints: tuple[int, ...] = field(repr=False, compare=False)


class _CompiledFactor:
    """A factor flattened to a list with integer strides, with the fixed
    variables' contribution folded into a constant offset."""

    __slots__ = ("flat", "free_pairs", "base")

    def __init__(self, factor: Factor, slot_of: dict[str, int], fixed_ints: dict[int, int]):
        arr = factor.values
        strides = [s // arr.itemsize for s in arr.strides]
        self.flat = arr.ravel().tolist()
        base = 0
        free_pairs: list[tuple[int, int]] = []
        for var, stride in zip(factor.scope, strides):
            if var not in slot_of:
                raise IncompleteConfig(f"factor variable {var!r} is neither free nor fixed")
            slot = slot_of[var]
            if slot in fixed_ints:
                base += stride * fixed_ints[slot]
            else:
                free_pairs.append((slot, stride))
        self.base = base
        self.free_pairs = tuple(free_pairs)

    def value_at(self, state: list[int]) -> float:
        off = self.base
        for slot, stride in self.free_pairs:
            off += stride * state[slot]
        return self.flat[off]


class _CompiledCell:
    """Stage factors compiled against one fixed configuration."""

    def __init__(
        self,
        ctx: StageContext,
        fixed_config: Mapping[str, str],
        value_factor: Factor | None = None,
    ):
        self.ctx = ctx
        needed = set(ctx.dependency_set)
        if ctx.decision is not None:
            needed.add(ctx.decision)
        missing = needed - set(fixed_config)
        if missing:
            raise IncompleteConfig(f"fixed configuration misses {sorted(missing)}")

        self.free = ctx.free_vars
        self.frames = tuple(ctx.cpt_of(v).frame_of(v) for v in self.free)
        self.sizes = tuple(len(f) for f in self.frames)
        slot_of = {v: i for i, v in enumerate(self.free)}
        fixed_ints: dict[int, int] = {}
        next_slot = len(self.free)
        self.fixed_labels: dict[str, str] = {}
        for var, lab in fixed_config.items():
            if var in slot_of:
                raise IncompleteConfig(f"{var!r} is free in this stage, cannot be fixed")
            slot_of[var] = next_slot
            self.fixed_labels[var] = lab
            next_slot += 1

        # resolve fixed labels to indices lazily per factor scope (frames live
        # on the factors themselves)
        prob = []
        self.per_var: list[list[tuple[_CompiledFactor, int]]] = [[] for _ in self.free]
        for f in [sf.factor for sf in ctx.factors if sf.role != ROLE_VALUE]:
            cf = self._compile(f, slot_of)
            prob.append(cf)
            for var, stride in zip(f.scope, self._strides(f)):
                if var in slot_of and slot_of[var] < len(self.free):
                    self.per_var[slot_of[var]].append((cf, stride))
        self.prob_factors = prob

        # the free variables' own conditionals, for forward initialization
        self.cpt_for = []
        for i, v in enumerate(self.free):
            f = ctx.cpt_of(v)
            cf = self._compile(f, slot_of)
            stride = dict(zip(f.scope, self._strides(f)))[v]
            self.cpt_for.append((cf, stride))

        self.value = None
        if value_factor is not None:
            self.value = self._compile(value_factor, slot_of)
        self.topo_slots = tuple(slot_of[v] for v in ctx.free_topological)
        self._slot_of = slot_of

    @staticmethod
    def _strides(factor: Factor) -> list[int]:
        arr = factor.values
        return [s // arr.itemsize for s in arr.strides]

    def _compile(self, factor: Factor, slot_of: dict[str, int]) -> _CompiledFactor:
        fixed_ints = {}
        for var, fr in zip(factor.scope, factor.frames):
            slot = slot_of.get(var)
            if slot is None:
                raise IncompleteConfig(f"factor variable {var!r} is neither free nor fixed")
            if slot >= len(self.free):
                fixed_ints[slot] = fr.index(self.fixed_labels[var])
        return _CompiledFactor(factor, slot_of, fixed_ints)

    # -- core moves --------------------------------------------------------

    def conditional_weights(self, slot: int, state: list[int]) -> list[float]:
        size = self.sizes[slot]
        weights: list[float] | None = None
        for cf, stride in self.per_var[slot]:
            off = cf.base
            for s, st in cf.free_pairs:
                if s != slot:
                    off += st * state[s]
            flat = cf.flat
            if weights is None:
                weights = [flat[off + stride * j] for j in range(size)]
            else:
                for j in range(size):
                    weights[j] *= flat[off + stride * j]
        if weights is None:
            # no probability factor contains the variable: uniform over frame
            weights = [1.0] * size
        return weights

    @staticmethod
    def pick(weights: list[float], u: float) -> int:
        total = 0.0
        for w in weights:
            total += w
        if total <= 0.0:
            raise AllZeroSupport("all candidate values have factor product zero")
        r = u * total
        acc = 0.0
        chosen = -1
        last_pos = -1
        for j, w in enumerate(weights):
            if w > 0.0:
                acc += w
                last_pos = j
                if r < acc:
                    chosen = j
                    break
        return chosen if chosen >= 0 else last_pos

    def sweep(self, state: list[int], uniforms: list[float], offset: int = 0) -> int:
        """One scan over the free variables; consumes exactly one uniform per
        variable starting at `offset` and returns the new offset."""
        per_var = self.per_var
        sizes = self.sizes
        for slot in range(len(self.free)):
            u = uniforms[offset]
            offset += 1
            size = sizes[slot]
            weights: list[float] | None = None
            for cf, stride in per_var[slot]:
                off = cf.base
                for s, st in cf.free_pairs:
                    if s != slot:
                        off += st * state[s]
                flat = cf.flat
                if weights is None:
                    weights = [flat[off + stride * j] for j in range(size)]
                else:
                    for j in range(size):
                        weights[j] *= flat[off + stride * j]
            if weights is None:
                weights = [1.0] * size
            # inverse-CDF pick restricted to the positive support
            total = 0.0
            for w in weights:
                total += w
            if total <= 0.0:
                raise AllZeroSupport("all candidate values have factor product zero")
            r = u * total
            acc = 0.0
            chosen = -1
            last_pos = -1
            for j, w in enumerate(weights):
                if w > 0.0:
                    acc += w
                    last_pos = j
                    if r < acc:
                        chosen = j
                        break
            state[slot] = chosen if chosen >= 0 else last_pos
        return offset

    def product_at(self, state: list[int]) -> float:
        p = 1.0
        for cf in self.prob_factors:
            p *= cf.value_at(state)
            if p == 0.0:
                return 0.0
        return p

    def forward_sample(self, uniforms: list[float]) -> list[int]:
        state = [0] * len(self.free)
        for slot in self.topo_slots:
            cf, stride = self.cpt_for[slot]
            off = cf.base
            for s, st in cf.free_pairs:
                if s != slot:
                    off += st * state[s]
            flat = cf.flat
            weights = [flat[off + stride * j] for j in range(self.sizes[slot])]
            state[slot] = self.pick(weights, uniforms[slot])
        return state

    def initial_state(self, rng: np.random.Generator) -> list[int]:
        n = len(self.free)
        if n == 0:
            if self.product_at([]) <= 0.0:
                raise NoPositiveState("fixed configuration has zero factor product")
            return []
        for _ in range(_INIT_ATTEMPTS):
            state = self.forward_sample(rng.random(n).tolist())
            if self.product_at(state) > 0.0:
                return state
        for combo in itertools.product(*(range(s) for s in self.sizes)):
            state = list(combo)
            if self.product_at(state) > 0.0:
                return state
        raise NoPositiveState(
            "no positive-probability completion of the fixed configuration exists"
        )

    def labels(self, state: list[int]) -> dict[str, str]:
        return {
            v: fr.labels[state[i]] for i, (v, fr) in enumerate(zip(self.free, self.frames))
        }

    def value_at(self, state: list[int]) -> float:
        if self.value is None:
            raise InvalidModel("cell compiled without a value factor")
        return self.value.value_at(state)


# --------------------------------------------------------------------------
# public operations


def init_state(
    stage_context: StageContext,
    fixed_config: Mapping[str, str],
    rng: np.random.Generator,
) -> ChainState:
    """Forward-sample the free variables (topological order, zero-probability
    values excluded) into a state with positive factor product."""
    cell = _CompiledCell(stage_context, fixed_config)
    ints = cell.initial_state(rng)
    return ChainState(
        assignment=cell.labels(ints),
        fixed=dict(fixed_config),
        _cell=cell,
        _ints=tuple(ints),
    )


def sweep(
    state: ChainState, stage_context: StageContext, rng: np.random.Generator
) -> ChainState:
    """Resample every free variable once, in model order, from its full
    conditional given all other current values."""
    cell = state._cell
    ints = list(state._ints)
    n = len(cell.free)
    if n:
        cell.sweep(ints, rng.random(n).tolist(), 0)
    return ChainState(
        assignment=cell.labels(ints), fixed=state.fixed, _cell=cell, _ints=tuple(ints)
    )


def estimate_expectation(
    stage_context: StageContext,
    fixed_config: Mapping[str, str],
    value_factor: Factor,
    sampler_config: SamplerConfig,
) -> Estimate:
    """Estimate the conditional expectation of the value factor.

    Runs `burn_in` discard sweeps, then `samples` sweeps keeping every
    `thinning`-th state; the value factor is evaluated at each kept state
    composed with the fixed configuration.  The standard error comes from
    batch means over 20 equal batches.
    """
    cell = _CompiledCell(stage_context, fixed_config, value_factor=value_factor)
    rng = np.random.default_rng(sampler_config.seed)
    state = cell.initial_state(rng)
    n_free = len(cell.free)
    cfg = sampler_config

    kept = np.empty(cfg.samples // cfg.thinning, dtype=float)
    k = 0
    if n_free:
        # uniforms are drawn in exact-size blocks, so the stream matches a
        # chain driven by repeated single sweeps with the same seed
        csweep = cell.sweep
        value = cell.value
        thin = cfg.thinning
        burn = cfg.burn_in
        total = burn + cfg.samples
        block_sweeps = max(1, 65536 // n_free)
        done = 0
        while done < total:
            count = min(block_sweeps, total - done)
            uniforms = rng.random(count * n_free).tolist()
            offset = 0
            for j in range(count):
                offset = csweep(state, uniforms, offset)
                i = done + j + 1
                if i > burn and (i - burn) % thin == 0:
                    if __debug__ and k % 64 == 0 and cell.product_at(state) <= 0.0:
                        raise AllZeroSupport("chain reached a zero-probability state")
                    kept[k] = value.value_at(state)
                    k += 1
            done += count
    else:
        kept[:] = cell.value_at(state)
        k = len(kept)
    assert k == len(kept)
    mean = float(kept.mean())
    return Estimate(mean=mean, std_error=_batch_means_se(kept), n=len(kept))


def _batch_means_se(values: np.ndarray) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    b = min(_BATCHES, n)
    m = n // b
    batch_means = values[: b * m].reshape(b, m).mean(axis=1)
    return float(batch_means.std(ddof=1) / math.sqrt(b))
