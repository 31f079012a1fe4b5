"""Command-line interface.

    irid validate <model>
    irid solve    <model> --backend exact|gibbs [--seed N] [--burn-in N]
                  [--samples N] [--thinning N] [--objective max|min] [--crn]
                  --out <file>
    irid compare  <model> [sampler flags]
    irid oracle   <model>

Exit codes: 0 success (for compare: full policy agreement), 1 usage error,
2 model/validation error, 3 runtime error (budget exceeded, impossible
conditioning configuration).
"""

from __future__ import annotations

import argparse
import sys

from . import oracle as oracle_mod
from .errors import (
    AllZeroSupport,
    BudgetExceeded,
    IncompleteConfig,
    ModelError,
    ModelSyntaxError,
    NoPositiveState,
    SchemaError,
    StageOutOfRange,
    ValueNotInFrame,
    ZeroNormalizer,
)
from .gibbs import SamplerConfig
from .model import IridModel, Policy
from .modelfile import read_model, serialize_solution
from .solver import SolveOptions, solve

_VALIDATION_ERRORS = (ModelError, ModelSyntaxError, SchemaError, ValueNotInFrame, IncompleteConfig)
_RUNTIME_ERRORS = (BudgetExceeded, NoPositiveState, ZeroNormalizer, AllZeroSupport, StageOutOfRange)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for validation
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="irid", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("model")

    p = sub.add_parser("solve", help="compute optimal policies")
    p.add_argument("model")
    p.add_argument("--backend", required=True, choices=("exact", "gibbs"))
    _sampler_flags(p)
    p.add_argument("--objective", choices=("max", "min"))
    p.add_argument("--crn", action="store_true", help="common random numbers across alternatives")
    p.add_argument("--out", required=True, help="solution file to write")

    p = sub.add_parser("compare", help="run both backends and compare")
    p.add_argument("model")
    _sampler_flags(p)
    p.add_argument("--crn", action="store_true")

    p = sub.add_parser("oracle", help="exhaustive policy search")
    p.add_argument("model")
    return parser


def _sampler_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--thinning", type=int, default=1)


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        return _dispatch(args)
    except _VALIDATION_ERRORS as e:
        field = getattr(e, "field", None)
        loc = f" at {field}" if field else ""
        print(f"invalid model{loc}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"cannot read model: {e}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_cli())


def _dispatch(args) -> int:
    if args.command == "validate":
        read_model(args.model)
        print("OK")
        return 0
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "oracle":
        return _cmd_oracle(args)
    raise _UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def _sampler_from(args) -> SamplerConfig:
    return SamplerConfig(
        seed=args.seed, burn_in=args.burn_in, samples=args.samples, thinning=args.thinning
    )


def _cmd_solve(args) -> int:
    model = read_model(args.model)
    objective = {"max": "maximize", "min": "minimize", None: None}[args.objective]
    if args.backend == "gibbs":
        options = SolveOptions(
            backend="gibbs",
            sampler=_sampler_from(args),
            objective_override=objective,
            common_random_numbers=args.crn,
        )
    else:
        options = SolveOptions(backend="exact", objective_override=objective)
    solution = solve(model, options)
    with open(args.out, "wb") as fh:
        fh.write(serialize_solution(solution))
    _print_policies(model, solution.policies)
    se = solution.expected_value_std_error
    extra = f"  (std error {se:.2f}, n {solution.expected_value_n})" if se is not None else ""
    print(f"expected value: {solution.expected_value:.2f}{extra}")
    print(f"solution written to {args.out}")
    return 0


def _cmd_compare(args) -> int:
    model = read_model(args.model)
    exact_solution = solve(model, SolveOptions(backend="exact"))
    gibbs_solution = solve(
        model,
        SolveOptions(
            backend="gibbs", sampler=_sampler_from(args), common_random_numbers=args.crn
        ),
    )
    exact_by_key = {
        (d.stage, d.decision, d.config, d.alternative): d
        for d in exact_solution.per_cell_diagnostics
    }
    print("per-cell comparison (exact vs. estimate):")
    for d in gibbs_solution.per_cell_diagnostics:
        ex = exact_by_key.get((d.stage, d.decision, d.config, d.alternative))
        cfg = ",".join(f"{v}={lab}" for v, lab in d.config)
        exact_txt = "---" if ex is None or ex.value is None else f"{ex.value:>15.2f}"
        if d.value is None:
            est_txt = "---".rjust(15) + "  (zero-probability cell)"
        else:
            est_txt = f"{d.value:>15.2f}  se={d.std_error:>12.2f}"
        print(
            f"  stage {d.stage} {d.decision}({cfg}) {d.alternative:>8}  "
            f"exact={exact_txt}  estimate={est_txt}"
        )
    agree = True
    for dec, pol in exact_solution.policies.items():
        same = pol.table == gibbs_solution.policies[dec].table
        agree &= same
        print(f"policy for {dec}: {'agrees' if same else 'DIFFERS'}")
    print(
        f"expected value: exact={exact_solution.expected_value:.2f} "
        f"gibbs={gibbs_solution.expected_value:.2f}"
    )
    print("policies agree" if agree else "policies differ")
    return 0 if agree else 4


def _cmd_oracle(args) -> int:
    model = read_model(args.model)
    policies, value = oracle_mod.exhaustive_policy_search(model)
    _print_policies(model, policies)
    print(f"optimal expected value: {value:.2f}")
    return 0


def _print_policies(model: IridModel, policies: dict[str, Policy]) -> None:
    for dec, pol in policies.items():
        print(f"policy for {dec}" + (f"  (given {', '.join(pol.scope)})" if pol.scope else ""))
        widths = [
            max(len(v), max((len(cfg[i]) for cfg in pol.table), default=0))
            for i, v in enumerate(pol.scope)
        ]
        header = "  ".join(v.ljust(w) for v, w in zip(pol.scope, widths))
        if header:
            print(f"  {header}  -> choice")
        for cfg, alt in pol.table.items():
            row = "  ".join(lab.ljust(w) for lab, w in zip(cfg, widths))
            print(f"  {row}  -> {alt}")
