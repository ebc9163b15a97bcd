"""Command-line front end.

Subcommands: ``check`` (classify, transform when needed, model-check),
``explore`` (state-graph statistics, optional DOT dump), ``simulate``
(seeded random walk) and ``transform`` (show the clock-extended theory).
Exit codes: 0 property holds, 1 counterexample found, 2 error or
unsupported input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time as _time
from typing import Optional, Tuple

from .advert import AdvertParams, build_advert_theory
from .config import Clock, ModelError, format_config
from .engine import DEFAULT_MAX_STATES, Theory, TimedKripke, explore, successors
from .logic import (
    PureLtl,
    Response,
    Safety,
    Unsupported,
    classify_mtl,
    parse_formula,
    pretty,
)
from .ltlmc import Counterexample, Holds, model_check_ltl
from .oracle import check_mtl_exhaustive
from .transform import OVERLAP_DETERMINISTIC, transform_formula

EXIT_HOLDS = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_ERROR = 2


def _default_max_states() -> int:
    env = os.environ.get("RTMC_MAX_STATES")
    return int(env) if env else DEFAULT_MAX_STATES


def _load_model(args) -> Tuple[Theory, object]:
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            params = AdvertParams.from_json(fh.read())
        return build_advert_theory(params)
    if args.model != "advert":
        raise ModelError(f"unknown builtin model {args.model!r}")
    return build_advert_theory(AdvertParams())


def _emit(args, payload: dict, text: str) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def cmd_check(args) -> int:
    theory, initial = _load_model(args)
    f = parse_formula(args.formula)
    cls = classify_mtl(f)
    if isinstance(cls, Unsupported):
        print(f"unsupported formula: {cls.reason}", file=sys.stderr)
        return EXIT_ERROR
    t0 = _time.perf_counter()
    checked = pretty(f)
    if args.engine == "oracle":
        k = explore(theory, initial, max_states=args.max_states)
        verdict = check_mtl_exhaustive(k, f)
    elif isinstance(cls, PureLtl):
        k = explore(theory, initial, max_states=args.max_states)
        verdict = model_check_ltl(k, f)
    else:
        result = transform_formula(theory, initial, f, overlap=args.safety_overlap)
        k = explore(result.theory, result.initial, max_states=args.max_states)
        verdict = model_check_ltl(k, result.ltl)
        checked = pretty(result.ltl)
    elapsed = _time.perf_counter() - t0
    if args.dump_graph:
        with open(args.dump_graph, "w", encoding="utf-8") as fh:
            fh.write(k.to_dot())
    payload = verdict.to_json()
    payload.update(
        {
            "formula": args.formula,
            "checked": checked,
            "engine": args.engine,
            "states": k.n_states(),
            "transitions": k.n_transitions(),
            "seconds": round(elapsed, 3),
        }
    )
    if isinstance(verdict, Holds):
        _emit(args, payload, f"holds  ({k.n_states()} states, {elapsed:.2f}s)")
        return EXIT_HOLDS
    lines = [f"counterexample  ({k.n_states()} states, {elapsed:.2f}s)"]
    for part, steps in (("prefix", verdict.prefix), ("loop", verdict.loop)):
        lines.append(f"  {part}:")
        for (s, d) in steps:
            lines.append(f"    state {s}  +{d}ms  {{{','.join(sorted(k.labels[s]))}}}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_COUNTEREXAMPLE


def cmd_explore(args) -> int:
    theory, initial = _load_model(args)
    clock_id = None
    if args.formula:
        f = parse_formula(args.formula)
        cls = classify_mtl(f)
        if isinstance(cls, (Response, Safety)):
            result = transform_formula(theory, initial, f, overlap=args.safety_overlap)
            theory, initial, clock_id = result.theory, result.initial, result.clock_id
    k = explore(theory, initial, max_states=args.max_states)
    payload = {
        "states": k.n_states(),
        "transitions": k.n_transitions(),
        "terminal_states": len(k.terminal_states()),
    }
    lines = [
        f"states: {k.n_states()}",
        f"transitions: {k.n_transitions()}",
        f"terminal states: {len(k.terminal_states())}",
    ]
    if clock_id is not None:
        max_clock = max(s.get(clock_id).clock for s in k.states)
        payload["max_clock"] = max_clock
        lines.append(f"max clock value: {max_clock}")
    if args.dump_graph:
        with open(args.dump_graph, "w", encoding="utf-8") as fh:
            fh.write(k.to_dot())
        lines.append(f"graph written to {args.dump_graph}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_HOLDS


def cmd_simulate(args) -> int:
    theory, initial = _load_model(args)
    rng = random.Random(args.seed)
    cfg = initial
    elapsed = 0
    print(f"seed={args.seed} steps={args.steps}")
    for step in range(args.steps):
        options = successors(theory, cfg)
        label, dur, nxt = rng.choice(options)
        elapsed += dur
        labs = ",".join(sorted(theory.labeling.state_labels(nxt)))
        print(f"[{step:3d}] +{dur:>5}ms  {label:<24} t={elapsed:<7} {{{labs}}}")
        cfg = nxt
    print(f"total elapsed: {elapsed}ms")
    return EXIT_HOLDS


def cmd_transform(args) -> int:
    theory, initial = _load_model(args)
    f = parse_formula(args.formula)
    cls = classify_mtl(f)
    if isinstance(cls, Unsupported):
        print(f"unsupported formula: {cls.reason}", file=sys.stderr)
        return EXIT_ERROR
    if isinstance(cls, PureLtl):
        print("no transformation needed (pure LTL)")
        return EXIT_HOLDS
    result = transform_formula(theory, initial, f, overlap=args.safety_overlap)
    print(f"formula: {pretty(result.ltl)}")
    print(f"rules: {len(result.theory.rules)} (from {len(theory.rules)})")
    if args.dump:
        for r in result.theory.rules:
            print(f"  [{r.label}]")
        print("initial state:")
        print(format_config(result.initial, indent=1))
    return EXIT_HOLDS


def _add_model_args(p) -> None:
    p.add_argument("--model", default="advert", help="builtin model name")
    p.add_argument("--params", help="JSON parameter file overriding the builtin")
    p.add_argument(
        "--max-states",
        type=int,
        default=_default_max_states(),
        help="state cap for exploration (env RTMC_MAX_STATES)",
    )
    p.add_argument(
        "--safety-overlap",
        choices=("deterministic", "paper-literal"),
        default=OVERLAP_DETERMINISTIC,
        help="resolution of the overlapping safety clock rules",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rtmc",
        description="Timed component-system verifier (metric formulas via clock transformation)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="model-check a formula")
    _add_model_args(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--engine", choices=("ltl", "oracle"), default="ltl")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--dump-graph", help="write the explored graph as DOT")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("explore", help="explore the state graph and print statistics")
    _add_model_args(p)
    p.add_argument("--formula", help="transform for this formula before exploring")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--dump-graph", help="write the explored graph as DOT")
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("simulate", help="seeded random walk")
    _add_model_args(p)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("transform", help="show the clock-extended theory")
    _add_model_args(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--dump", action="store_true", help="print rules and initial state")
    p.set_defaults(fn=cmd_transform)

    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
