"""Random timed theories, Kripke structures and formulas for the
equivalence and checker-agreement suites.

Generated theories are flat (bare ports and timers, no connectors), with
every rule triggered by a timer hitting zero, so they are time-robust by
construction, and all propositions are port values, so they never change
under time elapse.  That matches the precondition under which the clock
transformations are exact.
"""

from __future__ import annotations

import random
from typing import List, Optional, Tuple

from .config import INF, Configuration, Port, Timer
from .engine import TRIGGER_TIMER, Rule, StateSpaceOverflow, Theory, TimedKripke, explore
from .logic import (
    And,
    Always,
    Eventually,
    Formula,
    Labeling,
    Not,
    Or,
    Prop,
    PropDef,
    Until,
    WeakUntil,
)
from .transform import ResponseSpec, SafetySpec


def _port_prop(pid: str) -> PropDef:
    return PropDef(pid, lambda cfg, pid=pid: cfg.get(pid).value)


def random_theory(
    rng: random.Random,
    max_objects: int = 6,
    max_rules: int = 4,
    max_states: int = 50,
    max_attempts: int = 50,
) -> Tuple[Theory, Configuration, TimedKripke]:
    """A small flat theory whose explored graph fits in ``max_states``;
    regenerates until exploration closes within the cap."""
    for _attempt in range(max_attempts):
        n_ports = rng.randint(1, 3)
        n_timers = rng.randint(1, min(3, max_objects - n_ports))
        port_ids = [f"p{i}" for i in range(n_ports)]
        timer_ids = [f"t{i}" for i in range(n_timers)]
        objs: List = [Port(pid, rng.random() < 0.5) for pid in port_ids]
        objs += [Timer(tid, rng.choice([0, 1, 2, 3, 5, 8])) for tid in timer_ids]
        initial = Configuration(objs)

        rules = []
        for ri in range(rng.randint(1, max_rules)):
            trigger = rng.choice(timer_ids)
            guard: Optional[Tuple[str, bool]] = None
            if rng.random() < 0.3:
                guard = (rng.choice(port_ids), rng.random() < 0.5)
            reset = rng.choice([1, 2, 3, 5, 8, INF])
            effects = []
            for pid in rng.sample(port_ids, rng.randint(1, n_ports)):
                effects.append((pid, rng.choice(["true", "false", "toggle"])))

            def apply(
                cfg: Configuration,
                trigger=trigger,
                guard=guard,
                reset=reset,
                effects=tuple(effects),
            ) -> List[Configuration]:
                if cfg.get(trigger).value != 0:
                    return []
                if guard is not None and cfg.get(guard[0]).value != guard[1]:
                    return []
                new_objs = [Timer(trigger, reset)]
                for (pid, eff) in effects:
                    old = cfg.get(pid).value
                    val = not old if eff == "toggle" else (eff == "true")
                    new_objs.append(Port(pid, val))
                succ = cfg.with_objects(*new_objs)
                return [] if succ == cfg else [succ]

            rules.append(Rule(f"r{ri}", TRIGGER_TIMER, apply))

        labeling = Labeling(tuple(_port_prop(pid) for pid in port_ids))
        theory = Theory(tuple(rules), labeling)
        try:
            k = explore(theory, initial, max_states=max_states)
        except StateSpaceOverflow:
            continue
        return theory, initial, k
    raise RuntimeError("could not generate a theory within the state cap")


def _random_literal(rng: random.Random, names) -> Formula:
    p = Prop(rng.choice(list(names)))
    return Not(p) if rng.random() < 0.5 else p


def random_response_spec(rng: random.Random, names, max_bound: int = 20) -> ResponseSpec:
    pairs = tuple(
        (_random_literal(rng, names), rng.randint(1, max_bound))
        for _ in range(rng.randint(1, 3))
    )
    return ResponseSpec(pairs)


def random_safety_spec(rng: random.Random, names, max_bound: int = 20) -> SafetySpec:
    return SafetySpec(
        _random_literal(rng, names),
        _random_literal(rng, names),
        rng.randint(1, max_bound),
    )


# ---------------------------------------------------------------------------
# Untimed Kripke structures and LTL formulas (checker agreement suite)

KRIPKE_PROPS = ("p", "q", "r")


def random_kripke(rng: random.Random, max_states: int = 8) -> TimedKripke:
    n = rng.randint(1, max_states)
    labels = [
        frozenset(p for p in KRIPKE_PROPS if rng.random() < 0.4) for _ in range(n)
    ]
    adj = []
    for i in range(n):
        out = sorted(rng.sample(range(n), rng.randint(1, min(2, n))))
        adj.append([(j, 0, "step") for j in out])
    return TimedKripke(list(range(n)), 0, adj, labels, KRIPKE_PROPS)


def random_ltl(rng: random.Random, depth: int = 3) -> Formula:
    if depth <= 0 or rng.random() < 0.2:
        return _random_literal(rng, KRIPKE_PROPS)
    op = rng.choice(["not", "and", "or", "until", "wuntil", "always", "eventually"])
    if op == "not":
        return Not(random_ltl(rng, depth - 1))
    if op == "always":
        return Always(random_ltl(rng, depth - 1))
    if op == "eventually":
        return Eventually(random_ltl(rng, depth - 1))
    left = random_ltl(rng, depth - 1)
    right = random_ltl(rng, depth - 1)
    if op == "and":
        return And(left, right)
    if op == "or":
        return Or(left, right)
    if op == "until":
        return Until(left, right)
    return WeakUntil(left, right)
