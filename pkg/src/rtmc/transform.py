"""Theory+formula transformations that reduce the two supported metric
classes to untimed LTL over a clock-extended theory.

Both transformations add one stopwatch object to the initial state, install
its time-elapse equation (saturating one past the largest bound, so the
extended theory stays finite-state), replace every instantaneous rule by
guarded variants that switch the stopwatch on and off from the rule's
source and target states, and rewrite the formula over a fresh
``clockLeq(b)`` proposition per bound.

Response class:  [] (\\/_i <>[<=b_i] q_i)   becomes  [] (\\/_i <> (q_i /\\ clockLeq(b_i)))
Safety class:    [] (p \\/ [][<=b] q)       becomes  [] (p \\/ (q W ~clockLeq(b)))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .config import (
    INF,
    OFF,
    ON,
    Clock,
    Configuration,
    ModelError,
    Time,
    find,
)
from .engine import TRIGGER_TRANSFORM, Rule, Theory
from .logic import (
    Always,
    And,
    BoundedAlways,
    BoundedEventually,
    Eventually,
    Formula,
    Labeling,
    Not,
    Or,
    Prop,
    PropDef,
    Response,
    Safety,
    WeakUntil,
    classify_mtl,
    clock_leq,
    eval_literal,
    is_literal,
)

CLOCK_ID = "__mtl_clock"

OVERLAP_DETERMINISTIC = "deterministic"
OVERLAP_PAPER_LITERAL = "paper-literal"


class ClockIdCollisionError(ModelError):
    pass


class NotTransformableError(ModelError):
    pass


@dataclass(frozen=True)
class ResponseSpec:
    pairs: Tuple[Tuple[Formula, int], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ModelError("response spec needs at least one obligation")
        for (q, b) in self.pairs:
            if not is_literal(q):
                raise ModelError(f"response obligation must be a literal: {q!r}")
            if not (isinstance(b, int) and b > 0):
                raise ModelError(f"bound must be a positive finite integer: {b!r}")

    @property
    def b_max(self) -> int:
        return max(b for (_q, b) in self.pairs)


@dataclass(frozen=True)
class SafetySpec:
    p: Formula
    q: Formula
    bound: int

    def __post_init__(self):
        for lit in (self.p, self.q):
            if not is_literal(lit):
                raise ModelError(f"safety atoms must be literals: {lit!r}")
        if not (isinstance(self.bound, int) and self.bound > 0):
            raise ModelError(f"bound must be a positive finite integer: {self.bound!r}")


@dataclass(frozen=True)
class TransformResult:
    theory: Theory
    initial: Configuration
    ltl: Formula
    clock_id: str


def spec_from_class(cls) -> object:
    if isinstance(cls, Response):
        return ResponseSpec(cls.pairs)
    if isinstance(cls, Safety):
        return SafetySpec(cls.p, cls.q, cls.bound)
    raise NotTransformableError(f"not a transformable class: {cls!r}")


def _clock_prop(clock_id: str, bound: int) -> PropDef:
    name = f"clockLeq({bound})"

    def fn(cfg: Configuration) -> bool:
        clock = cfg.get(clock_id)
        if clock is None:
            raise ModelError(f"state has no clock object {clock_id!r}")
        return clock.clock <= bound

    return PropDef(name, fn)


def _fresh_clock(initial: Configuration, clock_id: str, cap: int, status: str) -> Configuration:
    if find(initial, clock_id) is not None:
        raise ClockIdCollisionError(f"object id {clock_id!r} already in use")
    return initial.with_objects(Clock(clock_id, 0, status, cap))


def _set_clock(cfg: Configuration, clock_id: str, value: Time, status: str, cap: int) -> Configuration:
    return cfg.with_objects(Clock(clock_id, value, status, cap))


def transform_response(
    th: Theory,
    initial: Configuration,
    spec: ResponseSpec,
    clock_id: str = CLOCK_ID,
) -> TransformResult:
    """Single-clock reduction of [] (\\/_i <>[<=b_i] q_i).

    The clock runs exactly while the pending obligation window is open: it
    starts (from 0) on a step into a state satisfying no q_i, keeps running
    while every q_i is either unsatisfied or already past its bound, and
    stops on a step that discharges some q_i within its bound.
    """
    lab = th.labeling
    cap = spec.b_max
    sat0 = any(eval_literal(lab, q, initial) for (q, _b) in spec.pairs)
    initial2 = _fresh_clock(initial, clock_id, cap, OFF if sat0 else ON)

    def wrap(rule: Rule) -> List[Rule]:
        def make(variant: int) -> Rule:
            def apply(cfg: Configuration) -> List[Configuration]:
                clock = cfg.get(clock_id)
                out = []
                for succ in rule.apply(cfg):
                    sat = [eval_literal(lab, q, succ) for (q, _b) in spec.pairs]
                    if clock.status == OFF:
                        if variant == 1 and any(sat):
                            out.append(succ)  # clock untouched (stays off, 0)
                        elif variant == 2 and not any(sat):
                            out.append(_set_clock(succ, clock_id, 0, ON, cap))
                    else:
                        t = clock.clock
                        hit = any(
                            si and t <= b for si, (_q, b) in zip(sat, spec.pairs)
                        )
                        if variant == 3 and not hit:
                            out.append(succ)  # keeps running with value t
                        elif variant == 4 and hit:
                            out.append(_set_clock(succ, clock_id, 0, OFF, cap))
                return out

            return Rule(f"{rule.label}.r{variant}", TRIGGER_TRANSFORM, apply)

        return [make(v) for v in (1, 2, 3, 4)]

    rules = tuple(w for r in th.rules for w in wrap(r))
    labeling2 = lab.extend(*(_clock_prop(clock_id, b) for (_q, b) in spec.pairs))
    ltl: Formula = None
    for (q, b) in spec.pairs:
        disjunct = Eventually(And(q, clock_leq(b)))
        ltl = disjunct if ltl is None else Or(ltl, disjunct)
    return TransformResult(Theory(rules, labeling2), initial2, Always(ltl), clock_id)


def transform_safety(
    th: Theory,
    initial: Configuration,
    spec: SafetySpec,
    clock_id: str = CLOCK_ID,
    overlap: str = OVERLAP_DETERMINISTIC,
) -> TransformResult:
    """Single-clock reduction of [] (p \\/ [][<=b] q).

    The clock measures how long q has been holding since p last recovered
    from a violation episode: it starts on a step from a (~p & q)-state into
    a (p & q)-state, keeps running while successors satisfy p & q, and
    resets to off otherwise.

    As literally written, the stay-on rule overlaps the switch-off rule
    when the clock is on, the successor satisfies p & q and the source
    satisfies p.  The default resolves the overlap deterministically in
    favor of staying on (turning the clock off mid-count would discard the
    accumulated window); ``overlap='paper-literal'`` keeps both outcomes as
    nondeterministic alternatives for comparison.
    """
    if overlap not in (OVERLAP_DETERMINISTIC, OVERLAP_PAPER_LITERAL):
        raise ModelError(f"unknown overlap mode {overlap!r}")
    lab = th.labeling
    cap = spec.bound
    initial2 = _fresh_clock(initial, clock_id, cap, OFF)

    def wrap(rule: Rule) -> List[Rule]:
        def make(variant: int) -> Rule:
            def apply(cfg: Configuration) -> List[Configuration]:
                clock = cfg.get(clock_id)
                src_p = eval_literal(lab, spec.p, cfg)
                src_q = eval_literal(lab, spec.q, cfg)
                out = []
                for succ in rule.apply(cfg):
                    tgt_p = eval_literal(lab, spec.p, succ)
                    tgt_q = eval_literal(lab, spec.q, succ)
                    if overlap == OVERLAP_PAPER_LITERAL:
                        off_guard = (not tgt_p or not tgt_q) or (src_p or not src_q)
                        if variant == 1 and off_guard:
                            out.append(_set_clock(succ, clock_id, 0, OFF, cap))
                        elif variant == 2 and clock.status == OFF and not off_guard:
                            out.append(_set_clock(succ, clock_id, 0, ON, cap))
                        elif variant == 3 and clock.status == ON and tgt_p and tgt_q:
                            out.append(succ)
                    else:
                        if clock.status == ON and tgt_p and tgt_q:
                            chosen = 3
                        elif (
                            clock.status == OFF
                            and not src_p
                            and src_q
                            and tgt_p
                            and tgt_q
                        ):
                            chosen = 2
                        else:
                            chosen = 1
                        if variant == chosen:
                            if variant == 3:
                                out.append(succ)
                            elif variant == 2:
                                out.append(_set_clock(succ, clock_id, 0, ON, cap))
                            else:
                                out.append(_set_clock(succ, clock_id, 0, OFF, cap))
                return out

            return Rule(f"{rule.label}.r{variant}", TRIGGER_TRANSFORM, apply)

        return [make(v) for v in (1, 2, 3)]

    rules = tuple(w for r in th.rules for w in wrap(r))
    labeling2 = lab.extend(_clock_prop(clock_id, spec.bound))
    ltl = Always(Or(spec.p, WeakUntil(spec.q, Not(clock_leq(spec.bound)))))
    return TransformResult(Theory(rules, labeling2), initial2, ltl, clock_id)


def transform_formula(
    th: Theory,
    initial: Configuration,
    f: Formula,
    clock_id: str = CLOCK_ID,
    overlap: str = OVERLAP_DETERMINISTIC,
) -> TransformResult:
    """Classify and transform; raises NotTransformableError for formulas
    outside the two supported classes."""
    cls = classify_mtl(f)
    if isinstance(cls, Response):
        return transform_response(th, initial, ResponseSpec(cls.pairs), clock_id)
    if isinstance(cls, Safety):
        return transform_safety(
            th, initial, SafetySpec(cls.p, cls.q, cls.bound), clock_id, overlap
        )
    raise NotTransformableError(f"formula is not in a transformable class: {cls!r}")
