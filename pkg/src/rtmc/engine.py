"""Rewrite engine: one-step successors under maximal time sampling and
explicit-state exploration of the timed state graph.

A theory is a finite set of labeled instantaneous rules (host-level guarded
functions) plus the single built-in tick.  The tick advances time by exactly
``mte`` of the current configuration and is only enabled in consistent
states with a finite positive deadline.  Instantaneous rules and the tick
coexist as nondeterministic alternatives; states with no successor at all
get a zero-duration self-loop so the transition relation stays total.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as _dc_replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .config import (
    INF,
    BasicComponent,
    Clock,
    Configuration,
    Connector,
    DelegateConnector,
    HierComponent,
    ModelError,
    Object,
    Port,
    Time,
    TimedComponent,
    canonicalize,
    components,
    consistent,
    consistent_component,
    delta,
    find,
    has_expired_timer,
    lookup,
    mte,
    replace_deep,
    strip_object,
)
from .logic import Labeling

TICK_LABEL = "tick"
IDLE_LABEL = "idle"

TRIGGER_TIMER = "timer-expiry"
TRIGGER_CONSISTENCY = "consistency-restoring"
TRIGGER_TRANSFORM = "transformation-internal"

DEFAULT_MAX_STATES = 1_000_000

#: Component behavior hook: reacts to a change of a component's required
#: ports, returning the updated component (identity by default).
Behavior = Callable[[Object], Object]


class StateSpaceOverflow(ModelError):
    def __init__(self, count: int, sample: Configuration):
        super().__init__(f"state space exceeded {count} states")
        self.count = count
        self.sample = sample


class LiftError(ModelError):
    pass


@dataclass(frozen=True)
class Rule:
    """Labeled instantaneous rule.

    ``apply`` returns one successor per distinct match (empty when the rule
    does not apply) and must be deterministic in its input; it never returns
    the input configuration itself.
    """

    label: str
    trigger: str
    apply: Callable[[Configuration], List[Configuration]]


@dataclass(frozen=True)
class Theory:
    rules: Tuple[Rule, ...]
    labeling: Labeling

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            if r.label in seen:
                raise ModelError(f"duplicate rule label {r.label!r}")
            seen.add(r.label)

    def rule(self, label: str) -> Rule:
        for r in self.rules:
            if r.label == label:
                return r
        raise ModelError(f"no rule labeled {label!r}")


def instantaneous_successors(
    th: Theory, c: Configuration
) -> List[Tuple[str, Configuration]]:
    out = []
    seen = set()
    for r in th.rules:
        for succ in r.apply(c):
            if succ == c:
                raise ModelError(f"rule {r.label!r} returned its input unchanged")
            k = (r.label, succ.key)
            if k not in seen:
                seen.add(k)
                out.append((r.label, succ))
    return out


def tick_successor(
    th: Theory, c: Configuration
) -> Optional[Tuple[Time, Configuration]]:
    """Maximal time sampling: advance by exactly mte(c), only from
    consistent states with 0 < mte < INF."""
    if not consistent(c):
        return None
    m = mte(c)
    if m == 0 or m == INF:
        return None
    return (m, delta(c, m))


def successors(
    th: Theory, c: Configuration
) -> List[Tuple[str, Time, Configuration]]:
    out = [(label, 0, succ) for label, succ in instantaneous_successors(th, c)]
    tick = tick_successor(th, c)
    if tick is not None:
        out.append((TICK_LABEL, tick[0], tick[1]))
    if not out:
        out.append((IDLE_LABEL, 0, c))
    return out


# ---------------------------------------------------------------------------
# Explored graph


@dataclass
class TimedKripke:
    """Finite explored state graph with per-transition durations and
    per-state proposition labels."""

    states: List[Configuration]
    initial: int
    adj: List[List[Tuple[int, Time, str]]]  # per-state (target, duration, label)
    labels: List[frozenset]
    prop_names: Tuple[str, ...]

    def n_states(self) -> int:
        return len(self.states)

    def n_transitions(self) -> int:
        return sum(len(a) for a in self.adj)

    def transitions(self):
        for i, edges in enumerate(self.adj):
            for (j, dur, label) in edges:
                yield (i, j, dur, label)

    def terminal_states(self) -> List[int]:
        return [
            i
            for i, edges in enumerate(self.adj)
            if len(edges) == 1 and edges[0][0] == i and edges[0][2] == IDLE_LABEL
        ]

    def to_dot(self) -> str:
        lines = ["digraph timed_kripke {"]
        for i in range(len(self.states)):
            labs = ",".join(sorted(self.labels[i]))
            shape = ' shape=doublecircle' if i == self.initial else ""
            lines.append(f'  s{i} [label="{i}\\n{{{labs}}}"{shape}];')
        for (i, j, dur, label) in self.transitions():
            lines.append(f'  s{i} -> s{j} [label="{label}/{dur}"];')
        lines.append("}")
        return "\n".join(lines)


def explore(
    th: Theory, initial: Configuration, max_states: int = DEFAULT_MAX_STATES
) -> TimedKripke:
    """BFS over canonicalized states until closure.

    Deterministic: rule order and the canonical object ordering fix the
    state numbering, so repeated runs produce identical graphs.
    """
    if max_states <= 0:
        raise ModelError("max_states must be > 0")
    index = {canonicalize(initial): 0}
    states = [initial]
    adj: List[List[Tuple[int, Time, str]]] = []
    frontier = 0
    while frontier < len(states):
        c = states[frontier]
        edges = []
        for (label, dur, succ) in successors(th, c):
            k = canonicalize(succ)
            j = index.get(k)
            if j is None:
                if len(states) >= max_states:
                    raise StateSpaceOverflow(len(states), succ)
                j = len(states)
                index[k] = j
                states.append(succ)
            edges.append((j, dur, label))
        adj.append(edges)
        frontier += 1
    labels = [th.labeling.state_labels(c) for c in states]
    return TimedKripke(states, 0, adj, labels, th.labeling.names())


# ---------------------------------------------------------------------------
# Generic connector rules


def _find_port_owner(cfg: Configuration, port_id: str, attr: str):
    """Component at this level owning ``port_id`` in its ``attr`` scope."""
    for comp in components(cfg):
        if getattr(comp, attr).get(port_id) is not None:
            return comp
    return None


def _apply_transmit(cfg: Configuration, beh: Behavior) -> List[Configuration]:
    out = []
    for obj in cfg:
        if not isinstance(obj, Connector):
            continue
        src_owner = _find_port_owner(cfg, obj.source, "prov")
        tgt_owner = _find_port_owner(cfg, obj.target, "req")
        if src_owner is None or tgt_owner is None:
            continue
        src = src_owner.prov.get(obj.source)
        tgt = tgt_owner.req.get(obj.target)
        if src.value == tgt.value:
            continue
        if not consistent_component(tgt_owner):
            continue
        new_req = tgt_owner.req.with_objects(Port(tgt.id, src.value))
        new_tgt = beh(_dc_replace(tgt_owner, req=new_req))
        out.append(cfg.with_objects(new_tgt))
    return out


def make_transmit_rule(beh: Behavior, label: str = "transmit") -> Rule:
    """Value transmission along a same-level connector: when the provided
    and required port values differ and the receiving component is
    internally consistent, copy the value and let the receiver react."""
    return Rule(label, TRIGGER_CONSISTENCY, lambda c: _apply_transmit(c, beh))


def _delegate_matches(cfg: Configuration):
    for h in cfg:
        if not isinstance(h, HierComponent):
            continue
        for d in h.assembly:
            if isinstance(d, DelegateConnector):
                yield h, d


def _apply_delegate_in(cfg: Configuration, beh: Behavior) -> List[Configuration]:
    # outer required port -> required port of an inner component
    out = []
    for h, d in _delegate_matches(cfg):
        src = h.req.get(d.source)
        inner = _find_port_owner(h.assembly, d.target, "req")
        if src is None or inner is None:
            continue
        tgt = inner.req.get(d.target)
        if src.value == tgt.value or not consistent_component(inner):
            continue
        new_inner = beh(_dc_replace(inner, req=inner.req.with_objects(Port(tgt.id, src.value))))
        out.append(cfg.with_objects(_dc_replace(h, assembly=h.assembly.with_objects(new_inner))))
    return out


def _apply_delegate_out(cfg: Configuration, beh: Behavior) -> List[Configuration]:
    # provided port of an inner component -> outer provided port
    out = []
    for h, d in _delegate_matches(cfg):
        tgt = h.prov.get(d.target)
        inner = _find_port_owner(h.assembly, d.source, "prov")
        if tgt is None or inner is None:
            continue
        src = inner.prov.get(d.source)
        if src.value == tgt.value:
            continue
        out.append(cfg.with_objects(_dc_replace(h, prov=h.prov.with_objects(Port(tgt.id, src.value)))))
    return out


def _apply_delegate_inner(cfg: Configuration, beh: Behavior) -> List[Configuration]:
    # provided port of an inner component -> inner required port of the
    # enclosing component, which reacts via beh
    out = []
    for h, d in _delegate_matches(cfg):
        tgt = h.innerreq.get(d.target)
        inner = _find_port_owner(h.assembly, d.source, "prov")
        if tgt is None or inner is None:
            continue
        src = inner.prov.get(d.source)
        if src.value == tgt.value:
            continue
        new_h = beh(_dc_replace(h, innerreq=h.innerreq.with_objects(Port(tgt.id, src.value))))
        out.append(cfg.with_objects(new_h))
    return out


def make_delegate_rules(beh: Behavior) -> Tuple[Rule, Rule, Rule]:
    return (
        Rule("delegateIn", TRIGGER_CONSISTENCY, lambda c: _apply_delegate_in(c, beh)),
        Rule("delegateOut", TRIGGER_CONSISTENCY, lambda c: _apply_delegate_out(c, beh)),
        Rule("delegateInnerPort", TRIGGER_CONSISTENCY, lambda c: _apply_delegate_inner(c, beh)),
    )


def lift_rule(r: Rule, path: str) -> Rule:
    """Duplicate a rule one layer down: the lifted rule applies ``r``
    inside the assembly of the component named by ``path`` and leaves the
    rest of the outer configuration unchanged.  This keeps all rewrites at
    the outermost configuration when components nest."""

    def apply(cfg: Configuration) -> List[Configuration]:
        comp = find(cfg, path)
        if comp is None:
            raise LiftError(f"no component {path!r} to lift into")
        if not isinstance(comp, HierComponent):
            raise LiftError(f"{path!r} is not a hierarchical component")
        out = []
        for new_asm in r.apply(comp.assembly):
            out.append(replace_deep(cfg, _dc_replace(comp, assembly=new_asm)))
        return out

    return Rule(f"{r.label}@{path}", r.trigger, apply)


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass
class DiagnosticReport:
    check: str
    violations: List[tuple] = field(default_factory=list)
    skipped: List[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        s = f"{self.check}: {len(self.violations)} violation(s)"
        if self.skipped:
            s += f", {len(self.skipped)} skipped"
        return s


def check_time_robustness(th: Theory, k: TimedKripke) -> DiagnosticReport:
    """Sufficient condition for time robustness: every instantaneous
    transition leaves a state that has an expired timer or is inconsistent.
    Transformation-internal rules are checked on the clock-erased
    projection of the source state."""
    report = DiagnosticReport("time-robustness")
    for i, edges in enumerate(k.adj):
        src = k.states[i]
        for (j, dur, label) in edges:
            if label in (TICK_LABEL, IDLE_LABEL):
                continue
            rule = th.rule(label)
            state = src
            if rule.trigger == TRIGGER_TRANSFORM:
                clock_ids = [o.id for o in src if isinstance(o, Clock)]
                for cid in clock_ids:
                    state = strip_object(state, cid)
            if has_expired_timer(state) or not consistent(state):
                continue
            report.violations.append((i, label))
    return report


def check_tick_stabilizing(
    th: Theory,
    prop: str,
    k: TimedKripke,
    step: Time = 1,
    max_steps_per_tick: int = 100_000,
) -> DiagnosticReport:
    """Sample ``prop`` along every tick transition at ``step`` granularity
    and report ticks during which its truth changes more than once."""
    if step <= 0:
        raise ModelError("step must be > 0")
    report = DiagnosticReport(f"tick-stabilizing[{prop}]")
    for i, edges in enumerate(k.adj):
        src = k.states[i]
        for (j, dur, label) in edges:
            if label != TICK_LABEL:
                continue
            if dur / step > max_steps_per_tick:
                report.skipped.append((i, dur))
                continue
            changes = 0
            prev = None
            t: Time = 0
            while True:
                cur = th.labeling.eval(prop, delta(src, t))
                if prev is not None and cur != prev:
                    changes += 1
                prev = cur
                if t >= dur:
                    break
                t = min(t + step, dur)
            if changes > 1:
                report.violations.append((i, prop, changes))
    return report
