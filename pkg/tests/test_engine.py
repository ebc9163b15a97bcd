import pytest
from dataclasses import replace

from rtmc.config import (
    INF,
    BasicComponent,
    Configuration,
    Connector,
    HierComponent,
    OnOffTimer,
    Port,
    Timer,
    consistent,
    delta,
    lookup,
    mte,
)
from rtmc.engine import (
    IDLE_LABEL,
    TICK_LABEL,
    TRIGGER_TIMER,
    LiftError,
    Rule,
    StateSpaceOverflow,
    Theory,
    check_tick_stabilizing,
    check_time_robustness,
    explore,
    instantaneous_successors,
    lift_rule,
    make_transmit_rule,
    successors,
    tick_successor,
)
from rtmc.logic import Labeling, PropDef
from rtmc.advert import AdvertParams, build_advert_theory


def cfg(*objs):
    return Configuration(objs)


def _empty_labeling():
    return Labeling(())


def _mini_transmit_setup():
    """Sender with a true provided port, receiver that copies its required
    port to a provided one when it reacts."""

    def beh(comp):
        if comp.id == "B":
            v = comp.req.get("B.in").value
            if comp.prov.get("B.out").value != v:
                return replace(comp, prov=comp.prov.with_objects(Port("B.out", v)))
        return comp

    c = cfg(
        BasicComponent("A", prov=cfg(Port("A.out", True)), req=cfg()),
        BasicComponent("B", prov=cfg(Port("B.out", False)), req=cfg(Port("B.in", False))),
        Connector("k", "A.out", "B.in"),
    )
    return make_transmit_rule(beh), c


def test_transmit_copies_value_and_applies_beh():
    rule, c = _mini_transmit_setup()
    succs = rule.apply(c)
    assert len(succs) == 1
    s = succs[0]
    assert lookup(s, "B.in").value is True
    assert lookup(s, "B.out").value is True  # receiver reacted
    assert lookup(s, "A.out").value is True


def test_transmit_requires_consistent_target():
    def beh(comp):
        return comp

    inner_bad = HierComponent(
        "H",
        prov=cfg(),
        req=cfg(Port("H.in", False)),
        tstate=cfg(),
        innerreq=cfg(),
        assembly=cfg(
            BasicComponent("X", prov=cfg(Port("X.p", True)), req=cfg()),
            BasicComponent("Y", prov=cfg(), req=cfg(Port("Y.p", False))),
            Connector("c", "X.p", "Y.p"),
        ),
    )
    top = cfg(
        BasicComponent("S", prov=cfg(Port("S.out", True)), req=cfg()),
        inner_bad,
        Connector("k", "S.out", "H.in"),
    )
    assert make_transmit_rule(beh).apply(top) == []


def test_monitor_signal_successor(advert):
    th, init = advert
    sys = init.get("SYS")
    mon = sys.assembly.get("MonitorOne")
    armed = replace(mon, tstate=mon.tstate.with_objects(OnOffTimer("m1timer", 0, True)))
    state = init.with_objects(replace(sys, assembly=sys.assembly.with_objects(armed)))
    succs = dict(instantaneous_successors(th, state))
    assert "monitorOne-signal" in succs
    out = succs["monitorOne-signal"]
    assert lookup(out, "MonitorOne.reconf").value is True
    timer = lookup(out, "m1timer")
    assert (timer.value, timer.active) == (INF, False)


def test_env_expiry_gives_two_successors(advert):
    th, init = advert
    labels = sorted(label for (label, _c) in instantaneous_successors(th, init))
    assert labels == ["env-false", "env-true"]


# -- tick ---------------------------------------------------------------------


def test_tick_decrements_by_mte():
    th = Theory((), _empty_labeling())
    c = cfg(OnOffTimer("t", 2000, True))
    dur, nxt = tick_successor(th, c)
    assert dur == 2000
    assert nxt.get("t").value == 0


def test_tick_none_when_mte_inf_or_inconsistent():
    th = Theory((), _empty_labeling())
    assert tick_successor(th, cfg(Timer("t", INF))) is None
    bad = cfg(Port("a", True), Port("b", False), Connector("c", "a", "b"), Timer("t", 5))
    assert not consistent(bad)
    assert tick_successor(th, bad) is None


def _always_toggle_rule(label="flip"):
    def apply(c):
        p = c.get("p")
        return [c.with_objects(Port("p", not p.value))]

    return Rule(label, TRIGGER_TIMER, apply)


def test_successors_terminal_self_loop():
    th = Theory((), _empty_labeling())
    c = cfg(Port("p", True))
    assert successors(th, c) == [(IDLE_LABEL, 0, c)]


def test_successors_rule_only_when_mte_inf():
    th = Theory((_always_toggle_rule(),), _empty_labeling())
    c = cfg(Port("p", True), Timer("t", INF))
    out = successors(th, c)
    assert [label for (label, _d, _c) in out] == ["flip"]


def test_successors_rule_and_tick_coexist():
    th = Theory((_always_toggle_rule(),), _empty_labeling())
    c = cfg(Port("p", True), Timer("t", 7))
    labels = sorted(label for (label, _d, _c) in successors(th, c))
    assert labels == ["flip", TICK_LABEL]


# -- explore ------------------------------------------------------------------


def test_explore_single_timer():
    th = Theory((), _empty_labeling())
    k = explore(th, cfg(Timer("t", 100)))
    assert k.n_states() == 2
    assert k.adj[0] == [(1, 100, TICK_LABEL)]
    assert k.adj[1] == [(1, 0, IDLE_LABEL)]
    assert k.terminal_states() == [1]


def test_explore_overflow():
    th = Theory((), _empty_labeling())
    with pytest.raises(StateSpaceOverflow):
        explore(th, cfg(Timer("t", 100)), max_states=1)


def test_explore_deterministic(advert, advert_graph):
    th, init = advert
    again = explore(th, init)
    assert again.n_states() == advert_graph.n_states()
    assert again.adj == advert_graph.adj
    assert again.labels == advert_graph.labels


def test_every_state_has_outgoing(advert_graph):
    assert all(len(edges) >= 1 for edges in advert_graph.adj)


def test_tick_durations_match_mte(advert_graph):
    for i, edges in enumerate(advert_graph.adj):
        for (j, dur, label) in edges:
            if label == TICK_LABEL:
                src = advert_graph.states[i]
                assert dur == mte(src)
                assert consistent(src)


# -- lift ---------------------------------------------------------------------


def test_lift_transmit_rewrites_inside_assembly_only(advert):
    th, init = advert
    # flip ENV.persThereIn to create a mismatch outside SYS only
    env = init.get("ENV")
    flipped = init.with_objects(
        replace(env, prov=env.prov.with_objects(Port("ENV.persThereIn", False)))
    )
    lifted = th.rule("transmit@SYS")
    assert lifted.apply(flipped) == []  # no inner mismatch yet

    # now flip a port inside the assembly
    sys = init.get("SYS")
    cam = sys.assembly.get("Camera")
    cam2 = replace(cam, prov=cam.prov.with_objects(Port("Camera.persThere", False)))
    inner_bad = init.with_objects(replace(sys, assembly=sys.assembly.with_objects(cam2)))
    outs = lifted.apply(inner_bad)
    assert len(outs) == 1
    assert lookup(outs[0], "Interaction.persThere").value is False
    assert lookup(outs[0], "ENV.persThereIn").value is True  # untouched


def test_lift_requires_hierarchical_component(advert):
    th, init = advert
    bad = lift_rule(_always_toggle_rule(), "Render")
    with pytest.raises(LiftError):
        bad.apply(init)
    missing = lift_rule(_always_toggle_rule(), "Ghost")
    with pytest.raises(LiftError):
        missing.apply(init)


# -- diagnostics ---------------------------------------------------------------


def test_time_robustness_advert_clean(advert, advert_graph):
    th, _init = advert
    assert check_time_robustness(th, advert_graph).violations == []


def test_time_robustness_flags_untriggered_rule():
    # enabled while all timers positive and the state is consistent
    lab = Labeling((PropDef("p", lambda c: c.get("p").value),))
    th = Theory((_always_toggle_rule(),), lab)
    k = explore(th, cfg(Port("p", True), Timer("t", 5)))
    report = check_time_robustness(th, k)
    assert len(report.violations) >= 1


def test_time_robustness_empty_theory():
    th = Theory((), _empty_labeling())
    k = explore(th, cfg(Timer("t", 10)))
    assert check_time_robustness(th, k).violations == []


def test_tick_stabilizing_port_prop(advert, advert_graph):
    th, _init = advert
    report = check_tick_stabilizing(th, "imgChange", advert_graph, step=1)
    assert report.ok and not report.skipped


def test_tick_stabilizing_constant_true():
    lab = Labeling((PropDef("yes", lambda c: True),))
    th = Theory((), lab)
    k = explore(th, cfg(Timer("t", 30)))
    assert check_tick_stabilizing(th, "yes", k, step=1).ok


def test_tick_stabilizing_flags_oscillation():
    # proposition flips with timer parity: changes many times per 10ms tick
    lab = Labeling((PropDef("even", lambda c: c.get("t").value % 2 == 0),))
    th = Theory((), lab)
    k = explore(th, cfg(Timer("t", 10)))
    report = check_tick_stabilizing(th, "even", k, step=1)
    assert len(report.violations) == 1


def test_dot_export(advert_graph):
    dot = advert_graph.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("->") == advert_graph.n_transitions()
