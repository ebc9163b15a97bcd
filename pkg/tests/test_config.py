import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtmc.config import (
    INF,
    BasicComponent,
    Clock,
    Configuration,
    Connector,
    DanglingEndpointError,
    DelayTimer,
    DelegateConnector,
    DuplicateIdError,
    HierComponent,
    OnOffTimer,
    Port,
    Timer,
    UnknownObjectError,
    canonicalize,
    consistent,
    delta,
    lookup,
    monus,
    mte,
)
from rtmc.advert import AdvertParams, build_initial


def cfg(*objs):
    return Configuration(objs)


def test_monus():
    assert monus(5, 3) == 2
    assert monus(3, 5) == 0
    assert monus(INF, 1000) == INF
    assert monus(7, INF) == 0
    assert min(INF, 42) == 42
    assert INF > 10**9


def test_duplicate_ids_rejected():
    with pytest.raises(DuplicateIdError):
        cfg(Port("p", True), Port("p", False))


# -- consistent --------------------------------------------------------------


def test_consistent_equal_ports():
    c = cfg(Port("p1", True), Port("p2", True), Connector("c", "p1", "p2"))
    assert consistent(c)


def test_consistent_mismatch():
    c = cfg(Port("p1", True), Port("p2", False), Connector("c", "p1", "p2"))
    assert not consistent(c)


def _hier(inner_vals):
    a, b = inner_vals
    return HierComponent(
        "H",
        prov=cfg(Port("H.out", True)),
        req=cfg(),
        tstate=cfg(),
        innerreq=cfg(),
        assembly=cfg(
            BasicComponent("A", prov=cfg(Port("A.p", a)), req=cfg()),
            BasicComponent("B", prov=cfg(), req=cfg(Port("B.p", b))),
            Connector("c", "A.p", "B.p"),
        ),
    )


def test_consistent_recurses_into_assembly():
    # outer level has no connectors at all, so only the nested one counts
    assert consistent(cfg(_hier((True, True))))
    assert not consistent(cfg(_hier((True, False))))


def test_consistent_dangling_endpoint():
    c = cfg(Port("p1", True), Connector("c", "p1", "nowhere"))
    with pytest.raises(DanglingEndpointError, match="nowhere"):
        consistent(c)


# -- delta / mte -------------------------------------------------------------


def test_delta_onoff_active():
    c = cfg(OnOffTimer("t", 2000, True))
    assert delta(c, 500).get("t").value == 1500


def test_delta_onoff_inactive():
    c = cfg(OnOffTimer("t", 2000, False))
    assert delta(c, 500).get("t").value == 2000


def test_delta_timer_inf():
    c = cfg(Timer("t", INF))
    assert delta(c, 100).get("t").value == INF


def test_delta_delay_field_fixed():
    c = cfg(DelayTimer("t", 40, 50))
    d = delta(c, 30).get("t")
    assert (d.value, d.delay) == (10, 50)


def test_mte_examples():
    assert mte(cfg(OnOffTimer("a", 2000, True), Timer("b", INF))) == 2000
    assert mte(cfg(Port("p", True), Connector("c", "p", "p"))) == INF
    assert mte(cfg(Timer("a", 250), OnOffTimer("b", 500, True))) == 250


def test_mte_recurses():
    comp = HierComponent(
        "H",
        prov=cfg(),
        req=cfg(),
        tstate=cfg(Timer("t1", 300)),
        innerreq=cfg(),
        assembly=cfg(BasicComponent("A", prov=cfg(), req=cfg())),
    )
    assert mte(cfg(comp, Timer("top", 500))) == 300


# -- canonicalize / lookup ---------------------------------------------------


def test_canonicalize_permutation():
    objs = [Port("a", True), Timer("b", 5), Connector("c", "a", "a")]
    assert canonicalize(Configuration(objs)) == canonicalize(Configuration(objs[::-1]))


def test_canonicalize_value_sensitive():
    assert canonicalize(cfg(Port("a", True))) != canonicalize(cfg(Port("a", False)))


def test_canonicalize_nested_permutation():
    def hier(order):
        ports = [Port("A.x", True), Port("A.y", False)]
        if order:
            ports = ports[::-1]
        return cfg(
            HierComponent(
                "H",
                prov=cfg(),
                req=cfg(),
                tstate=cfg(),
                innerreq=cfg(),
                assembly=cfg(BasicComponent("A", prov=Configuration(ports), req=cfg())),
            )
        )

    assert canonicalize(hier(False)) == canonicalize(hier(True))


def test_lookup_advert_values():
    initial = build_initial(AdvertParams())
    assert lookup(initial, "ENV.persThereIn").value is True
    assert lookup(initial, "SYS.reconf").value is False
    with pytest.raises(UnknownObjectError):
        lookup(initial, "no.such.thing")


# -- property tests ----------------------------------------------------------

times = st.integers(min_value=0, max_value=40)
timevals = st.one_of(times, st.just(INF))


@st.composite
def flat_configs(draw):
    objs = []
    n_ports = draw(st.integers(0, 3))
    for i in range(n_ports):
        objs.append(Port(f"p{i}", draw(st.booleans())))
    for i in range(draw(st.integers(0, 3))):
        kind = draw(st.integers(0, 2))
        v = draw(timevals)
        if kind == 0:
            objs.append(Timer(f"t{i}", v))
        elif kind == 1:
            objs.append(OnOffTimer(f"t{i}", v, draw(st.booleans())))
        else:
            objs.append(DelayTimer(f"t{i}", v, draw(times)))
    if n_ports >= 2 and draw(st.booleans()):
        objs.append(Connector("c0", "p0", "p1"))
    if draw(st.booleans()):
        objs.append(
            HierComponent(
                "H",
                prov=cfg(Port("H.o", draw(st.booleans()))),
                req=cfg(),
                tstate=cfg(Timer("H.t", draw(timevals))),
                innerreq=cfg(),
                assembly=cfg(BasicComponent("A", prov=cfg(), req=cfg())),
            )
        )
    return Configuration(objs)


@settings(derandomize=True, max_examples=200)
@given(flat_configs(), times, times)
def test_delta_additive(c, t1, t2):
    assert delta(delta(c, t1), t2) == delta(c, t1 + t2)


@settings(derandomize=True, max_examples=200)
@given(flat_configs(), times)
def test_mte_shifts_under_delta(c, t):
    m = mte(c)
    if t <= m and t != INF:
        assert mte(delta(c, t)) == monus(m, t)


@settings(derandomize=True, max_examples=100)
@given(flat_configs())
def test_delta_zero_is_identity(c):
    assert delta(c, 0) == c


@settings(derandomize=True, max_examples=100)
@given(flat_configs(), times)
def test_consistent_invariant_under_delta(c, t):
    assert consistent(delta(c, t)) == consistent(c)


@settings(derandomize=True, max_examples=100)
@given(st.permutations(list(range(4))), times)
def test_canonicalize_iff_multiset_equal(perm, extra):
    objs = [Port("a", True), Timer("b", 3), OnOffTimer("c", INF, True), Port("d", False)]
    shuffled = [objs[i] for i in perm]
    assert canonicalize(Configuration(shuffled)) == canonicalize(Configuration(objs))
    bumped = [Timer("b", 3 + extra + 1) if o.id == "b" else o for o in objs]
    assert canonicalize(Configuration(bumped)) != canonicalize(Configuration(objs))


def test_clock_delta_cap_breaks_additivity_beyond_cap():
    # intended: saturating clocks only commute while under the cap
    c = cfg(Clock("x", 0, "on", 10))
    assert delta(delta(c, 4), 5) == delta(c, 9)
    assert delta(c, 25).get("x").clock == 11
    assert delta(delta(c, 25), 3).get("x").clock == 11
