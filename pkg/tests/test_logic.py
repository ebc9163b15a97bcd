import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtmc.config import Clock, Configuration, Port
from rtmc.logic import (
    And,
    Always,
    BoundedAlways,
    BoundedEventually,
    Eventually,
    FormulaSyntaxError,
    Implies,
    Labeling,
    Not,
    Or,
    Prop,
    PropDef,
    PureLtl,
    Response,
    Safety,
    TrueF,
    UnknownPropositionError,
    Unsupported,
    Until,
    WeakUntil,
    classify_mtl,
    clock_leq,
    eval_prop,
    parse_formula,
    pretty,
)


def test_parse_g2():
    f = parse_formula("[] <>[<=10000] imgChange")
    assert f == Always(BoundedEventually(10000, Prop("imgChange")))


def test_parse_g3():
    f = parse_formula("[] ( ~reconfTriggeredInC1 \\/ [][<=200] in-C1 )")
    assert f == Always(
        Or(Not(Prop("reconfTriggeredInC1")), BoundedAlways(200, Prop("in-C1")))
    )


def test_parse_precedence_until_over_or():
    f = parse_formula("p U q \\/ r")
    assert f == Or(Until(Prop("p"), Prop("q")), Prop("r"))


def test_parse_until_right_assoc():
    assert parse_formula("p U q U r") == Until(Prop("p"), Until(Prop("q"), Prop("r")))


def test_parse_implies_right_assoc():
    f = parse_formula("p -> q -> r")
    assert f == Implies(Prop("p"), Implies(Prop("q"), Prop("r")))


def test_parse_clock_leq_and_hyphen_idents():
    assert parse_formula("clockLeq(250)") == Prop("clockLeq(250)")
    assert parse_formula("in-C1") == Prop("in-C1")
    assert parse_formula("a -> b") == Implies(Prop("a"), Prop("b"))


def test_parse_errors_carry_position():
    with pytest.raises(FormulaSyntaxError, match="position"):
        parse_formula("p /\\")
    with pytest.raises(FormulaSyntaxError):
        parse_formula("p ?? q")
    with pytest.raises(FormulaSyntaxError, match="bound"):
        parse_formula("<>[<=0] p")


formulas = st.deferred(
    lambda: st.one_of(
        st.just(TrueF()),
        st.sampled_from([Prop("p"), Prop("q"), Prop("in-C1"), clock_leq(7)]),
        st.builds(Not, formulas),
        st.builds(And, formulas, formulas),
        st.builds(Or, formulas, formulas),
        st.builds(Implies, formulas, formulas),
        st.builds(Until, formulas, formulas),
        st.builds(WeakUntil, formulas, formulas),
        st.builds(Always, formulas),
        st.builds(Eventually, formulas),
        st.builds(BoundedAlways, st.integers(1, 999), formulas),
        st.builds(BoundedEventually, st.integers(1, 999), formulas),
    )
)


@settings(derandomize=True, max_examples=300)
@given(formulas)
def test_pretty_parse_roundtrip(f):
    assert parse_formula(pretty(f)) == f


# -- eval_prop ----------------------------------------------------------------


def _lab():
    return Labeling(
        (
            PropDef("p", lambda c: c.get("p").value),
            PropDef("clockLeq(200)", lambda c: c.get("x").clock <= 200),
        )
    )


def test_eval_prop():
    c = Configuration([Port("p", True), Clock("x", 250, "on", 300)])
    assert eval_prop(_lab(), "p", c) is True
    assert eval_prop(_lab(), "clockLeq(200)", c) is False
    with pytest.raises(UnknownPropositionError):
        eval_prop(_lab(), "mystery", c)


# -- classification -----------------------------------------------------------


def test_classify_g1_response():
    f = parse_formula("[] ( <>[<=800] ~persThereIn \\/ <>[<=1000] in-C1 )")
    cls = classify_mtl(f)
    assert cls == Response(
        ((Not(Prop("persThereIn")), 800), (Prop("in-C1"), 1000))
    )


def test_classify_single_response():
    cls = classify_mtl(parse_formula("[] <>[<=10000] imgChange"))
    assert cls == Response(((Prop("imgChange"), 10000),))


def test_classify_g3_safety():
    cls = classify_mtl(parse_formula("[] ( ~reconfTriggeredInC1 \\/ [][<=200] in-C1 )"))
    assert cls == Safety(Not(Prop("reconfTriggeredInC1")), Prop("in-C1"), 200)


def test_classify_safety_implies_sugar():
    cls = classify_mtl(parse_formula("[] ( reconfTriggeredInC1 -> [][<=200] in-C1 )"))
    assert cls == Safety(Not(Prop("reconfTriggeredInC1")), Prop("in-C1"), 200)


def test_classify_safety_commuted():
    cls = classify_mtl(parse_formula("[] ( [][<=200] q \\/ p )"))
    assert cls == Safety(Prop("p"), Prop("q"), 200)


def test_classify_response_invariant_under_reassociation():
    a = classify_mtl(parse_formula("[] ( (<>[<=1] a \\/ <>[<=2] b) \\/ <>[<=3] c )"))
    b = classify_mtl(parse_formula("[] ( <>[<=1] a \\/ (<>[<=2] b \\/ <>[<=3] c) )"))
    assert isinstance(a, Response) and isinstance(b, Response)
    assert set(a.pairs) == set(b.pairs)


def test_classify_unsupported_non_literal():
    cls = classify_mtl(parse_formula("<>[<=5] (p U q)"))
    assert isinstance(cls, Unsupported)
    cls2 = classify_mtl(parse_formula("[] <>[<=5] (p U q)"))
    assert isinstance(cls2, Unsupported)


def test_classify_pure_ltl():
    assert isinstance(classify_mtl(parse_formula("[] (p -> <> q)")), PureLtl)


def test_classified_bounds_positive():
    for text in (
        "[] ( <>[<=800] ~a \\/ <>[<=1000] b )",
        "[] ( a \\/ [][<=200] b )",
    ):
        cls = classify_mtl(parse_formula(text))
        if isinstance(cls, Response):
            assert all(b > 0 and b != float("inf") for (_q, b) in cls.pairs)
        else:
            assert cls.bound > 0
