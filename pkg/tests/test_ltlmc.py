import random

import pytest

from rtmc.engine import TimedKripke
from rtmc.logic import Not, Prop, parse_formula
from rtmc.ltlmc import (
    BoundedOperatorError,
    Counterexample,
    Holds,
    automaton_accepts_word,
    build_automaton,
    model_check_ltl,
    to_buchi,
    to_nnf,
)
from rtmc.oracle import eval_word_lasso
from rtmc.randgen import KRIPKE_PROPS, random_kripke, random_ltl


def kripke(labels, edges, initial=0):
    n = len(labels)
    adj = [[] for _ in range(n)]
    for (i, j) in edges:
        adj[i].append((j, 0, "e"))
    return TimedKripke(list(range(n)), initial, adj, [frozenset(l) for l in labels], KRIPKE_PROPS)


def test_to_buchi_rejects_bounded():
    with pytest.raises(BoundedOperatorError):
        to_buchi(parse_formula("<>[<=5] p"))


def test_to_buchi_always_is_small():
    # automaton for the negation <>~p
    a = to_buchi(parse_formula("[] p"))
    assert a.n_states <= 3


def _words(props, length):
    if length == 0:
        yield ()
        return
    alphabet = []
    for mask in range(2 ** len(props)):
        alphabet.append(frozenset(p for i, p in enumerate(props) if mask >> i & 1))
    for shorter in _words(props, length - 1):
        for letter in alphabet:
            yield shorter + (letter,)


@pytest.mark.parametrize(
    "text",
    ["[] p", "<> p", "p U q", "p W q", "[] <> p", "<> [] p", "~(p U q)", "p /\\ <> ~q"],
)
def test_automaton_accepts_exactly_the_models(text):
    f = parse_formula(text)
    a = build_automaton(to_nnf(f))
    props = ("p", "q")
    for prefix_len in (0, 1, 2):
        for loop_len in (1, 2):
            for word in _words(props, prefix_len + loop_len):
                sem = eval_word_lasso(list(word), [0] * len(word), prefix_len, f)
                acc = automaton_accepts_word(a, list(word), prefix_len, props)
                assert sem == acc, (text, word, prefix_len)


def test_model_check_self_loop_holds():
    k = kripke([{"p"}], [(0, 0)])
    assert isinstance(model_check_ltl(k, parse_formula("[] p")), Holds)


def test_model_check_short_counterexample():
    k = kripke([{"p"}, set()], [(0, 1), (1, 1)])
    v = model_check_ltl(k, parse_formula("[] p"))
    assert isinstance(v, Counterexample)
    assert len(v.prefix) == 1 and v.prefix[0][0] == 0
    assert all(s == 1 for (s, _d) in v.loop)


def test_model_check_missing_prop_errors():
    k = kripke([{"p"}], [(0, 0)])
    with pytest.raises(Exception, match="labeling"):
        model_check_ltl(k, Prop("zap"))


def test_counterexamples_replay_as_violations():
    rng = random.Random(5)
    for _ in range(200):
        k = random_kripke(rng)
        f = random_ltl(rng, 3)
        v = model_check_ltl(k, f)
        if isinstance(v, Counterexample):
            labels = [k.labels[s] for (s, _d) in v.prefix + v.loop]
            durs = [d for (_s, d) in v.prefix + v.loop]
            assert not eval_word_lasso(labels, durs, len(v.prefix), f)


def test_check_negation_duality():
    # internal consistency: f holds iff ~f admits no accepting product run,
    # and on a single-path structure exactly one of f, ~f holds
    k = kripke([{"p"}, {"q"}], [(0, 1), (1, 0)])
    for text in ("[] p", "<> q", "p U q", "[] <> p"):
        f = parse_formula(text)
        holds_f = isinstance(model_check_ltl(k, f), Holds)
        holds_nf = isinstance(model_check_ltl(k, Not(f)), Holds)
        assert holds_f != holds_nf


def test_verdict_json_shapes():
    k = kripke([{"p"}, set()], [(0, 1), (1, 1)])
    holds = model_check_ltl(k, parse_formula("<> p")).to_json()
    assert holds == {"result": "holds"}
    cex = model_check_ltl(k, parse_formula("[] p")).to_json()
    assert cex["result"] == "counterexample"
    assert {"state", "duration"} == set(cex["prefix"][0])
    assert cex["loop"]
