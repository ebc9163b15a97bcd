"""Shared fixtures: the case-study graphs are expensive enough to build
once per session and reuse across test modules."""

from __future__ import annotations

import pytest

from rtmc.advert import AdvertParams, build_advert_theory
from rtmc.engine import explore
from rtmc.logic import (
    Always,
    BoundedAlways,
    BoundedEventually,
    Or,
    parse_formula,
)
from rtmc.transform import transform_formula

G2_TEXT = "[] <>[<=10000] imgChange"
G1_TEXT = "[] ( <>[<=800] ~persThereIn \\/ <>[<=1000] in-C1 )"
G3A_TEXT = "[] ( ~reconfTriggeredInC1 \\/ [][<=200] in-C1 )"
G3B_TEXT = "[] ( ~reconfTriggeredInC2 \\/ [][<=200] in-C2 )"

# Pinned on the first exploration run; any change means the semantics moved.
ADVERT_STATES = 2015
ADVERT_TRANSITIONS = 3578
ADVERT_G2_STATES = 2827


@pytest.fixture(scope="session")
def advert():
    return build_advert_theory(AdvertParams())


@pytest.fixture(scope="session")
def advert_graph(advert):
    th, init = advert
    return explore(th, init)


@pytest.fixture(scope="session")
def transformed(advert):
    """formula text -> (TransformResult, explored graph), cached."""
    th, init = advert
    cache = {}

    def get(text: str):
        if text not in cache:
            res = transform_formula(th, init, parse_formula(text))
            cache[text] = (res, explore(res.theory, res.initial))
        return cache[text]

    return get


def mtl_of_response(spec):
    f = None
    for (q, b) in spec.pairs:
        d = BoundedEventually(b, q)
        f = d if f is None else Or(f, d)
    return Always(f)


def mtl_of_safety(spec):
    return Always(Or(spec.p, BoundedAlways(spec.bound, spec.q)))
