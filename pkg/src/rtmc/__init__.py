"""Explicit-state verification of timed, reconfigurable component systems.

Configurations of ports, timers and nested components evolve under
instantaneous guarded rules plus a single maximal-sampling tick rule.  Two
classes of metric temporal formulas (time-bounded response and time-bounded
safety) are checked by extending the theory with a stopwatch and handing
the rewritten pure-LTL formula to a tableau/nested-DFS model checker; an
independent direct-MTL oracle arbitrates the reduction.
"""

from .config import (
    INF,
    BasicComponent,
    Clock,
    Configuration,
    Connector,
    DelayTimer,
    DelegateConnector,
    HierComponent,
    ModelError,
    OnOffTimer,
    Port,
    TimedComponent,
    Timer,
    canonicalize,
    consistent,
    delta,
    lookup,
    monus,
    mte,
)
from .engine import (
    Rule,
    StateSpaceOverflow,
    Theory,
    TimedKripke,
    check_tick_stabilizing,
    check_time_robustness,
    explore,
    instantaneous_successors,
    lift_rule,
    successors,
    tick_successor,
)
from .logic import Labeling, PropDef, classify_mtl, eval_prop, parse_formula, pretty
from .ltlmc import Counterexample, Holds, model_check_ltl, to_buchi
from .oracle import Lasso, check_mtl_exhaustive, eval_mtl_on_lasso
from .transform import (
    ResponseSpec,
    SafetySpec,
    TransformResult,
    transform_formula,
    transform_response,
    transform_safety,
)
from .advert import AdvertParams, build_advert_theory

__version__ = "0.1.0"
