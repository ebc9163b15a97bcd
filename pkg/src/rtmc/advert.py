"""Adaptive-advertising case study.

A hierarchical display system ``SYS`` sits in one of two wirings: in
configuration 1 the camera feed drives an interaction pipeline (gesture
monitor + interactive renderer); in configuration 2 a presentation
component drives the renderer and a second monitor watches for a person to
come back.  Timed monitors raise a reconfiguration signal when their
observation window expires; the enclosing component then rewires its
assembly after a fixed reconfiguration delay.  An environment component
``ENV`` closes the system and flips the person-presence port
nondeterministically at a fixed period.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace as _dc_replace
from typing import List, Tuple

from .config import (
    INF,
    BasicComponent,
    Configuration,
    Connector,
    DelayTimer,
    DelegateConnector,
    HierComponent,
    ModelError,
    Object,
    OnOffTimer,
    Port,
    TimedComponent,
    Timer,
    replace_deep,
    validate_global_ids,
)
from .engine import (
    TRIGGER_TIMER,
    Rule,
    Theory,
    lift_rule,
    make_delegate_rules,
    make_transmit_rule,
)
from .logic import Labeling, PropDef


@dataclass(frozen=True)
class AdvertParams:
    reconf_duration: int = 250
    monitor1_timeout: int = 2000
    monitor2_timeout: int = 500
    env_period: int = 50

    def __post_init__(self):
        for name in ("reconf_duration", "monitor1_timeout", "monitor2_timeout", "env_period"):
            v = getattr(self, name)
            if not (isinstance(v, int) and v > 0):
                raise ModelError(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def from_json(cls, text: str) -> "AdvertParams":
        data = json.loads(text)
        unknown = set(data) - {
            "reconf_duration",
            "monitor1_timeout",
            "monitor2_timeout",
            "env_period",
        }
        if unknown:
            raise ModelError(f"unknown advert parameters: {sorted(unknown)}")
        return cls(**data)


# Connector inventory.  d1/d2 are wired in both configurations; the cN/dN
# sets below are swapped atomically by the reconfiguration rules.
_D1 = DelegateConnector("d1", "SYS.persThereIn", "Camera.persThereIn")
_D2 = DelegateConnector("d2", "Render.imgChange", "SYS.imgChange")

C1_CONNECTORS: Tuple[Object, ...] = (
    Connector("c1", "Camera.persThere", "Interaction.persThere"),
    Connector("c2", "Interaction.gesture", "MonitorOne.gesture"),
    Connector("c3", "Interaction.alterContent", "Render.alterContent"),
    DelegateConnector("d3", "MonitorOne.reconf", "SYS.reconf"),
)

C2_CONNECTORS: Tuple[Object, ...] = (
    Connector("c4", "Presentation.alterContent", "Render.alterContent"),
    Connector("c5", "Camera.persThere", "MonitorTwo.gesture"),
    DelegateConnector("d4", "MonitorTwo.reconf", "SYS.reconf"),
)

C1_IDS = tuple(c.id for c in C1_CONNECTORS)
C2_IDS = tuple(c.id for c in C2_CONNECTORS)


def _cfg(*objs: Object) -> Configuration:
    return Configuration(objs)


def _sys_in_c1(p: AdvertParams) -> HierComponent:
    assembly = _cfg(
        _D1,
        _D2,
        *C1_CONNECTORS,
        BasicComponent(
            "Camera",
            prov=_cfg(Port("Camera.persThere", True)),
            req=_cfg(Port("Camera.persThereIn", True)),
        ),
        BasicComponent(
            "Interaction",
            prov=_cfg(Port("Interaction.gesture", True), Port("Interaction.alterContent", True)),
            req=_cfg(Port("Interaction.persThere", True)),
        ),
        BasicComponent(
            "Render",
            prov=_cfg(Port("Render.imgChange", True)),
            req=_cfg(Port("Render.alterContent", True)),
        ),
        BasicComponent(
            "Presentation",
            prov=_cfg(Port("Presentation.alterContent", True)),
            req=_cfg(),
        ),
        TimedComponent(
            "MonitorOne",
            prov=_cfg(Port("MonitorOne.reconf", False)),
            req=_cfg(Port("MonitorOne.gesture", True)),
            tstate=_cfg(OnOffTimer("m1timer", INF, True)),
        ),
        TimedComponent(
            "MonitorTwo",
            prov=_cfg(Port("MonitorTwo.reconf", False)),
            req=_cfg(Port("MonitorTwo.gesture", True)),
            tstate=_cfg(OnOffTimer("m2timer", INF, False)),
        ),
    )
    return HierComponent(
        "SYS",
        prov=_cfg(Port("SYS.imgChange", True)),
        req=_cfg(Port("SYS.persThereIn", True)),
        tstate=_cfg(Timer("reconftimer", INF)),
        innerreq=_cfg(Port("SYS.reconf", False)),
        assembly=assembly,
    )


def build_initial(p: AdvertParams) -> Configuration:
    initial = _cfg(
        _sys_in_c1(p),
        TimedComponent(
            "ENV",
            prov=_cfg(Port("ENV.persThereIn", True)),
            req=_cfg(Port("ENV.imgChange", True)),
            tstate=_cfg(DelayTimer("envdtimer", 0, p.env_period)),
        ),
        Connector("CONN1", "ENV.persThereIn", "SYS.persThereIn"),
        Connector("CONN2", "SYS.imgChange", "ENV.imgChange"),
    )
    validate_global_ids(initial)
    return initial


# ---------------------------------------------------------------------------
# Component behavior


def _copy_port(comp, src_id: str, dst_id: str):
    value = comp.req.get(src_id).value
    dst = comp.prov.get(dst_id)
    if dst.value == value:
        return comp
    return _dc_replace(comp, prov=comp.prov.with_objects(Port(dst_id, value)))


def make_beh(p: AdvertParams):
    """Reaction of each component to a change of its required ports."""

    def monitor_timer(value, disarm, timeout):
        # The window restarts from INF when the watched condition arrives,
        # disarms back to INF when it goes away, and an expired window (0)
        # is left alone until the signal rule consumes it.
        if disarm and value != 0:
            return INF
        return timeout if value == INF else value

    def beh(comp):
        cid = comp.id
        if cid == "Camera":
            return _copy_port(comp, "Camera.persThereIn", "Camera.persThere")
        if cid == "Interaction":
            comp = _copy_port(comp, "Interaction.persThere", "Interaction.gesture")
            return _copy_port(comp, "Interaction.persThere", "Interaction.alterContent")
        if cid == "Render":
            return _copy_port(comp, "Render.alterContent", "Render.imgChange")
        if cid == "MonitorOne":
            timer = comp.tstate.get("m1timer")
            gesture = comp.req.get("MonitorOne.gesture").value
            v = monitor_timer(
                timer.value, gesture or not timer.active, p.monitor1_timeout
            )
            if v == timer.value:
                return comp
            return _dc_replace(
                comp, tstate=comp.tstate.with_objects(OnOffTimer("m1timer", v, timer.active))
            )
        if cid == "MonitorTwo":
            timer = comp.tstate.get("m2timer")
            gesture = comp.req.get("MonitorTwo.gesture").value
            v = monitor_timer(
                timer.value, (not gesture) or not timer.active, p.monitor2_timeout
            )
            if v == timer.value:
                return comp
            return _dc_replace(
                comp, tstate=comp.tstate.with_objects(OnOffTimer("m2timer", v, timer.active))
            )
        if cid == "SYS":
            if comp.innerreq.get("SYS.reconf").value:
                timer = comp.tstate.get("reconftimer")
                v = p.reconf_duration if timer.value == INF else timer.value
                if v != timer.value:
                    return _dc_replace(
                        comp, tstate=comp.tstate.with_objects(Timer("reconftimer", v))
                    )
            return comp
        return comp

    return beh


# ---------------------------------------------------------------------------
# Model-specific rules


def _monitor_signal_rule(monitor_id: str, timer_id: str, label: str) -> Rule:
    port_id = f"{monitor_id}.reconf"

    def apply(cfg: Configuration) -> List[Configuration]:
        sys = cfg.get("SYS")
        if sys is None:
            return []
        mon = sys.assembly.get(monitor_id)
        if mon is None:
            return []
        timer = mon.tstate.get(timer_id)
        port = mon.prov.get(port_id)
        if not (timer.value == 0 and timer.active and port.value is False):
            return []
        new_mon = _dc_replace(
            mon,
            tstate=mon.tstate.with_objects(OnOffTimer(timer_id, INF, False)),
            prov=mon.prov.with_objects(Port(port_id, True)),
        )
        return [cfg.with_objects(_dc_replace(sys, assembly=sys.assembly.with_objects(new_mon)))]

    return Rule(label, TRIGGER_TIMER, apply)


def _reconf_rule(p: AdvertParams, to_c2: bool, beh) -> Rule:
    label = "reconf-C1-to-C2" if to_c2 else "reconf-C2-to-C1"
    old_ids = C1_IDS if to_c2 else C2_IDS
    new_connectors = C2_CONNECTORS if to_c2 else C1_CONNECTORS
    woken_id, woken_timer = ("MonitorTwo", "m2timer") if to_c2 else ("MonitorOne", "m1timer")
    signaled_id = "MonitorOne" if to_c2 else "MonitorTwo"

    def apply(cfg: Configuration) -> List[Configuration]:
        sys = cfg.get("SYS")
        if sys is None:
            return []
        if sys.tstate.get("reconftimer").value != 0:
            return []
        asm = sys.assembly
        if any(asm.get(cid) is None for cid in old_ids):
            return []
        woken = asm.get(woken_id)
        timer = woken.tstate.get(woken_timer)
        if not (timer.value == INF and timer.active is False):
            return []
        # Wake the incoming monitor and let it re-read its observed port, so
        # a window starts even if the port does not change again afterwards.
        woken2 = beh(
            _dc_replace(
                woken, tstate=woken.tstate.with_objects(OnOffTimer(woken_timer, INF, True))
            )
        )
        signaled = asm.get(signaled_id)
        signaled2 = _dc_replace(
            signaled,
            prov=signaled.prov.with_objects(Port(f"{signaled_id}.reconf", False)),
        )
        asm2 = asm.without(*old_ids).with_objects(*new_connectors, woken2, signaled2)
        sys2 = _dc_replace(
            sys,
            assembly=asm2,
            tstate=sys.tstate.with_objects(Timer("reconftimer", INF)),
        )
        return [cfg.with_objects(sys2)]

    return Rule(label, TRIGGER_TIMER, apply)


def _env_rule(p: AdvertParams, value: bool) -> Rule:
    label = "env-true" if value else "env-false"

    def apply(cfg: Configuration) -> List[Configuration]:
        env = cfg.get("ENV")
        if env is None:
            return []
        timer = env.tstate.get("envdtimer")
        if timer.value != 0:
            return []
        env2 = _dc_replace(
            env,
            tstate=env.tstate.with_objects(DelayTimer("envdtimer", timer.delay, timer.delay)),
            prov=env.prov.with_objects(Port("ENV.persThereIn", value)),
        )
        return [cfg.with_objects(env2)]

    return Rule(label, TRIGGER_TIMER, apply)


# ---------------------------------------------------------------------------
# Propositions


def _prop_img_change(cfg: Configuration) -> bool:
    return cfg.get("ENV").req.get("ENV.imgChange").value


def _prop_pers_there(cfg: Configuration) -> bool:
    return cfg.get("ENV").prov.get("ENV.persThereIn").value


def _in_conf(cfg: Configuration, ids) -> bool:
    asm = cfg.get("SYS").assembly
    return all(asm.get(cid) is not None for cid in ids)


def _prop_in_c1(cfg: Configuration) -> bool:
    return _in_conf(cfg, C1_IDS)


def _prop_in_c2(cfg: Configuration) -> bool:
    return _in_conf(cfg, C2_IDS)


def _trigger_prop(monitor_id: str, conf_ids) -> PropDef:
    name = "reconfTriggeredInC1" if monitor_id == "MonitorOne" else "reconfTriggeredInC2"

    def fn(cfg: Configuration) -> bool:
        # True exactly at the trigger instant: the monitor has raised its
        # signal but the enclosing component has not yet latched it.
        sys = cfg.get("SYS")
        if not _in_conf(cfg, conf_ids):
            return False
        mon = sys.assembly.get(monitor_id)
        return (
            mon.prov.get(f"{monitor_id}.reconf").value
            and not sys.innerreq.get("SYS.reconf").value
        )

    return PropDef(name, fn)


def advert_labeling() -> Labeling:
    return Labeling(
        (
            PropDef("imgChange", _prop_img_change),
            PropDef("persThereIn", _prop_pers_there),
            PropDef("in-C1", _prop_in_c1),
            PropDef("in-C2", _prop_in_c2),
            _trigger_prop("MonitorOne", C1_IDS),
            _trigger_prop("MonitorTwo", C2_IDS),
        )
    )


def build_advert_theory(p: AdvertParams = AdvertParams()) -> Tuple[Theory, Configuration]:
    """The case-study theory and its initial configuration.

    Value transmission is registered once per nesting layer (top level and
    inside SYS), so every rewrite happens at the outermost configuration.
    """
    beh = make_beh(p)
    transmit = make_transmit_rule(beh)
    rules = (
        transmit,
        lift_rule(transmit, "SYS"),
        *make_delegate_rules(beh),
        _monitor_signal_rule("MonitorOne", "m1timer", "monitorOne-signal"),
        _monitor_signal_rule("MonitorTwo", "m2timer", "monitorTwo-signal"),
        _reconf_rule(p, True, beh),
        _reconf_rule(p, False, beh),
        _env_rule(p, True),
        _env_rule(p, False),
    )
    return Theory(rules, advert_labeling()), build_initial(p)
