"""Timed object configurations.

A configuration is a multiset of objects: ports, timers, clocks, connectors
and (possibly nested) components.  Object identifiers are dot-separated
names, unique within a configuration tree.  Time is discrete (integer
milliseconds) with an absorbing infinity, and all time arithmetic goes
through ``monus`` (truncated subtraction).

The three functions that define the timed semantics of a configuration are
``delta`` (effect of time elapse), ``mte`` (maximum time elapse before some
action must happen) and ``consistent`` (all connected ports agree in value,
recursively through assemblies).
"""

from __future__ import annotations

from dataclasses import dataclass, replace as _dc_replace
from typing import Callable, Iterable, Iterator, Optional, Union

INF: float = float("inf")

#: Finite time values are non-negative ints; ``INF`` is the only float.
Time = Union[int, float]

ON = "on"
OFF = "off"


class ModelError(Exception):
    """Base class for model construction / evaluation errors."""


class UnknownObjectError(ModelError):
    """An object id did not resolve inside a configuration."""


class DanglingEndpointError(ModelError):
    """A connector endpoint does not name a reachable port."""


class DuplicateIdError(ModelError):
    """Two objects at the same nesting level share an id."""


def monus(a: Time, b: Time) -> Time:
    """Truncated subtraction: ``max(a - b, 0)``, with ``INF - t = INF``."""
    if a == INF:
        return INF
    if b == INF:
        return 0
    return a - b if a > b else 0


def check_time(value: Time, what: str = "time value") -> Time:
    if value == INF:
        return value
    if not isinstance(value, int) or value < 0:
        raise ModelError(f"{what} must be a non-negative integer or INF, got {value!r}")
    return value


def fmt_time(value: Time) -> str:
    return "INF" if value == INF else str(value)


# ---------------------------------------------------------------------------
# Objects


@dataclass(frozen=True, slots=True)
class Port:
    id: str
    value: bool


@dataclass(frozen=True, slots=True)
class Timer:
    id: str
    value: Time


@dataclass(frozen=True, slots=True)
class OnOffTimer:
    id: str
    value: Time
    active: bool


@dataclass(frozen=True, slots=True)
class DelayTimer:
    id: str
    value: Time
    delay: Time


@dataclass(frozen=True, slots=True)
class Clock:
    """Transformation-installed stopwatch.

    ``cap`` is the bound installed by the formula transformation: while
    running, the value saturates at ``cap + 1`` so the state space stays
    finite without changing the truth of any ``clock <= b`` proposition
    for b <= cap.
    """

    id: str
    clock: Time
    status: str  # ON | OFF
    cap: Time


@dataclass(frozen=True, slots=True)
class Connector:
    id: str
    source: str
    target: str


@dataclass(frozen=True, slots=True)
class DelegateConnector:
    id: str
    source: str
    target: str


@dataclass(frozen=True, slots=True)
class BasicComponent:
    id: str
    prov: "Configuration"
    req: "Configuration"


@dataclass(frozen=True, slots=True)
class TimedComponent:
    id: str
    prov: "Configuration"
    req: "Configuration"
    tstate: "Configuration"


@dataclass(frozen=True, slots=True)
class HierComponent:
    id: str
    prov: "Configuration"
    req: "Configuration"
    tstate: "Configuration"
    innerreq: "Configuration"
    assembly: "Configuration"


Object = Union[
    Port,
    Timer,
    OnOffTimer,
    DelayTimer,
    Clock,
    Connector,
    DelegateConnector,
    BasicComponent,
    TimedComponent,
    HierComponent,
]

#: Component kinds ordered by capability; every HierComponent supports the
#: TimedComponent surface, every TimedComponent the BasicComponent surface.
COMPONENT_KINDS = (BasicComponent, TimedComponent, HierComponent)
TIMER_KINDS = (Timer, OnOffTimer, DelayTimer)


def _object_key(obj: Object) -> tuple:
    kind = type(obj).__name__
    if isinstance(obj, Port):
        return (kind, obj.id, obj.value)
    if isinstance(obj, Timer):
        return (kind, obj.id, obj.value)
    if isinstance(obj, OnOffTimer):
        return (kind, obj.id, obj.value, obj.active)
    if isinstance(obj, DelayTimer):
        return (kind, obj.id, obj.value, obj.delay)
    if isinstance(obj, Clock):
        return (kind, obj.id, obj.clock, obj.status, obj.cap)
    if isinstance(obj, (Connector, DelegateConnector)):
        return (kind, obj.id, obj.source, obj.target)
    if isinstance(obj, BasicComponent):
        return (kind, obj.id, obj.prov.key, obj.req.key)
    if isinstance(obj, TimedComponent):
        return (kind, obj.id, obj.prov.key, obj.req.key, obj.tstate.key)
    if isinstance(obj, HierComponent):
        return (
            kind,
            obj.id,
            obj.prov.key,
            obj.req.key,
            obj.tstate.key,
            obj.innerreq.key,
            obj.assembly.key,
        )
    raise ModelError(f"unknown object kind: {obj!r}")


StateKey = tuple


class Configuration:
    """Immutable multiset of objects, ordered canonically by id.

    Ids must be pairwise distinct at each nesting level, so the multiset is
    effectively a map per level.  Equality and hashing go through the
    canonical key, which is insertion-order independent.
    """

    __slots__ = ("objects", "_index", "_key", "_hash", "_consistent", "_mte")

    def __init__(self, objects: Iterable[Object] = ()):
        objs = sorted(objects, key=lambda o: o.id)
        index = {}
        for o in objs:
            if o.id in index:
                raise DuplicateIdError(f"duplicate object id {o.id!r} at one level")
            index[o.id] = o
        self.objects: tuple = tuple(objs)
        self._index = index
        self._key: Optional[tuple] = None
        self._hash: Optional[int] = None
        self._consistent: Optional[bool] = None
        self._mte: Optional[Time] = None

    @property
    def key(self) -> StateKey:
        if self._key is None:
            self._key = tuple(_object_key(o) for o in self.objects)
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Configuration) and self.key == other.key

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __iter__(self) -> Iterator[Object]:
        return iter(self.objects)

    def __len__(self) -> int:
        return len(self.objects)

    def __repr__(self) -> str:
        return f"Configuration({', '.join(o.id for o in self.objects)})"

    # -- level-local access -------------------------------------------------

    def get(self, oid: str) -> Optional[Object]:
        return self._index.get(oid)

    def require(self, oid: str) -> Object:
        obj = self._index.get(oid)
        if obj is None:
            raise UnknownObjectError(f"no object {oid!r} at this level")
        return obj

    def with_objects(self, *new_objs: Object) -> "Configuration":
        """Replace (by id) or add the given objects at this level."""
        index = dict(self._index)
        for o in new_objs:
            index[o.id] = o
        return Configuration(index.values())

    def without(self, *oids: str) -> "Configuration":
        return Configuration(o for o in self.objects if o.id not in set(oids))


def components(cfg: Configuration) -> Iterator[Object]:
    for obj in cfg:
        if isinstance(obj, COMPONENT_KINDS):
            yield obj


def lookup(cfg: Configuration, oid: str) -> Object:
    """Resolve ``oid`` anywhere in the configuration tree.

    Ids are global dot-paths (e.g. ``SYS.imgChange``); uniqueness across the
    tree is enforced by the model builders, so a depth-first search by exact
    id is a function.
    """
    found = find(cfg, oid)
    if found is None:
        raise UnknownObjectError(f"unknown object id {oid!r}")
    return found


def find(cfg: Configuration, oid: str) -> Optional[Object]:
    obj = cfg.get(oid)
    if obj is not None:
        return obj
    for o in cfg:
        if isinstance(o, BasicComponent):
            scopes = (o.prov, o.req)
        elif isinstance(o, TimedComponent):
            scopes = (o.prov, o.req, o.tstate)
        elif isinstance(o, HierComponent):
            scopes = (o.prov, o.req, o.tstate, o.innerreq, o.assembly)
        else:
            continue
        for scope in scopes:
            found = find(scope, oid)
            if found is not None:
                return found
    return None


def replace_deep(cfg: Configuration, new_obj: Object) -> Configuration:
    """Replace the object with ``new_obj.id`` wherever it sits in the tree."""
    out = _replace_deep(cfg, new_obj)
    if out is None:
        raise UnknownObjectError(f"unknown object id {new_obj.id!r}")
    return out


def _replace_deep(cfg: Configuration, new_obj: Object) -> Optional[Configuration]:
    if cfg.get(new_obj.id) is not None:
        return cfg.with_objects(new_obj)
    for o in cfg:
        if isinstance(o, BasicComponent):
            fields = ("prov", "req")
        elif isinstance(o, TimedComponent):
            fields = ("prov", "req", "tstate")
        elif isinstance(o, HierComponent):
            fields = ("prov", "req", "tstate", "innerreq", "assembly")
        else:
            continue
        for f in fields:
            sub = _replace_deep(getattr(o, f), new_obj)
            if sub is not None:
                return cfg.with_objects(_dc_replace(o, **{f: sub}))
    return None


def all_ids(cfg: Configuration) -> list:
    """All object ids in the tree, in traversal order."""
    ids = []
    for o in cfg:
        ids.append(o.id)
        if isinstance(o, BasicComponent):
            ids += all_ids(o.prov) + all_ids(o.req)
        elif isinstance(o, TimedComponent):
            ids += all_ids(o.prov) + all_ids(o.req) + all_ids(o.tstate)
        elif isinstance(o, HierComponent):
            for sub in (o.prov, o.req, o.tstate, o.innerreq, o.assembly):
                ids += all_ids(sub)
    return ids


def validate_global_ids(cfg: Configuration) -> None:
    ids = all_ids(cfg)
    seen = set()
    for i in ids:
        if i in seen:
            raise DuplicateIdError(f"object id {i!r} occurs more than once in the tree")
        seen.add(i)


# ---------------------------------------------------------------------------
# Timed semantics


def delta(cfg: Configuration, t: Time) -> Configuration:
    """Apply a time elapse of ``t`` to every object, recursing into
    component timed state and assemblies.  Ports and connectors are never
    touched; a ``DelayTimer``'s delay field never changes."""
    if t == 0:
        return cfg
    changed = False
    out = []
    for o in cfg:
        n = _delta_obj(o, t)
        changed = changed or n is not o
        out.append(n)
    return Configuration(out) if changed else cfg


def _delta_obj(o: Object, t: Time) -> Object:
    if isinstance(o, Timer):
        v = monus(o.value, t)
        return o if v == o.value else Timer(o.id, v)
    if isinstance(o, OnOffTimer):
        if not o.active:
            return o
        v = monus(o.value, t)
        return o if v == o.value else OnOffTimer(o.id, v, o.active)
    if isinstance(o, DelayTimer):
        v = monus(o.value, t)
        return o if v == o.value else DelayTimer(o.id, v, o.delay)
    if isinstance(o, Clock):
        if o.status != ON:
            return o
        # Saturating advance: beyond cap+1 the exact value cannot matter.
        v = min(o.clock + t, o.cap + 1) if o.clock <= o.cap else o.clock
        return o if v == o.clock else Clock(o.id, v, o.status, o.cap)
    if isinstance(o, TimedComponent):
        ts = delta(o.tstate, t)
        return o if ts is o.tstate else TimedComponent(o.id, o.prov, o.req, ts)
    if isinstance(o, HierComponent):
        ts = delta(o.tstate, t)
        asm = delta(o.assembly, t)
        if ts is o.tstate and asm is o.assembly:
            return o
        return HierComponent(o.id, o.prov, o.req, ts, o.innerreq, asm)
    return o


def mte(cfg: Configuration) -> Time:
    """Maximum time elapse: the minimum deadline over all timers."""
    if cfg._mte is None:
        m: Time = INF
        for o in cfg:
            if isinstance(o, (Timer, DelayTimer)):
                d: Time = o.value
            elif isinstance(o, OnOffTimer):
                d = o.value if o.active else INF
            elif isinstance(o, TimedComponent):
                d = mte(o.tstate)
            elif isinstance(o, HierComponent):
                d = min(mte(o.tstate), mte(o.assembly))
            else:
                continue  # Port / Connector / Clock contribute INF
            if d < m:
                m = d
        cfg._mte = m
    return cfg._mte


def port_scope(cfg: Configuration, enclosing: Optional[HierComponent] = None) -> dict:
    """Ports visible to connectors at this level.

    Bare ports, the prov/req interface of every component at the level, and
    -- inside an assembly -- the outer and inner ports of the enclosing
    hierarchical component.
    """
    scope = {}
    for o in cfg:
        if isinstance(o, Port):
            scope[o.id] = o
        elif isinstance(o, COMPONENT_KINDS):
            for p in o.prov:
                scope[p.id] = p
            for p in o.req:
                scope[p.id] = p
    if enclosing is not None:
        for sub in (enclosing.prov, enclosing.req, enclosing.innerreq):
            for p in sub:
                scope[p.id] = p
    return scope


def consistent(cfg: Configuration, enclosing: Optional[HierComponent] = None) -> bool:
    """True iff every connector (of either kind) joins equal-valued ports,
    recursively through all assemblies."""
    if enclosing is None and cfg._consistent is not None:
        return cfg._consistent
    result = _consistent(cfg, enclosing)
    if enclosing is None:
        cfg._consistent = result
    return result


def _consistent(cfg: Configuration, enclosing: Optional[HierComponent]) -> bool:
    scope = None
    for o in cfg:
        if isinstance(o, (Connector, DelegateConnector)):
            if scope is None:
                scope = port_scope(cfg, enclosing)
            src = scope.get(o.source)
            tgt = scope.get(o.target)
            if src is None:
                raise DanglingEndpointError(
                    f"connector {o.id!r}: no port {o.source!r} in scope"
                )
            if tgt is None:
                raise DanglingEndpointError(
                    f"connector {o.id!r}: no port {o.target!r} in scope"
                )
            if src.value != tgt.value:
                return False
        elif isinstance(o, HierComponent):
            if not _consistent(o.assembly, o):
                return False
    return True


def consistent_component(obj: Object) -> bool:
    """Consistency of a single component: trivially true unless it has an
    assembly with mismatched connectors."""
    if isinstance(obj, HierComponent):
        return _consistent(obj.assembly, obj)
    return True


def canonicalize(cfg: Configuration) -> StateKey:
    """Deterministic, order-independent state key used for hashing during
    exploration.  Two configurations equal as nested multisets get the same
    key."""
    return cfg.key


def has_expired_timer(cfg: Configuration) -> bool:
    """True iff some timer in the tree is at 0 (an OnOffTimer only counts
    while active)."""
    for o in cfg:
        if isinstance(o, (Timer, DelayTimer)) and o.value == 0:
            return True
        if isinstance(o, OnOffTimer) and o.active and o.value == 0:
            return True
        if isinstance(o, TimedComponent):
            if has_expired_timer(o.tstate):
                return True
        elif isinstance(o, HierComponent):
            if has_expired_timer(o.tstate) or has_expired_timer(o.assembly):
                return True
    return False


def strip_object(cfg: Configuration, oid: str) -> Configuration:
    """Remove a top-level object (used to project a transformation clock
    out of a state)."""
    if cfg.get(oid) is None:
        return cfg
    return cfg.without(oid)


def format_config(cfg: Configuration, indent: int = 0) -> str:
    """Readable rendering of a configuration tree."""
    pad = "  " * indent
    lines = []
    for o in cfg:
        if isinstance(o, Port):
            lines.append(f"{pad}{o.id}: Port value={str(o.value).lower()}")
        elif isinstance(o, Timer):
            lines.append(f"{pad}{o.id}: Timer value={fmt_time(o.value)}")
        elif isinstance(o, OnOffTimer):
            lines.append(
                f"{pad}{o.id}: OnOffTimer value={fmt_time(o.value)} active={str(o.active).lower()}"
            )
        elif isinstance(o, DelayTimer):
            lines.append(
                f"{pad}{o.id}: DelayTimer value={fmt_time(o.value)} delay={fmt_time(o.delay)}"
            )
        elif isinstance(o, Clock):
            lines.append(
                f"{pad}{o.id}: Clock clock={fmt_time(o.clock)} status={o.status} cap={fmt_time(o.cap)}"
            )
        elif isinstance(o, (Connector, DelegateConnector)):
            kind = type(o).__name__
            lines.append(f"{pad}{o.id}: {kind} {o.source} -> {o.target}")
        else:
            lines.append(f"{pad}{o.id}: {type(o).__name__}")
            for name in ("prov", "req", "tstate", "innerreq", "assembly"):
                sub = getattr(o, name, None)
                if sub is not None and len(sub):
                    lines.append(f"{pad}  {name}:")
                    lines.append(format_config(sub, indent + 2))
    return "\n".join(lines)
