"""Direct evaluation of metric temporal formulas, independent of the
clock-transformation route.

Two layers: a path-level evaluator that decides a formula on an ultimately
periodic timed path (unrolling bounded operators far enough that the
verdict is exact, including frozen-time Zeno loops), and a graph-level
decision procedure for the two supported metric classes that searches the
original explored graph for a violating run, tracking elapsed time capped
just beyond the largest bound.

The graph-level check is the arbiter for the transformation theorems: it
never builds a Büchi automaton and never touches the transformed theory.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .config import ModelError, Time
from .engine import TimedKripke
from .logic import (
    And,
    Always,
    BoundedAlways,
    BoundedEventually,
    Eventually,
    FalseF,
    Formula,
    Implies,
    Not,
    Or,
    Prop,
    PureLtl,
    Response,
    Safety,
    TrueF,
    Until,
    WeakUntil,
    classify_mtl,
    eval_literal,
    propositions,
)
from .ltlmc import Counterexample, Holds, Verdict


class OracleBudgetError(ModelError):
    """Lasso enumeration exceeded its configured budget."""


@dataclass(frozen=True)
class Lasso:
    """Finite prefix plus repeating cycle of (state, duration) steps; the
    duration of an entry is the time to the next position."""

    prefix: Tuple[Tuple[int, Time], ...]
    loop: Tuple[Tuple[int, Time], ...]

    def __post_init__(self):
        if not self.loop:
            raise ModelError("lasso loop must be non-empty")


# ---------------------------------------------------------------------------
# Path-level evaluation


class _LassoWord:
    """Ultimately periodic timed word: positions 0..p-1 then the loop of
    length L forever.  Suffixes at positions p+i and p+i+L are identical, so
    every formula has the same truth value there."""

    def __init__(self, labels: Sequence[frozenset], durations: Sequence[Time], prefix_len: int):
        if len(labels) != len(durations) or prefix_len >= len(labels):
            raise ModelError("malformed lasso word")
        self.labels = list(labels)
        self.durations = list(durations)
        self.p = prefix_len
        self.L = len(labels) - prefix_len

    def canon(self, pos: int) -> int:
        if pos < self.p:
            return pos
        return self.p + (pos - self.p) % self.L


def eval_word_lasso(
    labels: Sequence[frozenset],
    durations: Sequence[Time],
    prefix_len: int,
    f: Formula,
) -> bool:
    """Truth of ``f`` at position 0 of the infinite unfolding."""
    w = _LassoWord(labels, durations, prefix_len)
    memo: Dict[tuple, bool] = {}
    return _eval(w, f, 0, memo)


def _eval(w: _LassoWord, f: Formula, pos: int, memo: Dict[tuple, bool]) -> bool:
    pos = w.canon(pos)
    key = (id(f), pos)
    hit = memo.get(key)
    if hit is not None:
        return hit
    result = _eval_raw(w, f, pos, memo)
    memo[key] = result
    return result


def _eval_raw(w: _LassoWord, f: Formula, pos: int, memo) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Prop):
        return f.name in w.labels[pos]
    if isinstance(f, Not):
        return not _eval(w, f.arg, pos, memo)
    if isinstance(f, And):
        return _eval(w, f.left, pos, memo) and _eval(w, f.right, pos, memo)
    if isinstance(f, Or):
        return _eval(w, f.left, pos, memo) or _eval(w, f.right, pos, memo)
    if isinstance(f, Implies):
        return (not _eval(w, f.left, pos, memo)) or _eval(w, f.right, pos, memo)
    if isinstance(f, (Until, WeakUntil)):
        weak = isinstance(f, WeakUntil)
        j = pos
        seen: Set[int] = set()
        while True:
            j = w.canon(j)
            if j in seen:
                return weak  # looped: least fixpoint fails, greatest holds
            seen.add(j)
            if _eval(w, f.right, j, memo):
                return True
            if not _eval(w, f.left, j, memo):
                return False
            j += 1
    if isinstance(f, Always):
        j = pos
        seen = set()
        while True:
            j = w.canon(j)
            if j in seen:
                return True
            seen.add(j)
            if not _eval(w, f.arg, j, memo):
                return False
            j += 1
    if isinstance(f, Eventually):
        j = pos
        seen = set()
        while True:
            j = w.canon(j)
            if j in seen:
                return False
            seen.add(j)
            if _eval(w, f.arg, j, memo):
                return True
            j += 1
    if isinstance(f, (BoundedEventually, BoundedAlways)):
        want = isinstance(f, BoundedEventually)
        j = pos
        elapsed: Time = 0
        seen_t: Set[tuple] = set()
        while elapsed <= f.bound:
            j = w.canon(j)
            if (j, elapsed) in seen_t:
                # Zeno loop: time frozen; all in-window positions visited.
                return not want
            seen_t.add((j, elapsed))
            if _eval(w, f.arg, j, memo) == want:
                return want
            elapsed += w.durations[j]
            j += 1
        return not want
    raise ModelError(f"unsupported operator in lasso evaluation: {f!r}")


def eval_mtl_on_lasso(l: Lasso, k: TimedKripke, f: Formula) -> bool:
    labels = [k.labels[s] for (s, _d) in l.prefix] + [k.labels[s] for (s, _d) in l.loop]
    durations = [d for (_s, d) in l.prefix] + [d for (_s, d) in l.loop]
    return eval_word_lasso(labels, durations, len(l.prefix), f)


# ---------------------------------------------------------------------------
# Lasso enumeration (small graphs)


def enumerate_lassos(k: TimedKripke, budget: int = 200_000) -> List[Lasso]:
    """All lassos whose loop is a simple cycle and whose prefix is a simple
    path from the initial state to the loop entry."""
    n = len(k.states)
    succs = [[j for (j, _d, _l) in k.adj[i]] for i in range(n)]
    cycles = _simple_cycles(succs, n, budget)

    # Simple paths from the initial state to each node.
    prefixes: Dict[int, List[Tuple[int, ...]]] = {i: [] for i in range(n)}
    count = [0]

    def path_dfs(node: int, path: List[int], onpath: Set[int]):
        prefixes[node].append(tuple(path))
        count[0] += 1
        if count[0] > budget:
            raise OracleBudgetError(f"more than {budget} simple prefixes")
        for j in succs[node]:
            if j not in onpath:
                onpath.add(j)
                path.append(j)
                path_dfs(j, path, onpath)
                path.pop()
                onpath.discard(j)

    path_dfs(k.initial, [k.initial], {k.initial})

    def dur(i: int, j: int) -> Time:
        for (t, d, _l) in k.adj[i]:
            if t == j:
                return d
        raise ModelError("lasso edge vanished")

    lassos: List[Lasso] = []
    for cyc in cycles:
        for rot in range(len(cyc)):
            entry_cycle = cyc[rot:] + cyc[:rot]
            loop = tuple(
                (entry_cycle[i], dur(entry_cycle[i], entry_cycle[(i + 1) % len(entry_cycle)]))
                for i in range(len(entry_cycle))
            )
            for pre in prefixes[entry_cycle[0]]:
                prefix = tuple(
                    (pre[i], dur(pre[i], pre[i + 1])) for i in range(len(pre) - 1)
                )
                lassos.append(Lasso(prefix, loop))
                if len(lassos) > budget:
                    raise OracleBudgetError(f"more than {budget} lassos")
    return lassos


def _simple_cycles(succs, n: int, budget: int) -> List[Tuple[int, ...]]:
    cycles: List[Tuple[int, ...]] = []
    seen = set()

    def dfs(start: int, node: int, path: List[int], onpath: Set[int]):
        for j in succs[node]:
            if j == start:
                rot = min(range(len(path)), key=lambda i: path[i])
                canon = tuple(path[rot:] + path[:rot])
                if canon not in seen:
                    seen.add(canon)
                    cycles.append(tuple(path))
                    if len(cycles) > budget:
                        raise OracleBudgetError(f"more than {budget} simple cycles")
            elif j > start and j not in onpath:
                onpath.add(j)
                path.append(j)
                dfs(start, j, path, onpath)
                path.pop()
                onpath.discard(j)

    for s in range(n):
        dfs(s, s, [s], {s})
    return cycles


def _rotate(cycle: Tuple[int, ...], state: int) -> Tuple[int, ...]:
    i = cycle.index(state)
    return cycle[i:] + cycle[:i]


def brute_force_ltl(k: TimedKripke, f: Formula, budget: int = 400_000) -> Verdict:
    """Semantic LTL check by evaluating the formula on every enumerable
    lasso: all simple-loop lassos plus lassos whose loop splices two or
    three simple cycles at shared states.  The composites matter because a
    formula like <>[]a \\/ <>[]b only fails on loops that mix cycles.

    Exponential; intended for the tiny structures of the agreement suite.
    """
    n = len(k.states)
    succs = [[j for (j, _d, _l) in k.adj[i]] for i in range(n)]
    cycles = _simple_cycles(succs, n, budget)

    loops: List[Tuple[int, ...]] = list(cycles)
    by_state: Dict[int, List[Tuple[int, ...]]] = {}
    for c in cycles:
        for s in c:
            by_state.setdefault(s, []).append(c)
    pairs: List[Tuple[int, ...]] = []
    seen = set(map(tuple, loops))
    for s, cs in sorted(by_state.items()):
        for a in cs:
            for b in cs:
                if a is b:
                    continue
                combo = _rotate(a, s) + _rotate(b, s)
                if len(combo) <= 3 * n and combo not in seen:
                    seen.add(combo)
                    pairs.append(combo)
                    if len(loops) + len(pairs) > budget:
                        raise OracleBudgetError("composite loop budget exceeded")
    triples: List[Tuple[int, ...]] = []
    for combo in pairs:
        for s in sorted(set(combo)):
            for c in by_state.get(s, ()):
                t = _rotate(combo, s) + _rotate(c, s)
                if len(t) <= 4 * n and t not in seen:
                    seen.add(t)
                    triples.append(t)
                    if len(loops) + len(pairs) + len(triples) > budget:
                        raise OracleBudgetError("composite loop budget exceeded")
    loops += pairs + triples

    # Simple paths from the initial state, grouped by endpoint.
    prefixes: Dict[int, List[Tuple[int, ...]]] = {i: [] for i in range(n)}
    count = [0]

    def path_dfs(node: int, path: List[int], onpath: Set[int]):
        prefixes[node].append(tuple(path))
        count[0] += 1
        if count[0] > budget:
            raise OracleBudgetError("prefix budget exceeded")
        for j in succs[node]:
            if j not in onpath:
                onpath.add(j)
                path.append(j)
                path_dfs(j, path, onpath)
                path.pop()
                onpath.discard(j)

    path_dfs(k.initial, [k.initial], {k.initial})

    def dur(i: int, j: int) -> Time:
        for (t, d, _l) in k.adj[i]:
            if t == j:
                return d
        raise ModelError("lasso edge vanished")

    checked = 0
    for loop_states in loops:
        entries = set(loop_states)
        for entry in sorted(entries):
            rotated = _rotate(loop_states, entry)
            loop = tuple(
                (rotated[i], dur(rotated[i], rotated[(i + 1) % len(rotated)]))
                for i in range(len(rotated))
            )
            for pre in prefixes[entry]:
                prefix = tuple(
                    (pre[i], dur(pre[i], pre[i + 1])) for i in range(len(pre) - 1)
                )
                l = Lasso(prefix, loop)
                checked += 1
                if checked > budget:
                    raise OracleBudgetError("lasso budget exceeded")
                if not eval_mtl_on_lasso(l, k, f):
                    return Counterexample(l.prefix, l.loop)
    return Holds()


# ---------------------------------------------------------------------------
# Graph-level decisions for the two metric classes


def _bfs_pairs(k: TimedKripke, source: int, target: int) -> List[Tuple[int, Time]]:
    """Shortest path as (state, duration-to-next) pairs, excluding the
    target state itself."""
    if source == target:
        return []
    parent: Dict[int, Tuple[int, Time]] = {source: (None, 0)}
    dq = deque([source])
    while dq:
        i = dq.popleft()
        for (j, d, _l) in k.adj[i]:
            if j not in parent:
                parent[j] = (i, d)
                if j == target:
                    pairs = []
                    cur = j
                    while cur != source:
                        prev, dur = parent[cur]
                        pairs.append((prev, dur))
                        cur = prev
                    return pairs[::-1]
                dq.append(j)
    raise ModelError(f"state {target} unreachable from {source}")


def _extend_to_cycle(k: TimedKripke, start: int) -> Tuple[tuple, tuple]:
    """Continue from ``start`` along first successors until a cycle closes;
    the transition relation is total, so this terminates.  Returns
    (tail pairs, loop pairs); the tail starts at ``start``."""
    seq: List[Tuple[int, Time]] = []
    pos = {start: 0}
    cur = start
    while True:
        nxt, dur, _l = k.adj[cur][0]
        seq.append((cur, dur))
        if nxt in pos:
            i = pos[nxt]
            return tuple(seq[:i]), tuple(seq[i:])
        pos[nxt] = len(seq)
        cur = nxt


def _sat_vectors(k: TimedKripke, lits) -> List[List[bool]]:
    vecs = []
    for lit in lits:
        if isinstance(lit, Prop):
            vecs.append([lit.name in labs for labs in k.labels])
        else:
            vecs.append([lit.arg.name not in labs for labs in k.labels])
    return vecs


def _check_response(k: TimedKripke, spec_pairs, budget: int) -> Verdict:
    """Violation: some suffix on which every obligation q_i is missed
    within its bound.  Search the (state, capped elapsed) product for an
    infinite constrained run, anchoring at every reachable state."""
    lits = [q for (q, _b) in spec_pairs]
    bounds = [b for (_q, b) in spec_pairs]
    cap = max(bounds) + 1
    sat = _sat_vectors(k, lits)
    n = len(k.states)

    def ok(s: int, tau: Time) -> bool:
        for qi, bi in zip(sat, bounds):
            if qi[s] and tau <= bi:
                return False
        return True

    edges: Dict[Tuple[int, Time], List[Tuple[Tuple[int, Time], Time]]] = {}
    dq = deque()
    for s in range(n):
        if ok(s, 0):
            node = (s, 0)
            edges[node] = None
            dq.append(node)
    while dq:
        node = dq.popleft()
        (s, tau) = node
        outs = []
        for (j, d, _l) in k.adj[s]:
            tau2 = min(tau + d, cap)
            if ok(j, tau2):
                t = (j, tau2)
                outs.append((t, d))
                if t not in edges:
                    edges[t] = None
                    dq.append(t)
        edges[node] = outs
        if len(edges) > budget:
            raise OracleBudgetError("response product exceeded budget")

    # Peel nodes without successors (Kahn-style on reversed edges);
    # whatever survives can run forever under the constraint.
    out_deg = {node: len(outs) for node, outs in edges.items()}
    rev: Dict[Tuple[int, Time], List[Tuple[int, Time]]] = {node: [] for node in edges}
    for node, outs in edges.items():
        for (t, _d) in outs:
            rev[t].append(node)
    peel = deque(node for node, deg in out_deg.items() if deg == 0)
    dead: Set[Tuple[int, Time]] = set(peel)
    while peel:
        node = peel.popleft()
        for prev in rev[node]:
            out_deg[prev] -= 1
            if out_deg[prev] == 0 and prev not in dead:
                dead.add(prev)
                peel.append(prev)
    alive = {node for node in edges if node not in dead}
    anchors = sorted(s for (s, tau) in alive if tau == 0)
    if not anchors:
        return Holds()

    # Reconstruct: the anchor closest to the initial state, then a
    # constrained walk inside the alive region until a product cycle closes.
    dist = {k.initial: 0}
    bfs = deque([k.initial])
    while bfs:
        i = bfs.popleft()
        for (j, _d, _l) in k.adj[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                bfs.append(j)
    anchor_s = min(anchors, key=lambda s: (dist[s], s))
    pre = _bfs_pairs(k, k.initial, anchor_s)
    walk: List[Tuple[Tuple[int, Time], Time]] = []
    pos = {(anchor_s, 0): 0}
    cur = (anchor_s, 0)
    while True:
        nxt, dur = next((t, d) for (t, d) in edges[cur] if t in alive)
        walk.append((cur, dur))
        if nxt in pos:
            i = pos[nxt]
            tail = tuple((s, d) for ((s, _tau), d) in walk[:i])
            loop = tuple((s, d) for ((s, _tau), d) in walk[i:])
            break
        pos[nxt] = len(walk)
        cur = nxt
    return Counterexample(tuple(pre) + tail, loop)


def _check_safety(k: TimedKripke, spec: Safety, budget: int) -> Verdict:
    """Violation: a reachable state with ~p from which ~q is reachable
    within the bound (inclusive)."""
    p_vec, q_vec = _sat_vectors(k, [spec.p, spec.q])
    n = len(k.states)
    b = spec.bound

    paths: Dict[Tuple[int, Time], Optional[Tuple[Tuple[int, Time], Time]]] = {}
    dq = deque()
    for s in range(n):
        if not p_vec[s]:
            node = (s, 0)
            if node not in paths:
                paths[node] = None
                dq.append(node)
    while dq:
        node = dq.popleft()
        (s, tau) = node
        if not q_vec[s]:
            chain: List[Tuple[int, Time]] = []
            cur = node
            while cur is not None:
                back = paths[cur]
                if back is None:
                    anchor = cur[0]
                    break
                prev, dur = back
                chain.append((prev[0], dur))
                cur = prev
            chain.reverse()
            pre = _bfs_pairs(k, k.initial, anchor)
            tail, loop = _extend_to_cycle(k, s)
            return Counterexample(tuple(pre) + tuple(chain) + tail, loop)
        for (j, d, _l) in k.adj[s]:
            tau2 = tau + d
            if tau2 > b:
                continue
            t = (j, tau2)
            if t not in paths:
                paths[t] = (node, d)
                dq.append(t)
        if len(paths) > budget:
            raise OracleBudgetError("safety window search exceeded budget")
    return Holds()


def check_mtl_exhaustive(k: TimedKripke, f: Formula, budget: int = 200_000) -> Verdict:
    """Decide a supported formula directly on the explored graph.

    Response and safety classes get the dedicated elapsed-time searches
    (sound and complete for these classes on finite graphs).  Pure LTL falls
    back to exhaustive simple-lasso enumeration, which is only feasible on
    small graphs and is budget-guarded.
    """
    missing = propositions(f) - set(k.prop_names)
    if missing:
        raise ModelError(f"formula propositions not in labeling: {sorted(missing)}")
    cls = classify_mtl(f)
    if isinstance(cls, Response):
        return _check_response(k, cls.pairs, budget)
    if isinstance(cls, Safety):
        return _check_safety(k, cls, budget)
    if isinstance(cls, PureLtl):
        for l in enumerate_lassos(k, budget):
            if not eval_mtl_on_lasso(l, k, f):
                return Counterexample(l.prefix, l.loop)
        return Holds()
    raise ModelError(f"unsupported formula class: {cls.reason}")
