"""Untimed LTL model checking of explored state graphs.

Classic pipeline: negate the formula, put it in negation normal form over
{literals, and, or, U, W}, build a Büchi automaton with the on-the-fly
tableau construction (nodes with old/next obligations), degeneralize, and
run a nested depth-first search on the product with the state graph.
Counterexamples come back as lassos with a shortest-possible prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

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
    TrueF,
    Until,
    WeakUntil,
    propositions,
)


class BoundedOperatorError(ModelError):
    pass


# ---------------------------------------------------------------------------
# Negation normal form over {True, False, lit, And, Or, Until, WeakUntil}


def to_nnf(f: Formula, neg: bool = False) -> Formula:
    if isinstance(f, TrueF):
        return FalseF() if neg else f
    if isinstance(f, FalseF):
        return TrueF() if neg else f
    if isinstance(f, Prop):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return to_nnf(f.arg, not neg)
    if isinstance(f, Implies):
        return to_nnf(Or(Not(f.left), f.right), neg)
    if isinstance(f, And):
        if neg:
            return Or(to_nnf(f.left, True), to_nnf(f.right, True))
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        if neg:
            return And(to_nnf(f.left, True), to_nnf(f.right, True))
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Until):
        if neg:
            nb = to_nnf(f.right, True)
            return WeakUntil(nb, And(to_nnf(f.left, True), nb))
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, WeakUntil):
        if neg:
            nb = to_nnf(f.right, True)
            return Until(nb, And(to_nnf(f.left, True), nb))
        return WeakUntil(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Always):
        if neg:
            return Until(TrueF(), to_nnf(f.arg, True))
        return WeakUntil(to_nnf(f.arg), FalseF())
    if isinstance(f, Eventually):
        if neg:
            return WeakUntil(to_nnf(f.arg, True), FalseF())
        return Until(TrueF(), to_nnf(f.arg))
    if isinstance(f, (BoundedAlways, BoundedEventually)):
        raise BoundedOperatorError(
            "bounded operator in a pure-LTL context; transform the formula first"
        )
    raise ModelError(f"cannot normalize {f!r}")


def _until_subformulas(f: Formula) -> List[Formula]:
    out = []

    def walk(g):
        if isinstance(g, Until):
            if g not in out:
                out.append(g)
            walk(g.left)
            walk(g.right)
        elif isinstance(g, WeakUntil):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Not):
            walk(g.arg)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Tableau construction (node-based expansion, then degeneralization)


@dataclass
class BuchiAutomaton:
    """Büchi automaton whose states carry literal guards.

    A run over a word reads one letter per state: the letter at position i
    must satisfy the guard (required-true / required-false propositions) of
    the i-th run state.  Guards are consistent by construction.
    """

    n_states: int
    initial: Tuple[int, ...]
    guards: List[Tuple[FrozenSet[str], FrozenSet[str]]]  # (pos, neg) per state
    adj: List[List[int]]
    accepting: FrozenSet[int]


class _Node:
    __slots__ = ("incoming", "new", "old", "next")

    def __init__(self, incoming, new, old, nxt):
        self.incoming = set(incoming)
        self.new = set(new)
        self.old = set(old)
        self.next = set(nxt)


_INIT = -1


def _expand(node: _Node, done: list) -> None:
    if not node.new:
        for other_old, other_next, other in done:
            if other_old == node.old and other_next == node.next:
                other.incoming |= node.incoming
                return
        done.append((set(node.old), set(node.next), node))
        nid = len(done) - 1
        _expand(_Node({nid}, node.next, set(), set()), done)
        return
    f = node.new.pop()
    if isinstance(f, FalseF):
        return  # contradiction, drop this node
    if isinstance(f, TrueF):
        _expand(node, done)
        return
    if isinstance(f, (Prop, Not)):
        comp = f.arg if isinstance(f, Not) else Not(f)
        if comp in node.old:
            return
        node.old.add(f)
        _expand(node, done)
        return
    if isinstance(f, And):
        node.old.add(f)
        for g in (f.left, f.right):
            if g not in node.old:
                node.new.add(g)
        _expand(node, done)
        return
    if isinstance(f, (Or, Until, WeakUntil)):
        node.old.add(f)
        left = _Node(node.incoming, set(node.new), set(node.old), set(node.next))
        right = _Node(node.incoming, set(node.new), set(node.old), set(node.next))
        if isinstance(f, Or):
            if f.left not in left.old:
                left.new.add(f.left)
            if f.right not in right.old:
                right.new.add(f.right)
        else:
            # f = a U b (or a W b) = b \/ (a /\ X f)
            if f.left not in left.old:
                left.new.add(f.left)
            left.next.add(f)
            if f.right not in right.old:
                right.new.add(f.right)
        _expand(left, done)
        _expand(right, done)
        return
    raise ModelError(f"unexpected formula in tableau: {f!r}")


def build_automaton(g: Formula) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the models of the NNF formula ``g``."""
    done: list = []
    _expand(_Node({_INIT}, {g}, set(), set()), done)

    n = len(done)
    nodes = [entry[2] for entry in done]
    guards = []
    for node in nodes:
        pos = frozenset(p.name for p in node.old if isinstance(p, Prop))
        neg = frozenset(
            p.arg.name for p in node.old if isinstance(p, Not) and isinstance(p.arg, Prop)
        )
        guards.append((pos, neg))
    adj: List[List[int]] = [[] for _ in range(n)]
    initial = []
    for j, node in enumerate(nodes):
        for i in node.incoming:
            if i == _INIT:
                initial.append(j)
            else:
                adj[i].append(j)

    untils = _until_subformulas(g)
    if untils:
        fsets = [
            frozenset(
                j for j, node in enumerate(nodes) if u not in node.old or u.right in node.old
            )
            for u in untils
        ]
    else:
        fsets = [frozenset(range(n))]
    k = len(fsets)

    if k == 1:
        return BuchiAutomaton(n, tuple(initial), guards, adj, fsets[0])

    # Degeneralize with a counter: leave counter i when the source state is
    # in the i-th acceptance set; accept on (state in F_0, counter 0).
    n2 = n * k
    guards2 = [guards[q] for _c in range(k) for q in range(n)]
    adj2: List[List[int]] = [[] for _ in range(n2)]
    for c in range(k):
        for q in range(n):
            c2 = (c + 1) % k if q in fsets[c] else c
            adj2[c * n + q] = [c2 * n + r for r in adj[q]]
    initial2 = tuple(q for q in initial)  # counter 0
    accepting2 = frozenset(q for q in fsets[0])  # (q, counter 0)
    return BuchiAutomaton(n2, initial2, guards2, adj2, accepting2)


def to_buchi(f: Formula) -> BuchiAutomaton:
    """Automaton for the negation of ``f``, as used in the emptiness check."""
    return build_automaton(to_nnf(f, neg=True))


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Counterexample:
    prefix: Tuple[Tuple[int, Time], ...]
    loop: Tuple[Tuple[int, Time], ...]

    def to_json(self) -> dict:
        return {
            "result": "counterexample",
            "prefix": [{"state": s, "duration": d} for (s, d) in self.prefix],
            "loop": [{"state": s, "duration": d} for (s, d) in self.loop],
        }


@dataclass(frozen=True)
class Holds:
    def to_json(self) -> dict:
        return {"result": "holds"}


Verdict = object  # Holds | Counterexample


# ---------------------------------------------------------------------------
# Product emptiness (nested DFS) and counterexample reconstruction


def _guard_ok(labels: frozenset, guard) -> bool:
    pos, neg = guard
    return pos <= labels and not (neg & labels)


class _Product:
    """Lazy product of a state graph with a Büchi automaton.

    Product nodes are ``q * n_states + s`` for Kripke state s, automaton
    state q; a node is valid when the state's labels satisfy the automaton
    guard (checked at creation of the target)."""

    def __init__(self, k: TimedKripke, a: BuchiAutomaton):
        self.k = k
        self.a = a
        self.nk = len(k.states)

    def initial(self):
        s = self.k.initial
        labs = self.k.labels[s]
        return [
            q * self.nk + s for q in self.a.initial if _guard_ok(labs, self.a.guards[q])
        ]

    def succ(self, node: int):
        q, s = divmod(node, self.nk)
        out = []
        for (s2, _dur, _label) in self.k.adj[s]:
            labs = self.k.labels[s2]
            for q2 in self.a.adj[q]:
                if _guard_ok(labs, self.a.guards[q2]):
                    out.append(q2 * self.nk + s2)
        return out

    def accepting(self, node: int) -> bool:
        return node // self.nk in self.a.accepting


def _ndfs_has_accepting_cycle(p: _Product) -> bool:
    """Iterative nested DFS (blue/red with cyan stack marking)."""
    blue = set()
    cyan = set()
    red = set()

    for root in p.initial():
        if root in blue:
            continue
        # Each stack entry: (node, iterator over successors)
        stack = [(root, iter(p.succ(root)))]
        cyan.add(root)
        while stack:
            node, it = stack[-1]
            advanced = False
            for t in it:
                if t in cyan and (p.accepting(node) or p.accepting(t)):
                    return True
                if t not in blue and t not in cyan:
                    cyan.add(t)
                    stack.append((t, iter(p.succ(t))))
                    advanced = True
                    break
            if advanced:
                continue
            # postorder on node
            stack.pop()
            if p.accepting(node):
                rstack = [node]
                if node not in red:
                    red.add(node)
                    work = [iter(p.succ(node))]
                    while work:
                        found = False
                        for t in work[-1]:
                            if t in cyan:
                                return True
                            if t not in red:
                                red.add(t)
                                work.append(iter(p.succ(t)))
                                found = True
                                break
                        if not found:
                            work.pop()
            cyan.discard(node)
            blue.add(node)
    return False


def _reconstruct_counterexample(p: _Product) -> Counterexample:
    """Shortest-prefix lasso: BFS over the product to the first accepting
    state that lies on a cycle of its strongly connected component."""
    # Reachability BFS with parents.
    from collections import deque

    parent: Dict[int, Optional[int]] = {}
    order = []
    dq = deque()
    for root in p.initial():
        if root not in parent:
            parent[root] = None
            dq.append(root)
    while dq:
        node = dq.popleft()
        order.append(node)
        for t in p.succ(node):
            if t not in parent:
                parent[t] = node
                dq.append(t)

    reachable = list(parent.keys())
    succ_cache = {node: [t for t in p.succ(node) if t in parent] for node in reachable}

    # Iterative Tarjan SCC over the reachable product.
    index: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on: set = set()
    comp: Dict[int, int] = {}
    counter = [0]
    ncomp = [0]
    st: List[int] = []
    for start in reachable:
        if start in index:
            continue
        work = [(start, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                st.append(node)
                on.add(node)
            recurse = False
            edges = succ_cache[node]
            while pi < len(edges):
                t = edges[pi]
                pi += 1
                if t not in index:
                    work[-1] = (node, pi)
                    work.append((t, 0))
                    recurse = True
                    break
                if t in on:
                    low[node] = min(low[node], index[t])
            if recurse:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = st.pop()
                    on.discard(w)
                    comp[w] = ncomp[0]
                    if w == node:
                        break
                ncomp[0] += 1
            if work:
                pnode = work[-1][0]
                low[pnode] = min(low[pnode], low[node])

    comp_size: Dict[int, int] = {}
    for node in reachable:
        comp_size[comp[node]] = comp_size.get(comp[node], 0) + 1

    def on_cycle(node: int) -> bool:
        if comp_size[comp[node]] > 1:
            return True
        return node in succ_cache[node]

    target = None
    for node in order:  # BFS order -> shortest prefix
        if p.accepting(node) and on_cycle(node):
            target = node
            break
    if target is None:
        raise ModelError("no accepting cycle to reconstruct")

    prefix_nodes = []
    node: Optional[int] = target
    while node is not None:
        prefix_nodes.append(node)
        node = parent[node]
    prefix_nodes.reverse()

    # Shortest cycle through target within its SCC.
    target_comp = comp[target]
    par2: Dict[int, int] = {}
    dq = deque([target])
    seen = {target}
    closed = None
    while dq and closed is None:
        nd = dq.popleft()
        for t in succ_cache[nd]:
            if comp.get(t) != target_comp:
                continue
            if t == target:
                closed = nd
                break
            if t not in seen:
                seen.add(t)
                par2[t] = nd
                dq.append(t)
    loop_nodes = []
    nd = closed
    while nd != target:
        loop_nodes.append(nd)
        nd = par2[nd]
    loop_nodes.append(target)
    loop_nodes.reverse()  # starts at target

    def project(nodes: List[int]) -> List[int]:
        return [n % p.nk for n in nodes]

    kp = project(prefix_nodes)
    kl = project(loop_nodes)

    def edge_duration(s: int, s2: int) -> Time:
        for (t, dur, _label) in p.k.adj[s]:
            if t == s2:
                return dur
        raise ModelError("counterexample projection lost an edge")

    prefix = []
    for i in range(len(kp) - 1):
        prefix.append((kp[i], edge_duration(kp[i], kp[i + 1])))
    loop = []
    for i in range(len(kl)):
        nxt = kl[(i + 1) % len(kl)]
        loop.append((kl[i], edge_duration(kl[i], nxt)))
    return Counterexample(*compress_lasso(tuple(prefix), tuple(loop)))


def compress_lasso(prefix: tuple, loop: tuple) -> tuple:
    """Rotate the loop backwards over an identical prefix tail; the infinite
    path is unchanged but the reported prefix gets shorter."""
    prefix = list(prefix)
    loop = list(loop)
    while prefix and prefix[-1] == loop[-1]:
        prefix.pop()
        loop = [loop[-1]] + loop[:-1]
    return tuple(prefix), tuple(loop)


def model_check_ltl(k: TimedKripke, f: Formula) -> Verdict:
    """Holds iff every infinite path from the initial state satisfies ``f``;
    otherwise a lasso counterexample with a minimal-length prefix."""
    missing = propositions(f) - set(k.prop_names)
    if missing:
        raise ModelError(f"formula propositions not in labeling: {sorted(missing)}")
    a = to_buchi(f)
    p = _Product(k, a)
    if not _ndfs_has_accepting_cycle(p):
        return Holds()
    return _reconstruct_counterexample(p)


def word_kripke(labels: Sequence[frozenset], prefix_len: int, props: Tuple[str, ...]) -> TimedKripke:
    """Single-lasso graph for a word: used to decide automaton acceptance of
    an ultimately periodic word via the product machinery."""
    n = len(labels)
    if not (0 <= prefix_len < n):
        raise ModelError("word lasso needs a non-empty loop")
    adj = [[(i + 1 if i + 1 < n else prefix_len, 0, "w")] for i in range(n)]
    return TimedKripke(list(range(n)), 0, adj, [frozenset(l) for l in labels], props)


def automaton_accepts_word(
    a: BuchiAutomaton, labels: Sequence[frozenset], prefix_len: int, props: Tuple[str, ...]
) -> bool:
    k = word_kripke(labels, prefix_len, props)
    return _ndfs_has_accepting_cycle(_Product(k, a))
