"""Trace-framed point graphs.

A graph is a set of labelled nodes with port-to-port edges, an ordered input
and output interface (lists of wire nodes) and a set of feedback wire nodes.
Removing the feedback nodes leaves a DAG, and each feedback node has exactly
one incoming and one outgoing edge.

Public operations return fresh graphs. Functions whose name starts with an
underscore mutate their argument and are used by the rewriting engine.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import networkx as nx
from networkx.algorithms.isomorphism import MultiDiGraphMatcher

from . import term as T
from .lattice import Signature


class Kind(enum.Enum):
    WIRE = "wire"
    VALUE = "value"
    GATE = "gate"
    DELAY = "delay"
    FORK = "fork"
    JOIN = "join"
    STUB = "stub"
    BOX = "box"


@dataclass(frozen=True)
class NodeLabel:
    kind: Kind
    n_in: int = 1
    n_out: int = 1
    value: int | None = None
    name: str | None = None

    def __str__(self):
        if self.kind is Kind.VALUE:
            return f"value({self.value})"
        if self.kind in (Kind.GATE, Kind.BOX):
            return f"{self.kind.value}({self.name})"
        return self.kind.value


WIRE = NodeLabel(Kind.WIRE)
DELAY = NodeLabel(Kind.DELAY)
FORK = NodeLabel(Kind.FORK, 1, 2)
JOIN = NodeLabel(Kind.JOIN, 2, 1)
STUB = NodeLabel(Kind.STUB, 1, 0)


def value_label(v: int) -> NodeLabel:
    return NodeLabel(Kind.VALUE, 0, 1, value=v)


def gate_label(name: str, arity: int) -> NodeLabel:
    return NodeLabel(Kind.GATE, arity, 1, name=name)


def box_label(name: str, m: int, n: int) -> NodeLabel:
    return NodeLabel(Kind.BOX, m, n, name=name)


Port = tuple[int, int]


class TfpgError(ValueError):
    pass


class Tfpg:
    """Mutable storage; treat instances handed out by public functions as values."""

    def __init__(self):
        self.labels: dict[int, NodeLabel] = {}
        self.succ: dict[Port, Port] = {}
        self.pred: dict[Port, Port] = {}
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self.feedback: set[int] = set()
        self.next_id = 0

    # -- primitive edits -------------------------------------------------
    def add(self, label: NodeLabel) -> int:
        n = self.next_id
        self.next_id += 1
        self.labels[n] = label
        return n

    def connect(self, a: int, ap: int, b: int, bp: int) -> None:
        if (a, ap) in self.succ or (b, bp) in self.pred:
            raise TfpgError(f"port already connected: ({a},{ap}) -> ({b},{bp})")
        self.succ[(a, ap)] = (b, bp)
        self.pred[(b, bp)] = (a, ap)

    def disconnect_in(self, b: int, bp: int) -> Port:
        src = self.pred.pop((b, bp))
        del self.succ[src]
        return src

    def disconnect_out(self, a: int, ap: int) -> Port:
        dst = self.succ.pop((a, ap))
        del self.pred[dst]
        return dst

    def remove(self, n: int) -> None:
        lab = self.labels.pop(n)
        for p in range(lab.n_in):
            if (n, p) in self.pred:
                self.disconnect_in(n, p)
        for p in range(lab.n_out):
            if (n, p) in self.succ:
                self.disconnect_out(n, p)
        self.feedback.discard(n)

    def relabel(self, n: int, label: NodeLabel) -> None:
        """Change a label; ports beyond the new arity are disconnected."""
        old = self.labels[n]
        for p in range(label.n_in, old.n_in):
            if (n, p) in self.pred:
                self.disconnect_in(n, p)
        for p in range(label.n_out, old.n_out):
            if (n, p) in self.succ:
                self.disconnect_out(n, p)
        self.labels[n] = label

    def bypass(self, n: int) -> None:
        """Remove a 1-in/1-out node, joining its neighbours directly."""
        a = self.disconnect_in(n, 0)
        b = self.disconnect_out(n, 0)
        self.remove(n)
        if a[0] == n:
            return
        self.connect(a[0], a[1], b[0], b[1])

    # -- queries ---------------------------------------------------------
    def src(self, n: int, p: int = 0) -> Port:
        return self.pred[(n, p)]

    def dst(self, n: int, p: int = 0) -> Port:
        return self.succ[(n, p)]

    def kind(self, n: int) -> Kind:
        return self.labels[n].kind

    def nodes(self, kind: Kind | None = None) -> list[int]:
        if kind is None:
            return sorted(self.labels)
        return sorted(n for n, lab in self.labels.items() if lab.kind is kind)

    @property
    def arity(self) -> T.Arity:
        return T.Arity(len(self.inputs), len(self.outputs))

    def is_interface(self, n: int) -> bool:
        return n in self.inputs or n in self.outputs

    def copy(self) -> "Tfpg":
        g = Tfpg()
        g.labels = dict(self.labels)
        g.succ = dict(self.succ)
        g.pred = dict(self.pred)
        g.inputs = list(self.inputs)
        g.outputs = list(self.outputs)
        g.feedback = set(self.feedback)
        g.next_id = self.next_id
        return g

    def embed(self, other: "Tfpg") -> dict[int, int]:
        """Copy other's nodes and edges into self; returns the id mapping."""
        mapping = {n: self.add(lab) for n, lab in sorted(other.labels.items())}
        for (a, ap), (b, bp) in other.succ.items():
            self.connect(mapping[a], ap, mapping[b], bp)
        self.feedback |= {mapping[f] for f in other.feedback}
        return mapping

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return (f"Tfpg({self.arity}, nodes={len(self.labels)}, "
                f"feedback={len(self.feedback)})")


# -- validation -------------------------------------------------------------

def check(g: Tfpg, normalized: bool = True) -> None:
    """Raise TfpgError if g breaks a structural invariant."""
    ins, outs = set(g.inputs), set(g.outputs)
    if len(ins) != len(g.inputs) or len(outs) != len(g.outputs):
        raise TfpgError("interface lists repeat a node")
    if ins & outs:
        raise TfpgError("a node is both an input and an output")
    if (ins | outs) & g.feedback:
        raise TfpgError("interface nodes cannot be feedback nodes")
    for n in ins | outs | g.feedback:
        if n not in g.labels or g.labels[n].kind is not Kind.WIRE:
            raise TfpgError(f"interface/feedback node {n} is not a wire node")
    for n, lab in g.labels.items():
        for p in range(lab.n_in):
            if ((n, p) in g.pred) == (n in ins):
                raise TfpgError(f"node {n} ({lab}) input port {p} has wrong connectivity")
        for p in range(lab.n_out):
            if ((n, p) in g.succ) == (n in outs):
                raise TfpgError(f"node {n} ({lab}) output port {p} has wrong connectivity")
        if normalized and lab.kind is Kind.WIRE and n not in ins | outs | g.feedback:
            raise TfpgError(f"removable wire node {n} left in a normalized graph")
    for (a, ap), (b, bp) in g.succ.items():
        if g.pred.get((b, bp)) != (a, ap):
            raise TfpgError("edge tables disagree")
        if ap >= g.labels[a].n_out or bp >= g.labels[b].n_in:
            raise TfpgError(f"edge uses a port outside the label arity at {a}->{b}")
    if len(g.succ) != len(g.pred):
        raise TfpgError("edge tables disagree")
    if topological_order(g) is None:
        raise TfpgError("graph has a cycle that avoids the feedback nodes")


def topological_order(g: Tfpg, cut: Iterable[int] | None = None) -> list[int] | None:
    """Order of all nodes with edges out of cut nodes (default: feedback) ignored; None if cyclic."""
    cut = g.feedback if cut is None else set(cut)
    indeg = {n: 0 for n in g.labels}
    for (a, _), (b, _) in g.succ.items():
        if a not in cut:
            indeg[b] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    queue = deque(ready)
    order = []
    while queue:
        n = queue.popleft()
        order.append(n)
        if n in cut:
            continue
        for p in range(g.labels[n].n_out):
            b = g.succ.get((n, p))
            if b is None:
                continue
            indeg[b[0]] -= 1
            if indeg[b[0]] == 0:
                queue.append(b[0])
    return order if len(order) == len(g.labels) else None


# -- wire homeomorphism -----------------------------------------------------

def _normalize_wires(g: Tfpg) -> Tfpg:
    iface = set(g.inputs) | set(g.outputs)
    for n in sorted(g.labels):
        if n not in g.labels or g.labels[n].kind is not Kind.WIRE or n in iface:
            continue
        if n in g.feedback:
            a = g.pred[(n, 0)][0]
            # two feedback nodes in a row: one is enough to cut the loop
            if a != n and a in g.feedback:
                g.bypass(n)
            continue
        if g.pred[(n, 0)][0] == n:
            raise TfpgError(f"loop of plain wires through {n} has no feedback node")
        g.bypass(n)
    return g


def normalize_wires(g: Tfpg) -> Tfpg:
    out = _normalize_wires(g.copy())
    check(out)
    return out


# -- graph algebra ----------------------------------------------------------

def _disjoint(g1: Tfpg, g2: Tfpg) -> tuple[Tfpg, dict[int, int]]:
    g = g1.copy()
    return g, g.embed(g2)


def compose_seq(g1: Tfpg, g2: Tfpg, normalize: bool = True) -> Tfpg:
    if len(g1.outputs) != len(g2.inputs):
        raise T.ArityError(f"cannot compose {g1.arity} with {g2.arity}", g1.arity, g2.arity)
    g, m = _disjoint(g1, g2)
    for o, i in zip(g1.outputs, g2.inputs):
        g.connect(o, 0, m[i], 0)
    g.outputs = [m[o] for o in g2.outputs]
    if normalize:
        _normalize_wires(g)
        check(g)
    return g


def tensor(g1: Tfpg, g2: Tfpg) -> Tfpg:
    g, m = _disjoint(g1, g2)
    g.inputs = g1.inputs + [m[i] for i in g2.inputs]
    g.outputs = g1.outputs + [m[o] for o in g2.outputs]
    check(g, normalized=False)
    return g


def close_trace(g: Tfpg, k: int, normalize: bool = True) -> Tfpg:
    if k > min(len(g.inputs), len(g.outputs)):
        raise T.ArityError(f"cannot trace {k} wires of {g.arity}", g.arity, T.Arity(k, k))
    h = g.copy()
    if k:
        for o, i in zip(h.outputs[-k:], h.inputs[-k:]):
            h.connect(o, 0, i, 0)
            h.feedback.add(o)
        h.outputs = h.outputs[:-k]
        h.inputs = h.inputs[:-k]
    if normalize:
        _normalize_wires(h)
        check(h)
    return h


def _emit(g: Tfpg, t: T.Term) -> tuple[list[int], list[int]]:
    """Build t inside g; returns its dangling input and output wire nodes."""
    def atom(label: NodeLabel) -> tuple[list[int], list[int]]:
        n = g.add(label)
        ins = []
        for p in range(label.n_in):
            w = g.add(WIRE)
            g.connect(w, 0, n, p)
            ins.append(w)
        outs = []
        for p in range(label.n_out):
            w = g.add(WIRE)
            g.connect(n, p, w, 0)
            outs.append(w)
        return ins, outs

    if isinstance(t, T.Id):
        ws = [g.add(WIRE) for _ in range(t.n)]
        return ws, list(ws)
    if isinstance(t, T.Sym):
        ws = [g.add(WIRE) for _ in range(t.m + t.n)]
        return ws, ws[t.m:] + ws[:t.m]
    if isinstance(t, T.Gate):
        return atom(gate_label(t.name, t.arity))
    if isinstance(t, T.Value):
        return atom(value_label(t.v))
    if isinstance(t, T.Delay):
        return atom(DELAY)
    if isinstance(t, T.Fork):
        return atom(FORK)
    if isinstance(t, T.Join):
        return atom(JOIN)
    if isinstance(t, T.Stub):
        return atom(STUB)
    if isinstance(t, T.Box):
        return atom(box_label(t.name, t.m, t.n))
    if isinstance(t, T.Seq):
        i1, o1 = _emit(g, t.first)
        i2, o2 = _emit(g, t.second)
        if len(o1) != len(i2):
            raise T.ArityError("composition arity mismatch")
        for o, i in zip(o1, i2):
            g.connect(o, 0, i, 0)
        return i1, o2
    if isinstance(t, T.Tensor):
        i1, o1 = _emit(g, t.left)
        i2, o2 = _emit(g, t.right)
        return i1 + i2, o1 + o2
    if isinstance(t, T.Trace):
        ins, outs = _emit(g, t.body)
        k = t.k
        if k:
            for o, i in zip(outs[-k:], ins[-k:]):
                g.connect(o, 0, i, 0)
                g.feedback.add(o)
            ins, outs = ins[:-k], outs[:-k]
        return ins, outs
    raise TypeError(f"not a term: {t!r}")


def from_term(t: T.Term, sig: Signature | None = None) -> Tfpg:
    """The normalized graph of a term (the signature is only needed for parsing)."""
    T.infer_arity(t)
    g = Tfpg()
    ins, outs = _emit(g, t)
    for w in ins:
        i = g.add(WIRE)
        g.connect(i, 0, w, 0)
        g.inputs.append(i)
    for w in outs:
        o = g.add(WIRE)
        g.connect(w, 0, o, 0)
        g.outputs.append(o)
    _normalize_wires(g)
    check(g)
    return g


def renumber(g: Tfpg, first: Iterable[int] = ()) -> Tfpg:
    """Fresh compact ids: the given nodes first, then the rest in id order."""
    first = list(first)
    rest = [n for n in sorted(g.labels) if n not in set(first)]
    mapping = {n: i for i, n in enumerate(first + rest)}
    h = Tfpg()
    h.labels = {mapping[n]: g.labels[n] for n in g.labels}
    for (a, ap), (b, bp) in g.succ.items():
        h.succ[(mapping[a], ap)] = (mapping[b], bp)
        h.pred[(mapping[b], bp)] = (mapping[a], ap)
    h.inputs = [mapping[n] for n in g.inputs]
    h.outputs = [mapping[n] for n in g.outputs]
    h.feedback = {mapping[n] for n in g.feedback}
    h.next_id = len(mapping)
    return h


# -- isomorphism ------------------------------------------------------------

def _as_networkx(g: Tfpg) -> nx.MultiDiGraph:
    role = {n: ("in", k) for k, n in enumerate(g.inputs)}
    role.update({n: ("out", k) for k, n in enumerate(g.outputs)})
    role.update({n: ("fb",) for n in g.feedback})
    G = nx.MultiDiGraph()
    for n, lab in g.labels.items():
        G.add_node(n, key=(lab, role.get(n)))
    for (a, ap), (b, bp) in g.succ.items():
        # fork outputs and join inputs are unordered (co-commutative / commutative)
        sp = "*" if g.labels[a].kind is Kind.FORK else ap
        dp = "*" if g.labels[b].kind is Kind.JOIN else bp
        G.add_edge(a, b, ports=(sp, dp))
    return G


def iso_equal(g1: Tfpg, g2: Tfpg) -> bool:
    """Label-, port-, interface- and feedback-preserving isomorphism."""
    if (len(g1.labels), len(g1.succ), len(g1.inputs), len(g1.outputs), len(g1.feedback)) != \
            (len(g2.labels), len(g2.succ), len(g2.inputs), len(g2.outputs), len(g2.feedback)):
        return False
    if sorted(map(str, g1.labels.values())) != sorted(map(str, g2.labels.values())):
        return False
    G1, G2 = _as_networkx(g1), _as_networkx(g2)

    def edge_match(d1, d2):
        return sorted(e["ports"] for e in d1.values()) == sorted(e["ports"] for e in d2.values())

    matcher = MultiDiGraphMatcher(G1, G2, node_match=lambda a, b: a["key"] == b["key"],
                                  edge_match=edge_match)
    return matcher.is_isomorphic()


# -- DOT ----------------------------------------------------------------------

def to_dot(g: Tfpg, sig: Signature | None = None, name: str = "tfpg") -> str:
    lat = sig.lattice if sig is not None else None

    def text(n: int) -> str:
        lab = g.labels[n]
        if lab.kind is Kind.VALUE:
            return lat.symbol_of(lab.value) if lat else str(lab.value)
        if lab.kind is Kind.GATE:
            return lab.name
        if lab.kind is Kind.BOX:
            return f"{lab.name} : {lab.n_in}→{lab.n_out}"
        if lab.kind is Kind.DELAY:
            return "δ"
        if lab.kind is Kind.JOIN:
            return "⋎"
        if lab.kind is Kind.FORK:
            return "fork"
        if lab.kind is Kind.STUB:
            return "w"
        if n in g.inputs:
            return f"in{g.inputs.index(n)}"
        if n in g.outputs:
            return f"out{g.outputs.index(n)}"
        return ""

    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [fontname=\"Helvetica\"];"]
    for n in sorted(g.labels):
        lab = g.labels[n]
        attrs = [f"label=\"{text(n)}\""]
        if n in g.feedback:
            attrs += ["shape=point", "color=red", "width=0.15"]
        elif lab.kind is Kind.WIRE:
            attrs += ["shape=plaintext"]
        elif lab.kind in (Kind.GATE, Kind.BOX):
            attrs += ["shape=box"]
        elif lab.kind is Kind.VALUE:
            attrs += ["shape=circle"]
        else:
            attrs += ["shape=ellipse"]
        lines.append(f"  n{n} [{', '.join(attrs)}];")
    for (a, ap), (b, bp) in sorted(g.succ.items()):
        attrs = []
        if g.labels[b].kind in (Kind.GATE, Kind.BOX) and g.labels[b].n_in > 1:
            attrs.append(f"headlabel=\"i{bp + 1}\"")
        if g.labels[a].kind is Kind.BOX and g.labels[a].n_out > 1:
            attrs.append(f"taillabel=\"o{ap + 1}\"")
        if a in g.feedback:
            attrs.append("color=red")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  n{a} -> n{b}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- readback -------------------------------------------------------------------

def _atom_term(lab: NodeLabel) -> T.Term:
    if lab.kind is Kind.VALUE:
        return T.Value(lab.value)
    if lab.kind is Kind.GATE:
        return T.Gate(lab.name, lab.n_in)
    if lab.kind is Kind.BOX:
        return T.Box(lab.name, lab.n_in, lab.n_out)
    return {Kind.DELAY: T.Delay(), Kind.FORK: T.Fork(), Kind.JOIN: T.Join(),
            Kind.STUB: T.Stub()}[lab.kind]


def readback_term(g: Tfpg) -> T.Term:
    """A term whose graph is isomorphic to g: one global trace over a staged body."""
    fbs = sorted(g.feedback)
    bus: list[Port] = [(i, 0) for i in g.inputs] + [(f, 0) for f in fbs]
    stages: list[T.Term] = []
    order = topological_order(g)
    if order is None:
        raise TfpgError("graph is not trace-framed")
    skip = set(g.inputs) | set(g.outputs) | g.feedback
    for n in order:
        if n in skip:
            continue
        lab = g.labels[n]
        if lab.kind is Kind.WIRE:
            raise TfpgError("readback needs a wire-normalized graph")
        positions = [bus.index(g.src(n, p)) for p in range(lab.n_in)]
        stages.append(T.route(len(bus), positions, _atom_term(lab)))
        rest = [s for k, s in enumerate(bus) if k not in positions]
        bus = [(n, q) for q in range(lab.n_out)] + rest
    wanted = [g.src(o) for o in g.outputs] + [g.src(f) for f in fbs]
    perm = [bus.index(s) for s in wanted]
    if perm != list(range(len(bus))):
        stages.append(T.permutation(perm))
    body = T.seq(*stages) if stages else T.Id(len(bus))
    return T.Trace(len(fbs), body) if fbs else body
