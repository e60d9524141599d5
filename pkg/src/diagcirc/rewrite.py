"""Graph rewriting: local rules, canonical forms, trace-delay unfolding and execution.

All rules act on a working copy in place. The scheduler always fires the
redex with the lowest anchor id, so traces are reproducible.
"""
from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field
from typing import Iterator

from .forms import _hoist, _prune_feedback
from .lattice import ConstantOutput, Signature
from .tfpg import (DELAY, FORK, JOIN, STUB, WIRE, Kind, Tfpg, TfpgError, _normalize_wires,
                   check, topological_order, value_label)


class RuleKind(enum.Enum):
    CONSTANT_GATE = "ConstantGate"
    ENHANCED_GATE = "EnhancedGate"
    JOIN_VALUES = "JoinValues"
    JOIN_BOTTOM_UNIT = "JoinBottomUnit"
    FORK_VALUE = "ForkValue"
    FORK_COUNIT = "ForkCounit"
    STUB_GATE = "StubGate"
    STREAMING_WAVEFORM = "StreamingWaveform"
    DISCONNECT_DELAY = "DisconnectDelay"
    UNOBSERVABLE_DELAY = "UnobservableDelay"
    FEEDBACK_UNWIND_VALUE = "FeedbackUnwindValue"
    FEEDBACK_STUB_PROPAGATE = "FeedbackStubPropagate"
    WIRE_TIDY = "WireTidy"


# rules after which the delay-dependence of nodes must be recomputed
_DELAY_RULES = {RuleKind.STREAMING_WAVEFORM, RuleKind.DISCONNECT_DELAY, RuleKind.UNOBSERVABLE_DELAY}


@dataclass(frozen=True)
class Redex:
    kind: RuleKind
    anchors: tuple[int, ...]
    binding: tuple = ()

    def __str__(self):
        return f"rule {self.kind.value} @ {' '.join(map(str, self.anchors))}"


class RewriteError(RuntimeError):
    pass


class StaleRedex(RewriteError):
    pass


class BudgetExhausted(RewriteError):
    def __init__(self, msg: str, graph: Tfpg, steps: int):
        super().__init__(msg)
        self.graph = graph
        self.steps = steps


class _Tracked(Tfpg):
    """Records every node whose ports change, for the worklist."""

    def __init__(self, g: Tfpg):
        super().__init__()
        self.__dict__.update(g.copy().__dict__)
        self.touched: set[int] = set()

    def add(self, label):
        n = super().add(label)
        self.touched.add(n)
        return n

    def connect(self, a, ap, b, bp):
        super().connect(a, ap, b, bp)
        self.touched.update((a, b))

    def disconnect_in(self, b, bp):
        src = super().disconnect_in(b, bp)
        self.touched.update((b, src[0]))
        return src

    def disconnect_out(self, a, ap):
        dst = super().disconnect_out(a, ap)
        self.touched.update((a, dst[0]))
        return dst

    def relabel(self, n, label):
        super().relabel(n, label)
        self.touched.add(n)

    def plain(self) -> Tfpg:
        g = Tfpg()
        for k in ("labels", "succ", "pred", "inputs", "outputs", "feedback", "next_id"):
            setattr(g, k, getattr(self, k))
        return g


# -- matching -------------------------------------------------------------------

def delay_taint(g: Tfpg) -> set[int]:
    """Nodes whose output depends on some delay node."""
    seen = set(g.nodes(Kind.DELAY))
    stack = list(seen)
    while stack:
        n = stack.pop()
        for p in range(g.labels[n].n_out):
            b = g.succ.get((n, p))
            if b is not None and b[0] not in seen:
                seen.add(b[0])
                stack.append(b[0])
    return seen


def _value_at(g: Tfpg, port) -> int | None:
    lab = g.labels[port[0]]
    return lab.value if lab.kind is Kind.VALUE else None


def _is_stub(g: Tfpg, port) -> bool:
    return g.labels[port[0]].kind is Kind.STUB


def streamable(sig: Signature, name: str) -> bool:
    """Streaming is only sound for monotone gates that map all-bottom to bottom."""
    gd = sig.gates[name]
    return gd.monotone and gd.table[(sig.lattice.bottom,) * gd.arity] == sig.lattice.bottom


def _waveform_head(g: Tfpg, port, bot: int):
    """(head value, tail source port or None, has_delay) for a streaming input, or None."""
    n = port[0]
    lab = g.labels[n]
    if lab.kind is Kind.VALUE:
        return lab.value, None, False
    if lab.kind is Kind.DELAY:
        return bot, g.pred[(n, 0)], True
    if lab.kind is Kind.JOIN:
        a, b = g.pred[(n, 0)], g.pred[(n, 1)]
        ka, kb = g.labels[a[0]].kind, g.labels[b[0]].kind
        if ka is Kind.DELAY and kb is Kind.VALUE:
            a, b = b, a
            ka, kb = kb, ka
        if ka is Kind.VALUE and kb is Kind.DELAY:
            return g.labels[a[0]].value, g.pred[(b[0], 0)], True
    return None


def _matches(g: Tfpg, sig: Signature, n: int, taint: set[int]) -> Iterator[Redex]:
    lab = g.labels[n]
    k = lab.kind
    bot = sig.lattice.bottom
    if k is Kind.GATE:
        srcs = [g.pred[(n, p)] for p in range(lab.n_in)]
        vals = [_value_at(g, s) for s in srcs]
        if all(v is not None for v in vals):
            yield Redex(RuleKind.CONSTANT_GATE, (n,))
            return
        for i, v in enumerate(vals):
            if v is None:
                continue
            rule = sig.enhanced_rule(lab.name, i, v)
            if rule is None:
                continue
            # a bare value is v::bot; folding it against delayed signals would be unsound
            if all(srcs[j][0] not in taint for j in range(len(srcs)) if j != i):
                yield Redex(RuleKind.ENHANCED_GATE, (n, srcs[i][0]), (i, rule))
                break
        if _is_stub(g, g.succ[(n, 0)]):
            yield Redex(RuleKind.STUB_GATE, (n,))
        if streamable(sig, lab.name):
            heads = [_waveform_head(g, s, bot) for s in srcs]
            if all(h is not None for h in heads) and any(h[2] for h in heads):
                yield Redex(RuleKind.STREAMING_WAVEFORM, (n,))
    elif k is Kind.BOX:
        if all(_is_stub(g, g.succ[(n, p)]) for p in range(lab.n_out)):
            yield Redex(RuleKind.STUB_GATE, (n,))
    elif k is Kind.VALUE:
        if _is_stub(g, g.succ[(n, 0)]):
            yield Redex(RuleKind.STUB_GATE, (n,))
    elif k is Kind.JOIN:
        a, b = _value_at(g, g.pred[(n, 0)]), _value_at(g, g.pred[(n, 1)])
        if a is not None and b is not None:
            yield Redex(RuleKind.JOIN_VALUES, (n,))
        elif a == bot or b == bot:
            yield Redex(RuleKind.JOIN_BOTTOM_UNIT, (n,))
        if _is_stub(g, g.succ[(n, 0)]):
            yield Redex(RuleKind.STUB_GATE, (n,))
    elif k is Kind.FORK:
        if _value_at(g, g.pred[(n, 0)]) is not None:
            yield Redex(RuleKind.FORK_VALUE, (n,))
        if _is_stub(g, g.succ[(n, 0)]) or _is_stub(g, g.succ[(n, 1)]):
            yield Redex(RuleKind.FORK_COUNIT, (n,))
    elif k is Kind.DELAY:
        if _value_at(g, g.pred[(n, 0)]) == bot:
            yield Redex(RuleKind.DISCONNECT_DELAY, (n,))
        if _is_stub(g, g.succ[(n, 0)]):
            yield Redex(RuleKind.UNOBSERVABLE_DELAY, (n,))
    elif k is Kind.WIRE and not g.is_interface(n):
        if n not in g.feedback:
            yield Redex(RuleKind.WIRE_TIDY, (n,))
            return
        a, b = g.pred[(n, 0)], g.succ[(n, 0)]
        if _value_at(g, a) is not None:
            yield Redex(RuleKind.FEEDBACK_UNWIND_VALUE, (n,))
        if a[0] == n or _is_stub(g, b):
            yield Redex(RuleKind.FEEDBACK_STUB_PROPAGATE, (n,))
        elif a[0] in g.feedback:
            yield Redex(RuleKind.WIRE_TIDY, (n,))


def find_redexes(g: Tfpg, sig: Signature) -> list[Redex]:
    taint = delay_taint(g)
    out = []
    for n in g.nodes():
        out.extend(_matches(g, sig, n, taint))
    return out


# -- replacement ----------------------------------------------------------------

def _stub(g: Tfpg, port) -> None:
    s = g.add(STUB)
    g.connect(port[0], port[1], s, 0)


def _splice(g: Tfpg, n: int, keep_in: int = 0, out: int = 0) -> None:
    """Remove n, wiring the source of input keep_in to the consumer of output out."""
    src = g.disconnect_in(n, keep_in)
    dst = g.disconnect_out(n, out)
    g.remove(n)
    g.connect(src[0], src[1], dst[0], dst[1])


def _apply(g: Tfpg, sig: Signature, r: Redex) -> None:
    n = r.anchors[0]
    lab = g.labels[n]
    lat = sig.lattice
    kind = r.kind
    if kind is RuleKind.CONSTANT_GATE:
        args = tuple(g.labels[g.pred[(n, p)][0]].value for p in range(lab.n_in))
        for p in range(lab.n_in):
            g.remove(g.pred[(n, p)][0])
        g.relabel(n, value_label(sig.gates[lab.name].table[args]))
    elif kind is RuleKind.ENHANCED_GATE:
        i, rule = r.binding
        g.remove(g.pred[(n, i)][0])
        others = [p for p in range(lab.n_in) if p != i]
        if isinstance(rule.residual, ConstantOutput):
            for p in others:
                _stub(g, g.disconnect_in(n, p))
            g.relabel(n, value_label(rule.residual.value))
        else:
            keep = others[rule.residual.index]
            for p in others:
                if p != keep:
                    _stub(g, g.disconnect_in(n, p))
            _splice(g, n, keep_in=keep)
    elif kind is RuleKind.JOIN_VALUES:
        a, b = (g.labels[g.pred[(n, p)][0]].value for p in (0, 1))
        g.remove(g.pred[(n, 0)][0])
        g.remove(g.pred[(n, 1)][0])
        g.relabel(n, value_label(lat.join(a, b)))
    elif kind is RuleKind.JOIN_BOTTOM_UNIT:
        p = 0 if _value_at(g, g.pred[(n, 0)]) == lat.bottom else 1
        g.remove(g.pred[(n, p)][0])
        _splice(g, n, keep_in=1 - p)
    elif kind is RuleKind.FORK_VALUE:
        a = g.pred[(n, 0)][0]
        v = g.labels[a].value
        d1 = g.disconnect_out(n, 1)
        g.remove(a)
        g.relabel(n, value_label(v))
        c = g.add(value_label(v))
        g.connect(c, 0, d1[0], d1[1])
    elif kind is RuleKind.FORK_COUNIT:
        p = 0 if _is_stub(g, g.succ[(n, 0)]) else 1
        g.remove(g.succ[(n, p)][0])
        _splice(g, n, out=1 - p)
    elif kind is RuleKind.STUB_GATE:
        for p in range(lab.n_out):
            g.remove(g.succ[(n, p)][0])
        srcs = [g.disconnect_in(n, p) for p in range(lab.n_in)]
        g.remove(n)
        for s in srcs:
            _stub(g, s)
    elif kind is RuleKind.STREAMING_WAVEFORM:
        heads, tails = [], []
        for p in range(lab.n_in):
            src = g.pred[(n, p)]
            v, tail, _ = _waveform_head(g, src, lat.bottom)
            heads.append(v)
            m = src[0]
            if g.labels[m].kind is Kind.JOIN:
                for q in (0, 1):
                    x = g.pred[(m, q)][0]
                    if g.labels[x].kind is Kind.DELAY:
                        d = x
                    else:
                        g.remove(x)
                g.remove(m)
                m = d
            if g.labels[m].kind is Kind.DELAY:
                tail = g.disconnect_in(m, 0)
            g.remove(m)
            tails.append(tail)
        dst = g.disconnect_out(n, 0)
        g.remove(n)
        head, tail_gate = g.add(lab), g.add(lab)
        for p, (v, t) in enumerate(zip(heads, tails)):
            hv = g.add(value_label(v))
            g.connect(hv, 0, head, p)
            if t is None:
                t = (g.add(value_label(lat.bottom)), 0)
            g.connect(t[0], t[1], tail_gate, p)
        d = g.add(DELAY)
        j = g.add(JOIN)
        g.connect(tail_gate, 0, d, 0)
        g.connect(head, 0, j, 0)
        g.connect(d, 0, j, 1)
        g.connect(j, 0, dst[0], dst[1])
    elif kind in (RuleKind.DISCONNECT_DELAY, RuleKind.UNOBSERVABLE_DELAY,
                  RuleKind.FEEDBACK_UNWIND_VALUE, RuleKind.WIRE_TIDY):
        g.bypass(n)
    elif kind is RuleKind.FEEDBACK_STUB_PROPAGATE:
        src = g.pred[(n, 0)]
        if src[0] == n:
            g.remove(n)
        else:
            g.remove(g.succ[(n, 0)][0])
            src = g.disconnect_in(n, 0)
            g.remove(n)
            _stub(g, src)
    else:  # pragma: no cover
        raise RewriteError(f"unknown rule {kind}")


def apply_rule(g: Tfpg, sig: Signature, redex: Redex) -> Tfpg:
    """Apply one redex to a copy of g."""
    n = redex.anchors[0]
    if n not in g.labels or redex not in list(_matches(g, sig, n, delay_taint(g))):
        raise StaleRedex(f"{redex} does not match the graph")
    h = g.copy()
    _apply(h, sig, redex)
    _normalize_wires(h)
    check(h)
    return h


# -- local normalisation ----------------------------------------------------------------

def default_budget(g: Tfpg) -> int:
    return 20 * (len(g) + 10) ** 2


def _neighbourhood(g: Tfpg, nodes: set[int], hops: int = 2) -> set[int]:
    out = {n for n in nodes if n in g.labels}
    frontier = set(out)
    for _ in range(hops):
        nxt = set()
        for n in frontier:
            lab = g.labels[n]
            for p in range(lab.n_in):
                s = g.pred.get((n, p))
                if s:
                    nxt.add(s[0])
            for p in range(lab.n_out):
                s = g.succ.get((n, p))
                if s:
                    nxt.add(s[0])
        frontier = nxt - out
        out |= nxt
    return out


def normalize_local(g: Tfpg, sig: Signature, budget: int | None = None,
                    log: list[str] | None = None, rng: random.Random | None = None) -> tuple[Tfpg, int]:
    """Rewrite until no local rule applies; returns the canonical graph and the step count.

    With ``rng`` a uniformly random redex is fired at each step instead of the
    lowest-anchor one (used to test confluence).
    """
    if budget is None:
        budget = default_budget(g)
    work = _Tracked(g)
    steps = 0
    if rng is not None:
        while True:
            found = find_redexes(work, sig)
            if not found:
                break
            if steps >= budget:
                raise BudgetExhausted("local rewriting budget exhausted", work.plain(), steps)
            r = rng.choice(found)
            _apply(work, sig, r)
            steps += 1
            if log is not None:
                log.append(str(r))
    else:
        taint = delay_taint(work)
        heap = list(work.labels)
        heapq.heapify(heap)
        queued = set(heap)
        while heap:
            n = heapq.heappop(heap)
            queued.discard(n)
            if n not in work.labels:
                continue
            r = next(_matches(work, sig, n, taint), None)
            if r is None:
                continue
            if steps >= budget:
                raise BudgetExhausted("local rewriting budget exhausted", work.plain(), steps)
            work.touched = set()
            _apply(work, sig, r)
            steps += 1
            if log is not None:
                log.append(str(r))
            if r.kind in _DELAY_RULES:
                taint = delay_taint(work)
                fresh = set(work.labels)
            else:
                fresh = _neighbourhood(work, work.touched)
            for m in fresh - queued:
                heapq.heappush(heap, m)
                queued.add(m)
    out = work.plain()
    check(out)
    return out, steps


# -- execution ------------------------------------------------------------------

class Productivity(enum.Enum):
    PRODUCTIVE = "Productive"  # not known to be stuck; unfold and retry
    BLOCKED = "Blocked"
    DELAY_GUARDED = "DelayGuarded"


class Verdict(enum.Enum):
    PRODUCTIVE = "Productive"
    UNPRODUCTIVE = "Unproductive"
    STEP_LIMIT = "StepLimit"


@dataclass
class RunResult:
    emitted: list[tuple[int, ...]]
    verdict: Verdict
    residual: Tfpg
    trace: list[str] | None = None
    unfolds: int = 0
    steps: int = 0
    classifications: list[Productivity] = field(default_factory=list)

    @property
    def verdict_text(self) -> str:
        if self.verdict is Verdict.PRODUCTIVE:
            return f"Productive({len(self.emitted)})"
        return self.verdict.value


def _require_closed(g: Tfpg) -> None:
    if g.inputs:
        raise RewriteError(f"circuit must be closed, it has {len(g.inputs)} inputs")


def unfold_trace_delay(g: Tfpg, sig: Signature | None = None) -> Tfpg:
    """One unfolding of the global trace of a closed graph.

    The result joins a now-copy (delays read as bottom, values kept) with a
    delayed rest-copy (values read as bottom, each delay re-initialised with
    the signal the now-copy feeds it).
    """
    _require_closed(g)
    src = g.copy()
    _hoist(src)
    bot = sig.lattice.bottom if sig else 0
    h = Tfpg()
    head = h.embed(src)
    rest = h.embed(src)
    delays = src.nodes(Kind.DELAY)
    ys = {}
    for d in delays:
        hf = head[src.pred[(d, 0)][0]]
        ys[d] = h.disconnect_in(hf, 0)
        h.remove(hf)
    for d in delays:
        h.relabel(head[d], value_label(bot))
    for v in src.nodes(Kind.VALUE):
        h.relabel(rest[v], value_label(bot))
    for d in delays:
        rd = rest[d]
        dst = h.disconnect_out(rd, 0)
        j = h.add(JOIN)
        h.connect(ys[d][0], ys[d][1], j, 0)
        h.connect(rd, 0, j, 1)
        h.connect(j, 0, dst[0], dst[1])
    for o in src.outputs:
        hs = h.disconnect_in(head[o], 0)
        rs = h.disconnect_in(rest[o], 0)
        h.remove(head[o])
        h.remove(rest[o])
        d = h.add(DELAY)
        j = h.add(JOIN)
        w = h.add(WIRE)
        h.connect(rs[0], rs[1], d, 0)
        h.connect(hs[0], hs[1], j, 0)
        h.connect(d, 0, j, 1)
        h.connect(j, 0, w, 0)
        h.outputs.append(w)
    _normalize_wires(h)
    check(h)
    return h


def _head_shape(g: Tfpg, o: int):
    """('value', v) | ('delay', d) | ('wave', v, join, value, delay) | None."""
    a = g.pred[(o, 0)][0]
    lab = g.labels[a]
    if lab.kind is Kind.VALUE:
        return ("value", lab.value, a)
    if lab.kind is Kind.DELAY:
        return ("delay", a)
    if lab.kind is Kind.JOIN:
        x, y = g.pred[(a, 0)][0], g.pred[(a, 1)][0]
        if g.labels[x].kind is Kind.DELAY:
            x, y = y, x
        if g.labels[x].kind is Kind.VALUE and g.labels[y].kind is Kind.DELAY:
            return ("wave", g.labels[x].value, a, x, y)
    return None


def emit_head_values(g: Tfpg, sig: Signature | None = None) -> tuple[tuple[int, ...] | None, Tfpg]:
    """Strip one observed value from every output, if all outputs expose one."""
    shapes = [_head_shape(g, o) for o in g.outputs]
    if any(s is None for s in shapes):
        return None, g
    bot = sig.lattice.bottom if sig else 0
    h = g.copy()
    vals = []
    for o, s in zip(h.outputs, shapes):
        if s[0] == "value":
            vals.append(s[1])
            h.relabel(s[2], value_label(bot))
        elif s[0] == "delay":
            vals.append(bot)
            h.bypass(s[1])
        else:
            _, v, j, x, d = s
            vals.append(v)
            src = h.disconnect_in(d, 0)
            h.remove(x)
            h.remove(d)
            h.remove(j)
            h.connect(src[0], src[1], o, 0)
    _normalize_wires(h)
    check(h)
    return tuple(vals), h


def _cone_has_delay(g: Tfpg, n: int) -> bool:
    seen = {n}
    stack = [n]
    while stack:
        m = stack.pop()
        if g.labels[m].kind is Kind.DELAY:
            return True
        for p in range(g.labels[m].n_in):
            s = g.pred.get((m, p))
            if s and s[0] not in seen:
                seen.add(s[0])
                stack.append(s[0])
    return False


def classify_productivity(g: Tfpg) -> Productivity:
    for o in g.outputs:
        a = g.pred[(o, 0)][0]
        lab = g.labels[a]
        now = a
        if lab.kind in (Kind.VALUE, Kind.DELAY):
            continue
        if lab.kind is Kind.JOIN:
            x, y = g.pred[(a, 0)][0], g.pred[(a, 1)][0]
            if g.labels[x].kind is Kind.DELAY:
                x, y = y, x
            if g.labels[y].kind is Kind.DELAY:
                if g.labels[x].kind is Kind.VALUE:
                    continue
                now = x
        if not _cone_has_delay(g, now):
            return Productivity.BLOCKED
    if topological_order(g, g.nodes(Kind.DELAY)) is not None:
        return Productivity.DELAY_GUARDED
    return Productivity.PRODUCTIVE


def run(g: Tfpg, sig: Signature, max_ticks: int = 10, step_budget: int = 200_000,
        trace: bool = False) -> RunResult:
    """Alternate local normalisation, emission and unfolding until max_ticks values are out."""
    _require_closed(g)
    log: list[str] | None = [] if trace else None
    cur = g.copy()
    emitted: list[tuple[int, ...]] = []
    steps = unfolds = 0
    classes: list[Productivity] = []

    def result(verdict):
        return RunResult(emitted, verdict, cur, log, unfolds, steps, classes)

    while True:
        try:
            cur, used = normalize_local(cur, sig, max(step_budget - steps, 0), log)
        except BudgetExhausted as exc:
            cur = exc.graph
            steps += exc.steps
            return result(Verdict.STEP_LIMIT)
        steps += used
        if len(emitted) >= max_ticks:
            return result(Verdict.PRODUCTIVE)
        vals, nxt = emit_head_values(cur, sig)
        if vals is not None:
            if log is not None:
                names = " ".join(sig.lattice.name_of(v) for v in vals)
                log.append(f"tick {len(emitted)} emit {names}".rstrip())
            emitted.append(vals)
            cur = nxt
            continue
        cls = classify_productivity(cur)
        classes.append(cls)
        if cls is Productivity.BLOCKED:
            return result(Verdict.UNPRODUCTIVE)
        # an unfolding costs as much as the graph it copies
        if steps + len(cur) > step_budget:
            return result(Verdict.STEP_LIMIT)
        steps += len(cur)
        _prune_feedback(cur)
        cur = unfold_trace_delay(cur, sig)
        unfolds += 1
        if log is not None:
            log.append(f"unfold {unfolds}")


# -- partial evaluation -----------------------------------------------------------

def unfold_loop(g: Tfpg, f: int) -> Tfpg:
    """Open the loop through feedback node f once, computing its fixpoint in a full copy."""
    if f not in g.feedback:
        raise TfpgError(f"node {f} is not a feedback node")
    h = g.copy()
    if h.pred[(f, 0)][0] == f:
        h.remove(f)
        return h
    c = h.embed(g)
    for i in g.inputs:
        dst = h.disconnect_out(i, 0)
        cdst = h.disconnect_out(c[i], 0)
        h.remove(c[i])
        fk = h.add(FORK)
        h.connect(i, 0, fk, 0)
        h.connect(fk, 0, dst[0], dst[1])
        h.connect(fk, 1, cdst[0], cdst[1])
    for o in g.outputs:
        s = h.disconnect_in(c[o], 0)
        h.remove(c[o])
        _stub(h, s)
    p = h.disconnect_in(f, 0)
    x = h.disconnect_out(f, 0)
    h.remove(f)
    _stub(h, p)
    cf = c[f]
    cp = h.disconnect_in(cf, 0)
    fk = h.add(FORK)
    h.connect(cp[0], cp[1], fk, 0)
    h.connect(fk, 0, cf, 0)
    h.connect(fk, 1, x[0], x[1])
    _normalize_wires(h)
    check(h)
    return h


def _settle(g: Tfpg, sig: Signature, log, prune: bool = True) -> Tfpg:
    g, _ = normalize_local(g, sig, log=log)
    while prune and _prune_feedback(g):
        g, _ = normalize_local(g, sig, log=log)
    return g


def partial_evaluate(g: Tfpg, sig: Signature, fuel: int | None = None,
                     log: list[str] | None = None, prune: bool = True) -> Tfpg:
    """Normalise, then unfold loops while that removes feedback nodes and fuel lasts.

    With ``prune`` feedback nodes that close no cycle are dropped directly
    (yanking); without it only loop unfolding can remove them.
    """
    cur = _settle(g.copy(), sig, log, prune)
    if fuel is None:
        fuel = 2 * len(cur.feedback)
    while fuel > 0 and cur.feedback:
        for f in sorted(cur.feedback):
            cand = _settle(unfold_loop(cur, f), sig, None, prune)
            if len(cand.feedback) < len(cur.feedback):
                if log is not None:
                    log.append(f"unfold loop @ {f}")
                cur = _settle(unfold_loop(cur, f), sig, log, prune) if log is not None else cand
                fuel -= 1
                break
        else:
            break
    return cur
