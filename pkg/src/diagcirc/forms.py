"""Canonical forms: global trace, global delay (hoisting) and passification."""
from __future__ import annotations

from dataclasses import dataclass, field

from .tfpg import WIRE, Kind, Tfpg, TfpgError, _normalize_wires, check, renumber


@dataclass
class GlobalDelayView:
    graph: Tfpg
    width: int  # number of feedback wires
    delayed: int  # feedback wires that feed a delay
    witness: dict[int, int] = field(default_factory=dict)  # delay -> feedback node


def globalize_trace(g: Tfpg) -> Tfpg:
    """Feedback nodes already form one global set; validate and give them the lowest ids."""
    check(g)
    return renumber(g, sorted(g.feedback))


def _hoist(g: Tfpg) -> dict[int, int]:
    witness = {}
    for d in g.nodes(Kind.DELAY):
        a = g.src(d)
        if a[0] in g.feedback:
            witness[d] = a[0]
            continue
        g.disconnect_in(d, 0)
        w = g.add(WIRE)
        g.connect(a[0], a[1], w, 0)
        g.connect(w, 0, d, 0)
        g.feedback.add(w)
        witness[d] = w
    return witness


def hoist_delays(g: Tfpg) -> GlobalDelayView:
    """Put a feedback node directly in front of every delay (a trace over a straight wire)."""
    h = g.copy()
    witness = _hoist(h)
    check(h)
    return GlobalDelayView(h, len(h.feedback), len(witness), witness)


def passify(g: Tfpg) -> tuple[Tfpg, list[int]]:
    """Turn every value node into a fresh trailing input; values listed in node-id order."""
    if g.feedback or g.nodes(Kind.DELAY):
        raise TfpgError("passification needs a combinational graph (no delays, no feedback)")
    h = g.copy()
    values = []
    for n in h.nodes(Kind.VALUE):
        values.append(h.labels[n].value)
        dst = h.disconnect_out(n, 0)
        h.remove(n)
        w = h.add(WIRE)
        h.connect(w, 0, *dst)
        h.inputs.append(w)
    check(h)
    return h, values


def on_cycle(g: Tfpg, f: int) -> bool:
    """Does the feedback node f lie on a directed cycle?"""
    seen = set()
    stack = [f]
    while stack:
        n = stack.pop()
        for p in range(g.labels[n].n_out):
            b = g.succ.get((n, p))
            if b is None:
                continue
            if b[0] == f:
                return True
            if b[0] not in seen:
                seen.add(b[0])
                stack.append(b[0])
    return False


def _prune_feedback(g: Tfpg) -> int:
    """Demote feedback nodes that close no loop to plain wires; returns how many."""
    dead = [f for f in sorted(g.feedback) if not on_cycle(g, f)]
    for f in dead:
        g.feedback.discard(f)
    if dead:
        _normalize_wires(g)
    return len(dead)


def prune_feedback(g: Tfpg) -> Tfpg:
    h = g.copy()
    _prune_feedback(h)
    check(h)
    return h
