"""Reference stream semantics: tick-by-tick simulation of a graph.

Delays are registers initialised to bottom. Within a tick the feedback wires
are solved by Kleene iteration from bottom, which terminates because the
value lattice is finite. A value node contributes its level at tick 0 and
bottom afterwards.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .lattice import Lattice, Signature
from .tfpg import Kind, Tfpg, topological_order


class OracleError(RuntimeError):
    pass


class BudgetExceeded(OracleError):
    def __init__(self, required: int, allowed: int):
        super().__init__(f"equivalence check needs {required} evaluations, budget is {allowed}")
        self.required = required
        self.allowed = allowed


@dataclass(frozen=True)
class Waveform:
    values: tuple[int, ...]

    def at(self, t: int, bottom: int = 0) -> int:
        return self.values[t] if t < len(self.values) else bottom

    def __len__(self):
        return len(self.values)


class Simulator:
    """Precompiled evaluator for one graph; ``step`` advances one tick."""

    def __init__(self, g: Tfpg, sig: Signature):
        self.g = g
        self.sig = sig
        self.lattice = sig.lattice
        for n, lab in g.labels.items():
            if lab.kind is Kind.BOX:
                raise OracleError(f"abstract box {lab.name!r} has no semantics")
        self.delays = g.nodes(Kind.DELAY)
        self.fbs = sorted(g.feedback)
        order = topological_order(g, set(g.feedback) | set(self.delays))
        if order is None:
            raise OracleError("graph has a loop without a feedback node")
        # cut nodes carry values fixed before the tick's evaluation starts
        cut = set(self.fbs) | set(self.delays)
        self.order = [n for n in order if n in cut] + [n for n in order if n not in cut]
        self.in_index = {n: k for k, n in enumerate(g.inputs)}
        self.cap = len(self.fbs) * self.lattice.height() + 1
        self.reset()

    def reset(self):
        self.registers = {d: self.lattice.bottom for d in self.delays}
        self.tick = 0

    def _evaluate(self, inputs: Sequence[int], assign: dict[int, int]) -> dict[tuple[int, int], int]:
        g, lat, t = self.g, self.lattice, self.tick
        sigv: dict[tuple[int, int], int] = {}
        for n in self.order:
            lab = g.labels[n]
            k = lab.kind
            if k is Kind.WIRE:
                if n in self.in_index:
                    sigv[(n, 0)] = inputs[self.in_index[n]]
                elif n in assign:
                    sigv[(n, 0)] = assign[n]
                elif (n, 0) in g.succ:
                    sigv[(n, 0)] = sigv[g.pred[(n, 0)]]
            elif k is Kind.DELAY:
                sigv[(n, 0)] = self.registers[n]
            elif k is Kind.VALUE:
                sigv[(n, 0)] = lab.value if t == 0 else lat.bottom
            elif k is Kind.GATE:
                args = tuple(sigv[g.pred[(n, p)]] for p in range(lab.n_in))
                sigv[(n, 0)] = self.sig.gates[lab.name].table[args]
            elif k is Kind.JOIN:
                sigv[(n, 0)] = lat.join(sigv[g.pred[(n, 0)]], sigv[g.pred[(n, 1)]])
            elif k is Kind.FORK:
                v = sigv[g.pred[(n, 0)]]
                sigv[(n, 0)] = v
                sigv[(n, 1)] = v
        return sigv

    def step(self, inputs: Sequence[int]) -> tuple[int, ...]:
        g = self.g
        assign = {f: self.lattice.bottom for f in self.fbs}
        for _ in range(self.cap + 1):
            sigv = self._evaluate(inputs, assign)
            new = {f: sigv[g.pred[(f, 0)]] for f in self.fbs}
            if new == assign:
                break
            assign = new
        else:
            raise OracleError("feedback iteration did not stabilise (non-monotone gate?)")
        outs = tuple(sigv[g.pred[(o, 0)]] for o in g.outputs)
        for d in self.delays:
            self.registers[d] = sigv[g.pred[(d, 0)]]
        self.tick += 1
        return outs


def simulate(g: Tfpg, sig: Signature, inputs: Sequence[Sequence[int]] = (), ticks: int = 1) -> tuple[Waveform, ...]:
    """Output waveform per output wire for ``ticks`` ticks; inputs are padded with bottom."""
    if len(inputs) != len(g.inputs):
        raise ValueError(f"expected {len(g.inputs)} input waveforms, got {len(inputs)}")
    sim = Simulator(g, sig)
    bot = sig.lattice.bottom
    rows = []
    for t in range(ticks):
        rows.append(sim.step([w[t] if t < len(w) else bot for w in inputs]))
    return tuple(Waveform(tuple(r[k] for r in rows)) for k in range(len(g.outputs)))


def ticks_of(waves: Sequence[Waveform]) -> list[tuple[int, ...]]:
    """Transpose per-wire waveforms into per-tick tuples."""
    if not waves:
        return []
    return [tuple(w.values[t] for w in waves) for t in range(len(waves[0]))]


def eval_combinational(g: Tfpg, sig: Signature, inputs: Sequence[int]) -> tuple[int, ...]:
    if g.feedback or g.nodes(Kind.DELAY):
        raise OracleError("graph is not combinational")
    return Simulator(g, sig).step(list(inputs))


@dataclass(frozen=True)
class Equal:
    tested: int
    length: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Counterexample:
    inputs: tuple[tuple[int, ...], ...]
    left: tuple[Waveform, ...]
    right: tuple[Waveform, ...]

    def __bool__(self):
        return False


def required_length(f: Tfpg, g: Tfpg, lattice: Lattice, mode: str | None = None) -> int:
    n = max(len(f.nodes(Kind.DELAY)), len(g.nodes(Kind.DELAY)))
    if mode is None:
        mode = "feedback" if (f.feedback or g.feedback) else "delay"
    if mode == "delay":
        return n + 1
    if mode == "feedback":
        return lattice.size ** n + 1
    raise ValueError(f"unknown mode {mode!r}")


def check_equivalence(f: Tfpg, g: Tfpg, sig: Signature, mode: str | None = None,
                      budget: int = 10 ** 7) -> Equal | Counterexample:
    """Exhaustive bounded comparison on all input waveforms of the sufficient length."""
    if f.arity != g.arity:
        raise ValueError(f"arity mismatch: {f.arity} vs {g.arity}")
    if not f.outputs:
        return Equal(0, 0)
    lat = sig.lattice
    n = max(len(f.nodes(Kind.DELAY)), len(g.nodes(Kind.DELAY)))
    length = required_length(f, g, lat, mode)
    m = len(f.inputs)
    ticks = length + n
    count = lat.size ** (m * length)
    required = count * 2 * ticks
    if required > budget:
        raise BudgetExceeded(required, budget)
    sf, sg = Simulator(f, sig), Simulator(g, sig)
    bot = lat.bottom
    for flat in itertools.product(lat.carrier, repeat=m * length):
        waves = tuple(flat[w * length:(w + 1) * length] for w in range(m))
        sf.reset()
        sg.reset()
        rows_f, rows_g = [], []
        for t in range(ticks):
            ins = [w[t] if t < length else bot for w in waves]
            rows_f.append(sf.step(ins))
            rows_g.append(sg.step(ins))
        if rows_f != rows_g:
            left = tuple(Waveform(tuple(r[k] for r in rows_f)) for k in range(len(f.outputs)))
            right = tuple(Waveform(tuple(r[k] for r in rows_g)) for k in range(len(g.outputs)))
            return Counterexample(waves, left, right)
    return Equal(count, length)


# -- waveform text format -----------------------------------------------------------

def parse_waveforms(text: str, lattice: Lattice) -> list[list[int]]:
    """``t,f;b``: wires separated by ';', ticks by ','."""
    text = text.strip()
    if not text:
        return []
    return [[lattice.value(v.strip()) for v in wire.split(",")] for wire in text.split(";")]


def format_waveforms(waves: Sequence[Waveform | Sequence[int]], lattice: Lattice) -> str:
    out = []
    for w in waves:
        vals = w.values if isinstance(w, Waveform) else w
        out.append(",".join(lattice.name_of(v) for v in vals))
    return ";".join(out)
