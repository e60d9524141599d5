"""Circuit terms: the traced monoidal syntax, its parser and derived forms.

Composition is written in diagrammatic order (``f ; g`` runs ``f`` first) and
``*`` is the tensor. ``Trace(k, f)`` ties the last ``k`` outputs of ``f`` to
its last ``k`` inputs.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .lattice import Signature, load_signature


@dataclass(frozen=True)
class Arity:
    inputs: int
    outputs: int

    def __str__(self):
        return f"{self.inputs}→{self.outputs}"


@dataclass(frozen=True)
class Id:
    n: int


@dataclass(frozen=True)
class Sym:
    m: int
    n: int


@dataclass(frozen=True)
class Gate:
    name: str
    arity: int


@dataclass(frozen=True)
class Value:
    v: int


@dataclass(frozen=True)
class Delay:
    pass


@dataclass(frozen=True)
class Fork:
    pass


@dataclass(frozen=True)
class Join:
    pass


@dataclass(frozen=True)
class Stub:
    pass


@dataclass(frozen=True)
class Box:
    name: str
    m: int
    n: int


@dataclass(frozen=True)
class Seq:
    first: "Term"
    second: "Term"


@dataclass(frozen=True)
class Tensor:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Trace:
    k: int
    body: "Term"


Term = Union[Id, Sym, Gate, Value, Delay, Fork, Join, Stub, Box, Seq, Tensor, Trace]


class ArityError(ValueError):
    def __init__(self, message: str, left: Arity | None = None, right: Arity | None = None):
        super().__init__(message)
        self.left = left
        self.right = right


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def infer_arity(t: Term) -> Arity:
    if isinstance(t, Id):
        return Arity(t.n, t.n)
    if isinstance(t, Sym):
        return Arity(t.m + t.n, t.m + t.n)
    if isinstance(t, Gate):
        return Arity(t.arity, 1)
    if isinstance(t, Value):
        return Arity(0, 1)
    if isinstance(t, Delay):
        return Arity(1, 1)
    if isinstance(t, Fork):
        return Arity(1, 2)
    if isinstance(t, Join):
        return Arity(2, 1)
    if isinstance(t, Stub):
        return Arity(1, 0)
    if isinstance(t, Box):
        return Arity(t.m, t.n)
    if isinstance(t, Seq):
        a, b = infer_arity(t.first), infer_arity(t.second)
        if a.outputs != b.inputs:
            raise ArityError(f"cannot compose {a} with {b}", a, b)
        return Arity(a.inputs, b.outputs)
    if isinstance(t, Tensor):
        a, b = infer_arity(t.left), infer_arity(t.right)
        return Arity(a.inputs + b.inputs, a.outputs + b.outputs)
    if isinstance(t, Trace):
        a = infer_arity(t.body)
        if t.k > min(a.inputs, a.outputs):
            raise ArityError(f"cannot trace {t.k} wires of {a}", a, Arity(t.k, t.k))
        return Arity(a.inputs - t.k, a.outputs - t.k)
    raise TypeError(f"not a term: {t!r}")


# -- smart constructors ----------------------------------------------------

def seq(*terms: Term) -> Term:
    out = terms[0]
    for t in terms[1:]:
        out = Seq(out, t)
    return out


def tensor(*terms: Term) -> Term:
    out = terms[0]
    for t in terms[1:]:
        out = Tensor(out, t)
    return out


def diag(n: int) -> Term:
    """Width-n copier: n -> 2n, both copies in the original order."""
    if n == 0:
        return Id(0)
    if n == 1:
        return Fork()
    return Seq(Tensor(diag(n - 1), Fork()),
               tensor(Id(n - 1), Sym(n - 1, 1), Id(1)))


def codiag(n: int) -> Term:
    """Width-n join: 2n -> n, joining wire i with wire n+i."""
    if n == 0:
        return Id(0)
    if n == 1:
        return Join()
    return Seq(tensor(Id(n - 1), Sym(1, n - 1), Id(1)),
               Tensor(codiag(n - 1), Join()))


def iterate(n: int, f: Term) -> Term:
    """The iterator on f: m+n -> n, feeding its output back on the last n inputs."""
    a = infer_arity(f)
    if a.outputs != n or a.inputs < n:
        raise ArityError(f"iter {n} needs a body m+{n} -> {n}, got {a}", a, Arity(n, n))
    return Trace(n, Seq(f, diag(n)))


def make_waveform(values: Sequence[int]) -> Term:
    """Waveform term; values[0] is visible now, values[1] one tick later, ..."""
    if not values:
        raise ValueError("a waveform needs at least one value")
    out: Term = Value(values[-1])
    for v in reversed(values[:-1]):
        out = Seq(Tensor(Seq(out, Delay()), Value(v)), Join())
    return out


def permutation(perm: Sequence[int]) -> Term:
    """Wiring term whose output i carries input perm[i]."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation: {perm}")
    current = list(range(n))
    stages: list[Term] = []
    # bubble the wanted wire into each position using adjacent swaps
    for i, want in enumerate(perm):
        j = current.index(want)
        while j > i:
            stages.append(tensor(*[x for x in (Id(j - 1), Sym(1, 1), Id(n - j - 1)) if x != Id(0)]))
            current[j - 1], current[j] = current[j], current[j - 1]
            j -= 1
    if not stages:
        return Id(n)
    return seq(*stages)


def route(width: int, positions: Sequence[int], t: Term) -> Term:
    """Apply t to the bus wires at positions; t's outputs come first, the rest follow in order."""
    rest = [i for i in range(width) if i not in positions]
    perm = list(positions) + rest
    a = infer_arity(t)
    if a.inputs != len(positions):
        raise ArityError(f"route: {a} applied to {len(positions)} wires", a, Arity(len(positions), 0))
    body = t if not rest else Tensor(t, Id(len(rest)))
    if perm == list(range(width)):
        return body
    return Seq(permutation(perm), body)


# -- library circuits -------------------------------------------------------

def library(sig: Signature) -> dict[str, Term]:
    """Derived circuits available by name in circuit files for a signature."""
    lat = sig.lattice
    lib: dict[str, Term] = {}
    if {"and", "or", "not"} <= set(sig.gates):
        a, o, n = (Gate(g, sig.gates[g].arity) for g in ("and", "or", "not"))
        # mux(s, x, y) = (s and x) or (not s and y)
        lib["mux"] = seq(
            Tensor(Fork(), Id(2)),
            tensor(Id(1), Sym(1, 1), Id(1)),
            tensor(a, n, Id(1)),
            Tensor(Id(1), a),
            o,
        )
    if {"n", "p"} <= set(sig.gates) and all(lat.is_value(v) for v in ("h", "l")):
        nm, pm = Gate("n", 2), Gate("p", 2)
        h, l = Value(lat.value("h")), Value(lat.value("l"))
        inv = seq(Fork(), tensor(Id(1), h, Id(1), l), Tensor(pm, nm), Join())
        pass_ = seq(Tensor(Fork(), Fork()), Tensor(inv, Id(3)), tensor(Id(1), Sym(1, 1), Id(1)),
                    Tensor(pm, nm), Join())
        mux = seq(Tensor(Fork(), Id(2)), tensor(Id(1), Sym(1, 1), Id(1)),
                  tensor(Id(2), inv, Id(1)), Tensor(pass_, pass_), Join())
        lib.update({"inv": inv, "pass": pass_, "mux": mux})
    return lib


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(#[^\n]*)|(\d+)|([A-Za-z_][A-Za-z0-9_']*|⊥|⊤)|(.))", re.S)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            pass
        elif m.group(2) is not None:
            out.append(("nat", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            out.append(("name", m.group(3), m.start(3)))
        elif m.group(4) is not None:
            if not m.group(4).isspace():
                out.append(("sym", m.group(4), m.start(4)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.lib = library(sig)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.next()
        if tok[0] != kind or (text is not None and tok[1] != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def nat(self) -> int:
        return int(self.expect("nat")[1])

    def term(self) -> Term:
        left = self.tensor()
        while self.peek()[:2] == ("sym", ";"):
            pos = self.next()[2]
            right = self.tensor()
            left = self._checked(Seq(left, right), pos)
        return left

    def tensor(self) -> Term:
        left = self.atom()
        while self.peek()[:2] == ("sym", "*"):
            self.next()
            left = Tensor(left, self.atom())
        return left

    def _checked(self, t: Term, pos: int) -> Term:
        try:
            infer_arity(t)
        except ArityError as exc:
            raise ArityError(f"{exc} at position {pos}", exc.left, exc.right) from None
        return t

    def atom(self) -> Term:
        kind, text, pos = self.next()
        if kind == "sym" and text == "(":
            t = self.term()
            self.expect("sym", ")")
            return t
        if kind != "name":
            raise ParseError(f"unexpected {text or 'end of input'!r}", pos)
        if text == "id":
            return Id(self.nat())
        if text == "sym":
            return Sym(self.nat(), self.nat())
        if text == "fork":
            return Fork()
        if text == "join":
            return Join()
        if text == "stub":
            return Stub()
        if text == "delay":
            return Delay()
        if text == "diag":
            return diag(self.nat())
        if text == "codiag":
            return codiag(self.nat())
        if text == "box":
            name = self.expect("name")[1]
            return Box(name, self.nat(), self.nat())
        if text in ("tr", "iter"):
            k = self.nat()
            self.expect("sym", "(")
            body = self.term()
            self.expect("sym", ")")
            if text == "tr":
                return self._checked(Trace(k, body), pos)
            try:
                return iterate(k, body)
            except ArityError as exc:
                raise ArityError(f"{exc} at position {pos}", exc.left, exc.right) from None
        if text == "wave":
            self.expect("sym", "[")
            vals = [self.value()]
            while self.peek()[:2] == ("sym", ","):
                self.next()
                vals.append(self.value())
            self.expect("sym", "]")
            return make_waveform(vals)
        if text in self.sig.gates:
            return Gate(text, self.sig.gates[text].arity)
        if self.sig.lattice.is_value(text):
            return Value(self.sig.lattice.value(text))
        if text in self.lib:
            return self.lib[text]
        raise ParseError(f"unknown gate or value {text!r}", pos)

    def value(self) -> int:
        kind, text, pos = self.next()
        if kind == "name" and self.sig.lattice.is_value(text):
            return self.sig.lattice.value(text)
        raise ParseError(f"expected a value, found {text!r}", pos)


def parse(text: str, sig: Signature) -> Term:
    p = _Parser(text, sig)
    t = p.term()
    tok = p.peek()
    if tok[0] != "eof":
        raise ParseError(f"unexpected {tok[1]!r}", tok[2])
    infer_arity(t)
    return t


def parse_file(text: str, default: str = "bool4", base_dir: str | None = None) -> tuple[Signature, Term]:
    """A circuit file: optional ``use <signature>`` line followed by a term."""
    sig_ref = default
    body = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith("use ") and not body:
            sig_ref = stripped[4:].strip()
            if sig_ref not in ("bool4", "mos6") and base_dir is not None:
                sig_ref = os.path.join(base_dir, sig_ref)
            body.append("")
            continue
        body.append(line)
    sig = load_signature(sig_ref)
    return sig, parse("\n".join(body), sig)


# -- printing --------------------------------------------------------------

def pretty(t: Term, sig: Signature, unicode: bool = False) -> str:
    """Render a term in the circuit-file grammar; ``parse`` inverts it."""
    lat = sig.lattice

    def go(t: Term, prec: int) -> str:
        # prec: 0 = sequence context, 1 = tensor operand
        if isinstance(t, Id):
            return f"id {t.n}"
        if isinstance(t, Sym):
            return f"sym {t.m} {t.n}"
        if isinstance(t, Gate):
            return t.name
        if isinstance(t, Value):
            return lat.symbol_of(t.v) if unicode else lat.name_of(t.v)
        if isinstance(t, Delay):
            return "δ" if unicode else "delay"
        if isinstance(t, Fork):
            return "fork"
        if isinstance(t, Join):
            return "join"
        if isinstance(t, Stub):
            return "stub"
        if isinstance(t, Box):
            return f"box {t.name} {t.m} {t.n}"
        if isinstance(t, Trace):
            return f"tr {t.k} ({go(t.body, 0)})"
        if isinstance(t, Seq):
            s = f"{go(t.first, 0)} ; {go(t.second, 1)}"
            return f"({s})" if prec > 0 else s
        if isinstance(t, Tensor):
            s = f"{go(t.left, 1)} * {go(t.right, 2)}"
            return f"({s})" if prec > 1 else s
        raise TypeError(t)

    return go(t, 0)
