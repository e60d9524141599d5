"""Finite value lattices, gate truth tables and signatures.

Values are small integers indexing a lattice carrier. Bottom is always
index 0 and top is always the last index, so serialized tables are stable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

RESERVED = frozenset({
    "id", "sym", "tr", "iter", "fork", "join", "stub", "delay", "box",
    "wave", "diag", "codiag", "use",
})

BOTTOM_ALIASES = ("bot", "b", "⊥")
TOP_ALIASES = ("top", "⊤")


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    name: str
    names: tuple[str, ...]
    symbols: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.names)
        if n < 2:
            raise SignatureError("a lattice needs at least bottom and top")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise SignatureError("join table is not square over the carrier")
        bad = self.law_violations()
        if bad:
            raise SignatureError(f"join table of {self.name!r} is not a lattice: {bad[0]}")

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def bottom(self) -> int:
        return 0

    @property
    def top(self) -> int:
        return len(self.names) - 1

    @property
    def carrier(self) -> range:
        return range(len(self.names))

    def join(self, a: int, b: int) -> int:
        return self.table[a][b]

    def join_all(self, values: Iterable[int]) -> int:
        out = self.bottom
        for v in values:
            out = self.table[out][v]
        return out

    def leq(self, a: int, b: int) -> bool:
        return self.table[a][b] == b

    def meet(self, a: int, b: int) -> int:
        lower = [c for c in self.carrier if self.leq(c, a) and self.leq(c, b)]
        return self.join_all(lower)

    def height(self) -> int:
        """Length of the longest strictly increasing chain, counted in steps."""
        best = {v: 0 for v in self.carrier}
        for v in sorted(self.carrier, key=lambda x: sum(self.leq(y, x) for y in self.carrier)):
            for u in self.carrier:
                if u != v and self.leq(u, v):
                    best[v] = max(best[v], best[u] + 1)
        return max(best.values())

    def law_violations(self) -> list[str]:
        """Exhaustive check of the join-semilattice laws plus bottom/top."""
        out = []
        t = self.table
        bot, top = 0, len(self.names) - 1
        for a in range(len(t)):
            if t[a][a] != a:
                out.append(f"join({a},{a}) != {a}")
            if t[bot][a] != a:
                out.append(f"bottom is not a unit at {a}")
            if t[top][a] != top:
                out.append(f"top is not absorbing at {a}")
            for b in range(len(t)):
                if t[a][b] != t[b][a]:
                    out.append(f"join not commutative at ({a},{b})")
                for c in range(len(t)):
                    if t[t[a][b]][c] != t[a][t[b][c]]:
                        out.append(f"join not associative at ({a},{b},{c})")
        return out

    def value(self, token: str) -> int:
        """Resolve a value name, symbol or alias to its carrier index."""
        if token in self.names:
            return self.names.index(token)
        if token in self.symbols:
            return self.symbols.index(token)
        if token in BOTTOM_ALIASES:
            return self.bottom
        if token in TOP_ALIASES:
            return self.top
        raise KeyError(token)

    def is_value(self, token: str) -> bool:
        try:
            self.value(token)
        except KeyError:
            return False
        return True

    def name_of(self, v: int) -> str:
        return self.names[v]

    def symbol_of(self, v: int) -> str:
        return self.symbols[v]


def lattice_from_order(name: str, names: Sequence[str], order: Iterable[tuple[str, str]],
                       symbols: Sequence[str] | None = None) -> Lattice:
    """Complete a covering/order relation into a join table."""
    idx = {n: i for i, n in enumerate(names)}
    size = len(names)
    le = [[i == j for j in range(size)] for i in range(size)]
    for a, b in order:
        le[idx[a]][idx[b]] = True
    for k in range(size):
        for i in range(size):
            for j in range(size):
                if le[i][k] and le[k][j]:
                    le[i][j] = True
    table = []
    for a in range(size):
        row = []
        for b in range(size):
            ubs = [c for c in range(size) if le[a][c] and le[b][c]]
            least = [c for c in ubs if all(le[c][d] for d in ubs)]
            if len(least) != 1:
                raise SignatureError(f"{names[a]} and {names[b]} have no least upper bound")
            row.append(least[0])
        table.append(tuple(row))
    return Lattice(name, tuple(names), tuple(symbols or names), tuple(table))


@dataclass(frozen=True)
class ConstantOutput:
    value: int


@dataclass(frozen=True)
class ForwardInput:
    index: int  # position among the remaining (unpinned) inputs


@dataclass(frozen=True)
class EnhancedRule:
    gate: str
    position: int
    value: int
    residual: ConstantOutput | ForwardInput


@dataclass(frozen=True)
class GateDef:
    name: str
    arity: int
    table: dict[tuple[int, ...], int] = field(hash=False, compare=True)
    monotone: bool = field(default=False, compare=False)

    def __call__(self, *args: int) -> int:
        return self.table[tuple(args)]


def make_gate(lattice: Lattice, name: str, arity: int, table: dict[tuple[int, ...], int]) -> GateDef:
    missing = [u for u in itertools.product(lattice.carrier, repeat=arity) if u not in table]
    if missing:
        raise SignatureError(f"gate {name!r} table is not total, missing {missing[0]}")
    g = GateDef(name, arity, dict(table))
    return GateDef(name, arity, g.table, not check_monotone(lattice, g))


def check_monotone(lattice: Lattice, gate: GateDef) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All pairs u <= u' (pointwise) whose outputs are not ordered likewise."""
    tuples = list(itertools.product(lattice.carrier, repeat=gate.arity))
    leq = lattice.leq
    bad = []
    for u in tuples:
        for w in tuples:
            if u != w and all(leq(a, b) for a, b in zip(u, w)):
                if not leq(gate.table[u], gate.table[w]):
                    bad.append((u, w))
    return bad


def derive_enhanced_rules(lattice: Lattice, gate: GateDef) -> list[EnhancedRule]:
    rules = []
    m = gate.arity
    for i in range(m):
        for v in lattice.carrier:
            rows = {}
            for rest in itertools.product(lattice.carrier, repeat=m - 1):
                rows[rest] = gate.table[rest[:i] + (v,) + rest[i:]]
            outs = set(rows.values())
            if len(outs) == 1:
                rules.append(EnhancedRule(gate.name, i, v, ConstantOutput(outs.pop())))
                continue
            for j in range(m - 1):
                if all(out == rest[j] for rest, out in rows.items()):
                    rules.append(EnhancedRule(gate.name, i, v, ForwardInput(j)))
    return rules


@dataclass
class Signature:
    lattice: Lattice
    gates: dict[str, GateDef]
    name: str = ""

    def __post_init__(self):
        for g in self.gates:
            if g in RESERVED:
                raise SignatureError(f"gate name {g!r} is reserved")
            if self.lattice.is_value(g):
                raise SignatureError(f"gate name {g!r} collides with a value name")
        self._rules: dict[str, dict[tuple[int, int], EnhancedRule]] = {}
        for g in self.gates.values():
            self._rules[g.name] = {(r.position, r.value): r for r in derive_enhanced_rules(self.lattice, g)}

    def gate(self, name: str) -> GateDef:
        return self.gates[name]

    def enhanced_rule(self, gate: str, position: int, value: int) -> EnhancedRule | None:
        """Rule for a pinned input, only for gates that pass the monotonicity check."""
        if not self.gates[gate].monotone:
            return None
        return self._rules[gate].get((position, value))


# -- signature files -------------------------------------------------------

def parse_signature(text: str) -> Signature:
    """Read the plain-text signature format.

    ``lattice <name> <size>``, ``values <names...>`` (optionally
    ``symbols <...>``), then either ``join a b c`` or ``order a b`` lines,
    then ``gate <name> <arity>`` blocks of ``row v1 .. vm -> v`` lines.
    """
    name = None
    size = None
    names: list[str] = []
    symbols: list[str] | None = None
    joins: dict[tuple[str, str], str] = {}
    order: list[tuple[str, str]] = []
    gates: list[tuple[str, int, list[tuple[list[str], str]]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        try:
            if head == "lattice":
                name, size = words[1], int(words[2])
            elif head == "values":
                names = words[1:]
            elif head == "symbols":
                symbols = words[1:]
            elif head == "join":
                joins[(words[1], words[2])] = words[3]
            elif head == "order":
                order.append((words[1], words[2]))
            elif head == "gate":
                gates.append((words[1], int(words[2]), []))
            elif head == "row":
                arrow = words.index("->")
                gates[-1][2].append((words[1:arrow], words[arrow + 1]))
            else:
                raise SignatureError(f"unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise SignatureError(f"line {lineno}: malformed {head!r} line") from exc
    if name is None or not names:
        raise SignatureError("missing lattice header or values line")
    if size != len(names):
        raise SignatureError(f"lattice size {size} but {len(names)} values listed")
    if joins:
        idx = {n: i for i, n in enumerate(names)}
        table = [[-1] * size for _ in range(size)]
        for (a, b), c in joins.items():
            table[idx[a]][idx[b]] = idx[c]
            table[idx[b]][idx[a]] = idx[c]
        if any(x < 0 for row in table for x in row):
            raise SignatureError("join table incomplete")
        lat = Lattice(name, tuple(names), tuple(symbols or names), tuple(tuple(r) for r in table))
    else:
        lat = lattice_from_order(name, names, order, symbols)
    gate_defs = {}
    for gname, arity, rows in gates:
        table = {}
        for args, out in rows:
            if len(args) != arity:
                raise SignatureError(f"gate {gname}: row with {len(args)} inputs, arity {arity}")
            table[tuple(lat.value(a) for a in args)] = lat.value(out)
        gate_defs[gname] = make_gate(lat, gname, arity, table)
    return Signature(lat, gate_defs, name)


def format_signature(sig: Signature) -> str:
    lat = sig.lattice
    lines = [f"lattice {lat.name} {lat.size}", "values " + " ".join(lat.names),
             "symbols " + " ".join(lat.symbols)]
    for a in lat.carrier:
        for b in lat.carrier:
            if a <= b:
                lines.append(f"join {lat.names[a]} {lat.names[b]} {lat.names[lat.join(a, b)]}")
    for g in sig.gates.values():
        lines.append(f"gate {g.name} {g.arity}")
        for args in itertools.product(lat.carrier, repeat=g.arity):
            ins = " ".join(lat.names[a] for a in args)
            lines.append(f"row {ins} -> {lat.names[g.table[args]]}")
    return "\n".join(lines) + "\n"


_BUILTIN_CACHE: dict[str, Signature] = {}


def builtin_signature(name: str) -> Signature:
    if name not in ("bool4", "mos6"):
        raise SignatureError(f"unknown built-in signature {name!r}")
    if name not in _BUILTIN_CACHE:
        text = resources.files("diagcirc").joinpath("data", f"{name}.sig").read_text(encoding="utf-8")
        _BUILTIN_CACHE[name] = parse_signature(text)
    return _BUILTIN_CACHE[name]


def load_signature(ref: str) -> Signature:
    """A built-in name or a path to a signature file."""
    if ref in ("bool4", "mos6"):
        return builtin_signature(ref)
    with open(ref, encoding="utf-8") as fh:
        return parse_signature(fh.read())
