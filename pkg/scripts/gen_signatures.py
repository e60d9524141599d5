"""Regenerate the built-in signature tables under src/diagcirc/data/.

bool4 uses the Belnap connectives (meet/join in the truth order) over the
knowledge lattice bot < f, t < top. mos6 applies the transistor equations as an
ordered rule list; the first matching rule wins.
"""
import itertools
import pathlib

from diagcirc.lattice import Signature, format_signature, lattice_from_order, make_gate

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "diagcirc" / "data"


def bool4() -> Signature:
    lat = lattice_from_order("bool4", ["bot", "f", "t", "top"],
                             [("bot", "f"), ("bot", "t"), ("f", "top"), ("t", "top")],
                             ["⊥", "f", "t", "⊤"])
    bot, f, t, top = range(4)
    # truth order: f < bot, top < t
    truth_le = {(a, b) for a in range(4) for b in range(4)
                if a == b or a == f or b == t}

    def meet(a, b):
        lows = [c for c in range(4) if (c, a) in truth_le and (c, b) in truth_le]
        return next(c for c in lows if all((d, c) in truth_le for d in lows))

    def join(a, b):
        ups = [c for c in range(4) if (a, c) in truth_le and (b, c) in truth_le]
        return next(c for c in ups if all((c, d) in truth_le for d in ups))

    neg = {bot: bot, f: t, t: f, top: top}
    pairs = list(itertools.product(range(4), repeat=2))
    gates = {
        "and": make_gate(lat, "and", 2, {p: meet(*p) for p in pairs}),
        "or": make_gate(lat, "or", 2, {p: join(*p) for p in pairs}),
        "not": make_gate(lat, "not", 1, {(a,): neg[a] for a in range(4)}),
    }
    return Signature(lat, gates, "bool4")


def mos6() -> Signature:
    names = ["bot", "h", "H", "l", "L", "top"]
    lat = lattice_from_order("mos6", names,
                             [("bot", "h"), ("bot", "l"), ("h", "H"), ("l", "L"),
                              ("H", "top"), ("L", "top")],
                             ["⊥", "h", "H", "l", "L", "⊤"])
    bot, h, H, l, L, top = range(6)

    def nmos(a, b):
        if b == top:
            return top
        specific = {(L, L): L, (L, l): l, (L, H): h, (L, h): bot}
        if (a, b) in specific:
            return specific[(a, b)]
        if a == H:
            return bot
        if a not in (H, L):
            return top
        return bot  # (L, bot): not covered by the equations; high impedance passes through

    swap = {bot: bot, h: l, H: L, l: h, L: H, top: top}

    def pmos(a, b):
        return swap[nmos(swap[a], swap[b])]

    pairs = list(itertools.product(range(6), repeat=2))
    gates = {
        "n": make_gate(lat, "n", 2, {p: nmos(*p) for p in pairs}),
        "p": make_gate(lat, "p", 2, {p: pmos(*p) for p in pairs}),
    }
    return Signature(lat, gates, "mos6")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    for sig in (bool4(), mos6()):
        path = DATA / f"{sig.name}.sig"
        path.write_text(format_signature(sig), encoding="utf-8")
        print(f"wrote {path}")
