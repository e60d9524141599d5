"""Write the example circuit corpus to circuits/ (one .circ file per example).

Each file starts with a `use` line naming its signature; the bodies are
produced by the pretty-printer so they always parse back to the same term.
"""
import pathlib

from diagcirc.lattice import builtin_signature
from diagcirc.term import (Box, Fork, Id, Trace, Value, parse, permutation, pretty, seq,
                           tensor)

OUT = pathlib.Path(__file__).resolve().parents[1] / "circuits"


def malik(sig) -> "Term":
    """Malik's shared-multiplexer circuit, inputs (x, y): if x then F(G(y)) else G(F(y))."""
    mux = parse("mux", sig)
    fork3 = seq(Fork(), tensor(Fork(), Id(1)))
    body = seq(
        tensor(fork3, Fork(), Fork(), Fork()),           # x x x y y Fo Fo Go Go
        permutation([0, 3, 5, 1, 7, 4, 2, 6, 8]),        # (x,y,Fo) (x,Go,y) (x,Fo,Go)
        tensor(mux, mux, mux),                           # G_in, F_in, out
        tensor(Box("G", 1, 1), Box("F", 1, 1), Id(1)),   # Go', Fo', out
        permutation([2, 1, 0]),                          # out, Fo', Go'
    )
    return Trace(2, body)


def closed_with(sig, name: str, t):
    return seq(tensor(Value(sig.lattice.value(name)), Id(1)), t)


def corpus() -> dict[str, tuple[str, str]]:
    b4, m6 = builtin_signature("bool4"), builtin_signature("mos6")
    ccc = ("tr 1 ( (fork * id 1) ; (id 1 * sym 1 1) ; (or * not) ; "
           "(fork * id 1) ; (id 1 * sym 1 1) ; (id 1 * or) )")
    files = {
        "and_chain": ("bool4", "(t * f * t) ; (and * id 1) ; and"),
        "and_chain_nested": ("bool4", "(((t * f) ; and) * t) ; and"),
        "streaming": ("bool4", "(wave[t,f] * wave[t,t]) ; and"),
        "ccc": ("bool4", ccc),
        "ccc_t": ("bool4", f"t ; {ccc}"),
        "ccc_f": ("bool4", f"f ; {ccc}"),
        "instant_and": ("bool4", "t ; iter 1 (and)"),
        "guarded_and": ("bool4", "t ; iter 1 ((id 1 * delay) ; and)"),
        "forever_v": ("bool4", "iter 1 ((delay * t) ; join)"),
        "inverter": ("mos6", "inv"),
        "inverter_H": ("mos6", "H ; inv"),
        "inverter_L": ("mos6", "L ; inv"),
        "pass": ("mos6", "pass"),
        "mux": ("mos6", "mux"),
        "mux_bool": ("bool4", "mux"),
    }
    files["malik"] = ("bool4", pretty(malik(b4), b4))
    files["malik_t"] = ("bool4", pretty(closed_with(b4, "t", malik(b4)), b4))
    files["malik_f"] = ("bool4", pretty(closed_with(b4, "f", malik(b4)), b4))
    files["malik_mos"] = ("mos6", pretty(malik(m6), m6))
    files["malik_mos_H"] = ("mos6", pretty(closed_with(m6, "H", malik(m6)), m6))
    files["malik_mos_L"] = ("mos6", pretty(closed_with(m6, "L", malik(m6)), m6))
    return files


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, (sig, body) in sorted(corpus().items()):
        path = OUT / f"{name}.circ"
        path.write_text(f"use {sig}\n{body}\n", encoding="utf-8")
        print(f"wrote {path}")
