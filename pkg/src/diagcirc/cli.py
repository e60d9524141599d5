"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 semantic error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import forms, oracle, rewrite
from .lattice import Signature, SignatureError, load_signature
from .term import ArityError, ParseError, parse_file, pretty
from .tfpg import Kind, Tfpg, TfpgError, check, from_term, readback_term, to_dot, value_label


class CliError(Exception):
    def __init__(self, kind: str, detail: str, code: int):
        super().__init__(detail)
        self.kind = kind
        self.detail = detail
        self.code = code


@dataclass
class JobConfig:
    command: str
    files: list[str]
    signature: str = "bool4"
    ticks: int = 10
    budget: int = 200_000
    fuel: int | None = None
    output: str | None = None
    dot: str | None = None
    inputs: str = ""
    bindings: list[str] = field(default_factory=list)
    mode: str | None = None
    form: str = "local"
    trace: bool = False

    def __post_init__(self):
        if self.ticks < 0 or self.budget <= 0 or (self.fuel is not None and self.fuel < 0):
            raise CliError("usage", "limits must be positive", 1)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, 1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diagcirc", description="Rewrite, run and check circuit diagrams.")
    p.add_argument("--sig", default="bool4", help="signature when a file has no `use` line")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_, nfiles=1):
        s = sub.add_parser(name, help=help_)
        s.add_argument("files", nargs=nfiles, metavar="file")
        s.add_argument("--trace", action="store_true", help="print the rule log")
        return s

    cmd("check", "parse, type-check and validate the graph")
    s = cmd("dot", "emit Graphviz DOT")
    s.add_argument("-o", "--output")
    s = cmd("run", "operational semantics of a closed circuit")
    s.add_argument("--ticks", type=int, default=10)
    s.add_argument("--budget", type=int, default=200_000)
    s = cmd("eval", "reference stream simulation")
    s.add_argument("--in", dest="inputs", default="", help="waveforms, e.g. 't,f;b'")
    s.add_argument("--ticks", type=int, default=10)
    s = cmd("peval", "partial evaluation")
    s.add_argument("--fuel", type=int)
    s.add_argument("--set", dest="bindings", action="append", default=[], metavar="K=V",
                   help="plug value V into input K before evaluating")
    s.add_argument("-o", "--output")
    s.add_argument("--dot")
    s = cmd("equiv", "bounded extensional equivalence", nfiles=2)
    s.add_argument("--mode", choices=["delay", "feedback"])
    s.add_argument("--budget", type=int, default=10 ** 7)
    s = cmd("normalize", "put a circuit into a canonical form")
    s.add_argument("--form", default="local",
                   choices=["local", "global-trace", "global-delay", "passive"])
    s.add_argument("-o", "--output")
    return p


def load_circuit(path: str, default_sig: str) -> tuple[Signature, Tfpg]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror}", 1)
    try:
        sig, term = parse_file(text, default=default_sig, base_dir=os.path.dirname(path))
    except ParseError as exc:
        raise CliError("parse", f"{path}: {exc}", 1)
    except (SignatureError, OSError) as exc:
        raise CliError("signature", f"{path}: {exc}", 1)
    except ArityError as exc:
        raise CliError("arity", f"{path}: {exc}", 2)
    return sig, from_term(term)


def plug(g: Tfpg, sig: Signature, bindings: list[str]) -> Tfpg:
    """Replace the named input wires by constant values."""
    h = g.copy()
    drop = set()
    for b in bindings:
        try:
            k, v = b.split("=", 1)
            k = int(k)
            val = sig.lattice.value(v)
        except (ValueError, KeyError):
            raise CliError("usage", f"bad binding {b!r}, expected K=VALUE", 1)
        if not 0 <= k < len(g.inputs):
            raise CliError("usage", f"input {k} out of range for {g.arity}", 1)
        w = g.inputs[k]
        dst = h.disconnect_out(w, 0)
        h.remove(w)
        c = h.add(value_label(val))
        h.connect(c, 0, *dst)
        drop.add(w)
    h.inputs = [i for i in h.inputs if i not in drop]
    check(h)
    return h


def _write(path: str | None, text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _term_text(g: Tfpg, sig: Signature) -> str:
    return f"use {sig.name}\n{pretty(readback_term(g), sig)}\n"


def execute(cfg: JobConfig, out) -> int:
    sig, g = load_circuit(cfg.files[0], cfg.signature)
    lat = sig.lattice
    if cfg.command == "check":
        out.write(f"ok {g.arity} nodes={len(g)} feedback={len(g.feedback)} "
                  f"delays={len(g.nodes(Kind.DELAY))}\n")
        return 0
    if cfg.command == "dot":
        _write(cfg.output, to_dot(g, sig), out)
        return 0
    if cfg.command == "run":
        if g.inputs:
            raise CliError("semantic", f"run needs a closed circuit, this one is {g.arity}", 2)
        res = rewrite.run(g, sig, cfg.ticks, cfg.budget, trace=cfg.trace)
        if cfg.trace:
            for line in res.trace:
                out.write(line + "\n")
        else:
            for t, vals in enumerate(res.emitted):
                out.write(f"tick {t} emit {' '.join(lat.name_of(v) for v in vals)}".rstrip() + "\n")
        out.write(f"verdict {res.verdict_text}\n")
        return 3 if res.verdict is rewrite.Verdict.STEP_LIMIT else 0
    if cfg.command == "eval":
        try:
            waves = oracle.parse_waveforms(cfg.inputs, lat)
        except KeyError as exc:
            raise CliError("parse", f"unknown value {exc.args[0]!r} in --in", 1)
        if len(waves) != len(g.inputs):
            raise CliError("semantic", f"circuit has {len(g.inputs)} inputs, got {len(waves)} waveforms", 2)
        res = oracle.simulate(g, sig, waves, cfg.ticks)
        out.write(oracle.format_waveforms(res, lat) + "\n")
        return 0
    if cfg.command == "peval":
        if cfg.bindings:
            g = plug(g, sig, cfg.bindings)
        log = [] if cfg.trace else None
        res = rewrite.partial_evaluate(g, sig, cfg.fuel, log)
        for line in log or ():
            out.write(line + "\n")
        text = _term_text(res, sig)
        if cfg.output:
            _write(cfg.output, text, out)
        else:
            out.write(text)
        if cfg.dot:
            _write(cfg.dot, to_dot(res, sig, "residual"), out)
        return 0
    if cfg.command == "equiv":
        sig2, g2 = load_circuit(cfg.files[1], cfg.signature)
        if sig2.lattice != lat:
            raise CliError("semantic", "circuits use different signatures", 2)
        if g.arity != g2.arity:
            raise CliError("arity", f"{g.arity} vs {g2.arity}", 2)
        res = oracle.check_equivalence(g, g2, sig, cfg.mode, cfg.budget)
        if res:
            out.write(f"equal (tested {res.tested} input tuples of length {res.length})\n")
        else:
            out.write("counterexample\n")
            out.write(f"  in    {oracle.format_waveforms(res.inputs, lat)}\n")
            out.write(f"  left  {oracle.format_waveforms(res.left, lat)}\n")
            out.write(f"  right {oracle.format_waveforms(res.right, lat)}\n")
        return 0
    if cfg.command == "normalize":
        if cfg.form == "local":
            log = [] if cfg.trace else None
            res, _ = rewrite.normalize_local(g, sig, log=log)
            for line in log or ():
                out.write(line + "\n")
        elif cfg.form == "global-trace":
            res = forms.globalize_trace(g)
        elif cfg.form == "global-delay":
            res = forms.hoist_delays(g).graph
        else:
            res, values = forms.passify(g)
            out.write("values " + " ".join(lat.name_of(v) for v in values) + "\n")
        _write(cfg.output, _term_text(res, sig), out)
        return 0
    raise CliError("usage", f"unknown command {cfg.command}", 1)


def run_cli(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        cfg = JobConfig(
            command=ns.command, files=ns.files, signature=ns.sig,
            ticks=getattr(ns, "ticks", 10), budget=getattr(ns, "budget", 200_000),
            fuel=getattr(ns, "fuel", None), output=getattr(ns, "output", None),
            dot=getattr(ns, "dot", None), inputs=getattr(ns, "inputs", ""),
            bindings=getattr(ns, "bindings", []), mode=getattr(ns, "mode", None),
            form=getattr(ns, "form", "local"), trace=ns.trace,
        )
        return execute(cfg, out)
    except CliError as exc:
        err.write(f"error: {exc.kind}: {exc.detail}\n")
        return exc.code
    except (ArityError, TfpgError, rewrite.RewriteError, oracle.OracleError) as exc:
        if isinstance(exc, (oracle.BudgetExceeded, rewrite.BudgetExhausted)):
            err.write(f"error: budget: {exc}\n")
            return 3
        err.write(f"error: semantic: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
