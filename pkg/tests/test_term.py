import pytest
from hypothesis import given, settings, strategies as st

import term_strategies

from diagcirc.term import (Arity, ArityError, Box, Delay, Fork, Gate, Id, Join, ParseError, Seq,
                           Stub, Sym, Tensor, Trace, Value, codiag, diag, infer_arity, iterate,
                           library, make_waveform, parse, parse_file, permutation, pretty, route,
                           tensor)


def test_parse_examples(b4):
    t, f = b4.lattice.value("t"), b4.lattice.value("f")
    term = parse("t * f ; and", b4)
    assert term == Seq(Tensor(Value(t), Value(f)), Gate("and", 2))
    assert infer_arity(term) == Arity(0, 1)
    assert parse("id 3", b4) == Id(3)
    assert infer_arity(parse("tr 1 (sym 1 1)", b4)) == Arity(1, 1)


def test_operator_precedence(b4):
    # * binds tighter than ; and both associate to the left
    assert parse("id 1 ; id 1 * id 0 ; id 1", b4) == Seq(Seq(Id(1), Tensor(Id(1), Id(0))), Id(1))
    assert parse("id 1 * id 1 * id 1", b4) == Tensor(Tensor(Id(1), Id(1)), Id(1))


def test_infer_arity_examples(b4):
    assert infer_arity(Gate("and", 2)) == Arity(2, 1)
    assert infer_arity(Fork()) == Arity(1, 2)
    assert infer_arity(Trace(1, Seq(Gate("and", 2), Fork()))) == Arity(1, 1)
    assert infer_arity(Box("F", 2, 3)) == Arity(2, 3)
    assert str(Arity(2, 1)) == "2→1"


def test_arity_mismatch_reports_both_sides(b4):
    with pytest.raises(ArityError) as info:
        parse("fork ; not", b4)
    assert {info.value.left, info.value.right} == {Arity(1, 2), Arity(1, 1)}
    with pytest.raises(ArityError):
        parse("tr 2 (and)", b4)


@pytest.mark.parametrize("text, pos", [("t * ; and", 4), ("id", 2), ("(t", 2), ("t ; not )", 8)])
def test_syntax_errors_have_positions(b4, text, pos):
    with pytest.raises(ParseError) as info:
        parse(text, b4)
    assert info.value.pos == pos


def test_unknown_names(b4):
    with pytest.raises(ParseError):
        parse("xor", b4)
    with pytest.raises(ParseError):
        parse("n", b4)  # mos6 gate, not in bool4


def test_waveform(b4):
    v = b4.lattice.value("t")
    assert make_waveform([v]) == Value(v)
    assert make_waveform([0, v]) == Seq(Tensor(Seq(Value(v), Delay()), Value(0)), Join())
    for n in range(1, 5):
        assert infer_arity(make_waveform([v] * n)) == Arity(0, 1)
    with pytest.raises(ValueError):
        make_waveform([])
    assert parse("wave[t,f]", b4) == make_waveform([v, b4.lattice.value("f")])


def test_diagonals():
    assert diag(0) == Id(0)
    assert diag(1) == Fork()
    for n in range(4):
        assert infer_arity(diag(n)) == Arity(n, 2 * n)
        assert infer_arity(codiag(n)) == Arity(2 * n, n)


def test_iterator(b4):
    and_ = Gate("and", 2)
    assert iterate(1, and_) == Trace(1, Seq(and_, Fork()))
    assert infer_arity(iterate(1, and_)) == Arity(1, 1)
    assert parse("iter 1 (and)", b4) == iterate(1, and_)
    with pytest.raises(ArityError):
        iterate(2, and_)


def test_permutation_and_route():
    assert permutation([0, 1, 2]) == Id(3)
    assert infer_arity(permutation([2, 0, 1])) == Arity(3, 3)
    with pytest.raises(ValueError):
        permutation([0, 0])
    assert infer_arity(route(4, [3, 1], Gate("and", 2))) == Arity(4, 3)


def test_mos6_library(m6):
    lib = library(m6)
    assert set(lib) >= {"inv", "pass", "mux"}
    assert infer_arity(lib["inv"]) == Arity(1, 1)
    assert infer_arity(lib["pass"]) == Arity(2, 1)
    assert infer_arity(lib["mux"]) == Arity(3, 1)
    h, l = m6.lattice.value("h"), m6.lattice.value("l")
    assert lib["inv"] == Seq(Seq(Seq(Fork(), tensor(Id(1), Value(h), Id(1), Value(l))),
                                 Tensor(Gate("p", 2), Gate("n", 2))), Join())


def test_bool4_mux_macro(b4):
    assert infer_arity(parse("mux", b4)) == Arity(3, 1)


def test_parse_file_use_line(tmp_path):
    sig, term = parse_file("use mos6\n# comment\nH ; inv\n")
    assert sig.name == "mos6" and infer_arity(term) == Arity(0, 1)
    sig, _ = parse_file("t ; not")
    assert sig.name == "bool4"
    (tmp_path / "two.sig").write_text(
        "lattice two 2\nvalues lo hi\norder lo hi\ngate up 1\nrow lo -> hi\nrow hi -> hi\n")
    sig, term = parse_file("use two.sig\nlo ; up\n", base_dir=str(tmp_path))
    assert sig.name == "two" and infer_arity(term) == Arity(0, 1)


def test_unicode_pretty(b4):
    assert pretty(parse("bot ; delay", b4), b4, unicode=True) == "⊥ ; δ"
    assert parse("⊥ ; δ".replace("δ", "delay"), b4) == parse("bot ; delay", b4)


# -- round trip -------------------------------------------------------------

terms = term_strategies.terms()


@settings(max_examples=200, deadline=None)
@given(terms)
def test_pretty_parse_round_trip(t):
    from diagcirc.lattice import builtin_signature
    sig = builtin_signature("bool4")
    assert parse(pretty(t, sig), sig) == t


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 3), terms)
def test_iter_arity_contract(n, f):
    ar = infer_arity(f)
    if ar.outputs != n or ar.inputs < n:
        with pytest.raises(ArityError):
            iterate(n, f)
    else:
        assert infer_arity(iterate(n, f)) == Arity(ar.inputs - n, n)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=6))
def test_waveform_arity_property(values):
    assert infer_arity(make_waveform(values)) == Arity(0, 1)
