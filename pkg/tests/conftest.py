import pathlib

import pytest

from diagcirc.lattice import builtin_signature
from diagcirc.term import parse, parse_file
from diagcirc.tfpg import from_term

ROOT = pathlib.Path(__file__).resolve().parents[1]
CIRCUITS = ROOT / "circuits"


@pytest.fixture(scope="session")
def b4():
    return builtin_signature("bool4")


@pytest.fixture(scope="session")
def m6():
    return builtin_signature("mos6")


@pytest.fixture
def graph(b4):
    """graph('t ; not') or graph(text, sig)."""
    def build(text, sig=None):
        return from_term(parse(text, sig or b4))
    return build


def load_circuit(name):
    sig, term = parse_file((CIRCUITS / f"{name}.circ").read_text(encoding="utf-8"))
    return sig, from_term(term)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
