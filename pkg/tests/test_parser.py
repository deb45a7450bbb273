import textwrap

import pytest
from hypothesis import given, settings, strategies as st

from asmkit import parse, print_unit
from asmkit.core import Assign, Cond, Par, Term
from asmkit.cosim.generate import GenConfig, generate
from asmkit.cosim.suites import corpus_units, load_corpus
from asmkit.parser import CheckError, ParseError

HEADER = """use arithmetic
fn b/0 dynamic relational
fn n/0 dynamic numeric
program
"""


def test_dangling_else_binds_to_the_inner_if():
    alg = parse(HEADER + "  if b then\n    if eq(n, 0) then n := 1\n  else n := 2\n")
    inner = Cond(Term("eq", (Term("n"), Term("0"))), Assign("n", (), Term("1")),
                 Assign("n", (), Term("2")))
    assert alg.program == Cond(Term("b"), inner, Par(()))


def test_printer_keeps_an_outer_else_with_the_outer_if():
    inner = Cond(Term("eq", (Term("n"), Term("0"))), Assign("n", (), Term("1")), Par(()))
    alg = parse(HEADER + "  skip\n").evolve(
        program=Cond(Term("b"), inner, Assign("n", (), Term("2"))))
    expected = HEADER + textwrap.indent(textwrap.dedent("""\
        if b then
          if eq(n, 0) then
            n := 1
          else
            skip
        else
          n := 2
    """), "  ")
    text = print_unit(alg)
    assert text == expected
    assert parse(text) == alg


def test_else_if_chain_prints_flat():
    text = HEADER + ("  if eq(n, 0) then\n    n := 1\n  else if eq(n, 1) then\n"
                     "    n := 2\n  else\n    n := 3\n")
    assert print_unit(parse(text)) == text


def test_long_else_if_chain_round_trips():
    arms = "".join(f"  else if eq(n, {k}) then\n    n := {k + 1}\n" for k in range(1, 3000))
    text = HEADER + "  if eq(n, 0) then\n    n := 1\n" + arms
    alg = parse(text)
    assert print_unit(alg) == text


@pytest.mark.parametrize("name", corpus_units())
def test_corpus_round_trips(name):
    alg = load_corpus(name)
    text = print_unit(alg)
    assert parse(text) == alg
    assert print_unit(parse(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3), st.booleans())
def test_generated_units_round_trip(seed, n_ext, with_output):
    alg = generate(GenConfig(seed=seed, n_extrinsic=n_ext, with_output=with_output))
    assert parse(print_unit(alg)) == alg


def test_parse_error_has_a_position():
    with pytest.raises(ParseError) as err:
        parse(HEADER + "  n := \n")
    assert err.value.line == 6


@pytest.mark.parametrize("body, message", [
    ("  m := 1\n", "m"),
    ("  succ(0) := 1\n", "static"),
    ("  n := succ(1, 2)\n", "succ"),
])
def test_check_errors(body, message):
    with pytest.raises(CheckError) as err:
        parse(HEADER + body)
    assert message in str(err.value)


def test_dollar_names_need_the_generated_directive():
    with pytest.raises((ParseError, CheckError)):
        parse("fn $x/0 dynamic\nprogram\n  skip\n")
    assert parse("@generated\nfn $x/0 dynamic\nprogram\n  skip\n").decls[0].name == "$x"
