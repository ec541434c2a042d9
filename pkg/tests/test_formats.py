from fractions import Fraction

import pytest

from cubeflag.colouring import EMPTY_FAMILY, Mode
from cubeflag.constraints import constraint_vectors
from cubeflag.flags import assemble_problem, build_bases, enumerate_h
from cubeflag.formats import (
    FormatError,
    dump_constraints,
    dump_h_list,
    dump_problem,
    family_hash,
    load_constraints,
    load_h_list,
    load_problem,
    parse_rat,
    rat,
)

from helpers import family


def test_rationals():
    assert rat(Fraction(3, 4)) == "3/4" and rat(2) == "2"
    assert parse_rat("-6/8") == Fraction(-3, 4)
    assert parse_rat("0.25") == Fraction(1, 4)
    with pytest.raises(FormatError):
        parse_rat("1/0")


def test_family_hash_depends_on_members():
    assert family_hash(family("B")) != family_hash(family("B1B2"))
    assert len(family_hash(EMPTY_FAMILY)) == 16


def test_h_list_round_trip():
    fam = family("B")
    hs = enumerate_h(Mode.EDGE, 3, fam)
    text = dump_h_list(Mode.EDGE, 3, fam, hs)
    assert text.splitlines()[0] == f"edge 3 {family_hash(fam)} 99"
    mode, l, fh, again = load_h_list(text)
    assert (mode, l, fh) == (Mode.EDGE, 3, family_hash(fam)) and again == hs
    with pytest.raises(FormatError):
        load_h_list(text.replace(" 99\n", " 98\n", 1))


def test_constraint_round_trip():
    hs = enumerate_h(Mode.PARTIAL, 3, EMPTY_FAMILY)
    rows = constraint_vectors(3, EMPTY_FAMILY, hs)
    again = load_constraints(dump_constraints(rows), 3)
    assert [r.dense(len(hs)) for r in again] == [r.dense(len(hs)) for r in rows]
    assert [r.s_class for r in again] == [r.s_class for r in rows]


def test_problem_round_trip():
    fam = family("B")
    problem = assemble_problem(Mode.PARTIAL, 3, fam, build_bases(Mode.PARTIAL, 3, fam))
    problem.constraints = constraint_vectors(3, fam, problem.h_list)
    text = dump_problem(problem)
    pf = load_problem(text)
    assert pf.h_list == problem.h_list and pf.d == problem.d
    assert dump_problem(pf.to_problem()) == text


@pytest.mark.parametrize("cut", [1, 5, 40])
def test_truncated_problem_rejected(cut):
    fam = family("B")
    text = dump_problem(assemble_problem(Mode.EDGE, 3, fam, build_bases(Mode.EDGE, 3, fam)))
    with pytest.raises(FormatError):
        load_problem("\n".join(text.splitlines()[:cut]) + "\n")
