"""Text file formats: families, H lists, problems, constraint rows.

All rationals are written as ``p/q`` (or a bare integer) and parsed back
exactly with :class:`fractions.Fraction`.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .colouring import CubeColouring, ForbiddenFamily, Mode
from .constraints import ConstraintRow
from .flags import DensityProblem, FlagBasis, FlagType, PairTensor

PROBLEM_HEADER = "cubeflag-problem v1"


class FormatError(ValueError):
    pass


def rat(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rat(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational: {tok!r}") from None


def family_hash(fam: ForbiddenFamily) -> str:
    return hashlib.sha256(fam.key().encode()).hexdigest()[:16]


def read_family(path) -> ForbiddenFamily:
    with open(path) as fh:
        try:
            return ForbiddenFamily.parse(fh.read())
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None


# -- H lists --------------------------------------------------------------------

def dump_h_list(mode: Mode, l: int, fam: ForbiddenFamily, hs: Sequence[CubeColouring]) -> str:
    lines = [f"{Mode(mode).value} {l} {family_hash(fam)} {len(hs)}"]
    lines += [h.text() for h in hs]
    return "\n".join(lines) + "\n"


def load_h_list(text: str) -> tuple[Mode, int, str, list[CubeColouring]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        mode, l, fhash, count = lines[0].split()
        hs = [CubeColouring.parse(ln) for ln in lines[1:]]
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed H list: {exc}") from None
    if len(hs) != int(count):
        raise FormatError(f"H list declares {count} cubes but holds {len(hs)}")
    return Mode(mode), int(l), fhash, hs


# -- constraint rows ------------------------------------------------------------

def dump_row(row: ConstraintRow) -> str:
    pairs = " ".join(f"{int(i)}:{rat(Fraction(int(v), row.denominator))}" for i, v in zip(row.index, row.values))
    return f"{row.s_class.letters} : {pairs}"


def dump_constraints(rows: Iterable[ConstraintRow]) -> str:
    return "".join(dump_row(r) + "\n" for r in rows)


def load_constraints(text: str, l: int) -> list[ConstraintRow]:
    rows = []
    for ln in text.splitlines():
        if not ln.strip():
            continue
        word, _, rest = ln.partition(":")
        S = CubeColouring.parse(f"triedge {l} {word.strip()}")
        idx, vals = [], []
        for tok in rest.split():
            i, _, v = tok.partition(":")
            idx.append(int(i))
            vals.append(parse_rat(v))
        den = 1
        for v in vals:
            den = den * v.denominator // np.gcd(den, v.denominator)
        rows.append(
            ConstraintRow(
                S,
                np.array(idx, dtype=np.int64),
                np.array([int(v * den) for v in vals], dtype=np.int64),
                int(den),
            )
        )
    return rows


# -- problems -------------------------------------------------------------------

def dump_problem(problem: DensityProblem) -> str:
    out = [PROBLEM_HEADER, f"mode {problem.mode.value}", f"l {problem.l}"]
    out += [f"forbid {m.text()}" for m in problem.family]
    out.append(f"constraints {len(problem.constraints)}")
    out.append(f"h {len(problem.h_list)}")
    out += [h.text() for h in problem.h_list]
    for i, b in enumerate(problem.bases):
        out.append(f"basis {i} {b.sigma.cube.text()} m {b.m} size {len(b)}")
        out += [f"flag {f.cube.text()}" for f in b.flags]
    out.append(f"d {len(problem.d)}")
    out += [rat(x) for x in problem.d]
    for i, t in enumerate(problem.tensors):
        out.append(f"tensor {i} den {t.denominator} nnz {len(t.count)}")
        out += [f"{int(h)} {int(a)} {int(b)} {int(c)}" for h, a, b, c in zip(t.h, t.a, t.b, t.count)]
    for j, row in enumerate(problem.constraints):
        out.append(f"row {j} {dump_row(row)}")
    out.append("end")
    return "\n".join(out) + "\n"


class ProblemFile:
    """Parsed problem file. Cached numeric sections are kept but never trusted by the checker."""

    def __init__(self, mode, l, family, h_list, bases, d, tensors, rows):
        self.mode: Mode = mode
        self.l: int = l
        self.family: ForbiddenFamily = family
        self.h_list: list[CubeColouring] = h_list
        self.bases: list[tuple[CubeColouring, int, list[CubeColouring]]] = bases
        self.d: list[Fraction] = d
        self.tensors: list[PairTensor] = tensors
        self.rows: list[ConstraintRow] = rows

    @property
    def n_constraints(self) -> int:
        return len(self.rows)

    def to_problem(self) -> DensityProblem:
        """Rebuild a DensityProblem from the cached sections (no recomputation)."""
        from .flags import Flag, type_embedding

        bases = []
        for sigma, m, flags in self.bases:
            theta = type_embedding(sigma.dim)
            lookup = np.full(1, -1, dtype=np.int64)
            bases.append(FlagBasis(FlagType(sigma), m, tuple(Flag(f, theta) for f in flags), lookup))
        return DensityProblem(self.mode, self.l, self.family, self.h_list, self.d, bases, self.tensors, self.rows)


def load_problem(text: str) -> ProblemFile:
    lines = text.splitlines()
    if not lines or lines[0].strip() != PROBLEM_HEADER:
        raise FormatError("missing problem header")
    pos = 1

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise FormatError("unexpected end of problem file")
        ln = lines[pos]
        pos += 1
        return ln

    def keyed(key: str) -> str:
        ln = take()
        head, _, rest = ln.partition(" ")
        if head != key:
            raise FormatError(f"expected {key!r}, found {ln!r}")
        return rest

    try:
        mode = Mode(keyed("mode").strip())
        l = int(keyed("l"))
        members = []
        while lines[pos].startswith("forbid "):
            members.append(CubeColouring.parse(take()[len("forbid "):]))
        family = ForbiddenFamily(tuple(members))
        n_rows = int(keyed("constraints"))
        nh = int(keyed("h"))
        h_list = [CubeColouring.parse(take()) for _ in range(nh)]
        bases = []
        while lines[pos].startswith("basis "):
            tok = take().split()
            sigma = CubeColouring.parse(" ".join(tok[2:5]))
            m, size = int(tok[6]), int(tok[8])
            flags = [CubeColouring.parse(keyed("flag")) for _ in range(size)]
            bases.append((sigma, m, flags))
        nd = int(keyed("d"))
        d = [parse_rat(take().strip()) for _ in range(nd)]
        tensors = []
        for i in range(len(bases)):
            tok = keyed("tensor").split()
            den, nnz = int(tok[2]), int(tok[4])
            arr = np.array([[int(x) for x in take().split()] for _ in range(nnz)], dtype=np.int64).reshape(nnz, 4)
            tensors.append(PairTensor(len(bases[i][2]), den, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]))
        rows = []
        for j in range(n_rows):
            rest = keyed("row")
            rows += load_constraints(rest.partition(" ")[2], l)
        if take().strip() != "end":
            raise FormatError("missing end marker")
    except FormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed problem file near line {pos}: {exc}") from None
    return ProblemFile(mode, l, family, h_list, bases, d, tensors, rows)
