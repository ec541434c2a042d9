"""Red/blue/grey coloured hypercubes: isomorphism, containment, densities."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .cube import (
    LabelledEmbedding,
    SignedPermutation,
    edge_index_uv,
    edge_list,
    enumerate_embeddings,
    num_edges,
    symmetry_group,
)

BLUE, RED, GREY = 0, 1, 2
LETTERS = "BRG"


class Mode(str, Enum):
    VERTEX = "vertex"
    EDGE = "edge"
    PARTIAL = "partial"
    TRIEDGE = "triedge"

    @property
    def fixed_dirs(self) -> int:
        return {"vertex": 0, "edge": 0, "partial": 1, "triedge": 2}[self.value]

    @property
    def on_edges(self) -> bool:
        return self is not Mode.VERTEX


def n_positions(mode: Mode, n: int) -> int:
    return 1 << n if mode is Mode.VERTEX else num_edges(n)


def n_grey(mode: Mode, n: int) -> int:
    """Grey positions form a prefix of the edge order: directions below ``fixed_dirs``."""
    if n == 0:
        return 0
    return min(mode.fixed_dirs, n) << (n - 1)


def n_free(mode: Mode, n: int) -> int:
    return n_positions(mode, n) - n_grey(mode, n)


@dataclass(frozen=True)
class CubeColouring:
    mode: Mode
    dim: int
    word: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "word", tuple(int(x) for x in self.word))
        if len(self.word) != n_positions(self.mode, self.dim):
            raise ValueError(
                f"{self.mode.value} Q_{self.dim} needs {n_positions(self.mode, self.dim)} "
                f"colours, got {len(self.word)}"
            )
        g = n_grey(self.mode, self.dim)
        head, tail = self.word[:g], self.word[g:]
        if any(x != GREY for x in head) or any(x not in (BLUE, RED) for x in tail):
            raise ValueError(f"colour word violates the {self.mode.value} grey pattern")

    # -- text and packed forms --------------------------------------------

    @property
    def letters(self) -> str:
        return "".join(LETTERS[x] for x in self.word)

    def text(self) -> str:
        return f"{self.mode.value} {self.dim} {self.letters or '-'}"

    def __str__(self) -> str:
        return self.text()

    @classmethod
    def parse(cls, text: str) -> CubeColouring:
        parts = text.split()
        if len(parts) != 3:
            raise ValueError(f"malformed cube text: {text!r}")
        mode, dim, word = parts
        try:
            colours = [] if word == "-" else [LETTERS.index(ch) for ch in word.upper()]
        except ValueError:
            raise ValueError(f"unknown colour letter in {word!r}") from None
        return cls(Mode(mode), int(dim), tuple(colours))

    @property
    def code(self) -> int:
        g = n_grey(self.mode, self.dim)
        out = 0
        for x in self.word[g:]:
            out = (out << 1) | x
        return out

    @classmethod
    def from_code(cls, mode: Mode, dim: int, code: int) -> CubeColouring:
        mode = Mode(mode)
        f = n_free(mode, dim)
        tail = tuple((int(code) >> (f - 1 - k)) & 1 for k in range(f))
        return cls(mode, dim, (GREY,) * n_grey(mode, dim) + tail)

    @classmethod
    def uniform(cls, mode: Mode, dim: int, colour: int = BLUE) -> CubeColouring:
        mode = Mode(mode)
        return cls(mode, dim, (GREY,) * n_grey(mode, dim) + (colour,) * n_free(mode, dim))

    def blue_count(self) -> int:
        return sum(1 for x in self.word if x == BLUE)


@dataclass(frozen=True)
class ForbiddenFamily:
    members: tuple[CubeColouring, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        modes = {m.mode for m in self.members}
        if len(modes) > 1:
            raise ValueError("forbidden family mixes colouring modes")
        if modes and modes.pop() not in (Mode.VERTEX, Mode.EDGE):
            raise ValueError("forbidden cubes must be red/blue vertex or edge colourings")

    @property
    def mode(self) -> Mode | None:
        return self.members[0].mode if self.members else None

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def text(self) -> str:
        return "".join(m.text() + "\n" for m in self.members)

    @classmethod
    def parse(cls, text: str) -> ForbiddenFamily:
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        return cls(tuple(CubeColouring.parse(ln) for ln in lines if ln))

    def key(self) -> str:
        return ";".join(sorted(m.text() for m in self.members))


EMPTY_FAMILY = ForbiddenFamily(())


# -- group action -------------------------------------------------------------

def position_map(mode: Mode, g: SignedPermutation) -> list[int]:
    """``out[k]`` is the position that position ``k`` is carried to by ``g``."""
    mode = Mode(mode)
    if mode is Mode.VERTEX:
        return [g(v) for v in range(1 << g.n)]
    return [edge_index_uv(g(u), g(v), g.n) for _, u, v in edge_list(g.n)]


def apply_map(c: CubeColouring, g: SignedPermutation) -> CubeColouring:
    if g.n != c.dim:
        raise ValueError("map dimension does not match cube")
    pe = position_map(c.mode, g)
    grey = n_grey(c.mode, c.dim)
    if grey and sorted(pe[:grey]) != list(range(grey)):
        raise ValueError("map does not preserve the grey edges")
    new = [0] * len(c.word)
    for k, x in enumerate(c.word):
        new[pe[k]] = x
    return CubeColouring(c.mode, c.dim, tuple(new))


def group_for(mode: Mode, n: int) -> tuple[SignedPermutation, ...]:
    return symmetry_group(n, min(Mode(mode).fixed_dirs, n))


@lru_cache(maxsize=None)
def free_position_perms(mode: Mode, n: int, fixed_dirs: int | None = None) -> np.ndarray:
    """Group action restricted to free positions, shape ``(|G|, n_free)``."""
    mode = Mode(mode)
    k = min(mode.fixed_dirs if fixed_dirs is None else fixed_dirs, n)
    grey = n_grey(mode, n)
    rows = []
    for g in symmetry_group(n, k):
        pe = position_map(mode, g)
        rows.append([p - grey for p in pe[grey:]])
    return np.array(rows, dtype=np.int64)


@lru_cache(maxsize=None)
def group_tables(mode: Mode, n: int, fixed_dirs: int | None = None) -> np.ndarray:
    mode = Mode(mode)
    return kernels.build_tables(free_position_perms(mode, n, fixed_dirs), n_free(mode, n))


def canonical_code(mode: Mode, n: int, code: int, fixed_dirs: int | None = None) -> int:
    tables = group_tables(Mode(mode), n, fixed_dirs)
    return int(kernels.canonical_codes(np.array([code]), tables)[0])


def canonical_form(c: CubeColouring) -> tuple[int, ...]:
    """Lexicographically least word in the isomorphism class (B < R < G)."""
    if n_free(c.mode, c.dim) <= 62:
        code = canonical_code(c.mode, c.dim, c.code)
        return CubeColouring.from_code(c.mode, c.dim, code).word
    return min(apply_map(c, g).word for g in group_for(c.mode, c.dim))


def canonical(c: CubeColouring) -> CubeColouring:
    return CubeColouring(c.mode, c.dim, canonical_form(c))


# -- containment ----------------------------------------------------------------

def _family_kind(mode: Mode) -> Mode:
    return Mode.VERTEX if mode is Mode.VERTEX else Mode.EDGE


@lru_cache(maxsize=None)
def embedding_masks(pattern: CubeColouring, host_dim: int) -> tuple[int, ...]:
    """For each labelled embedding, the host positions that must be blue (bit k = position k).

    Duplicates and supersets are removed; an empty tuple means the pattern
    cannot be placed at all.
    """
    p = pattern.dim
    if p > host_dim:
        return ()
    if pattern.mode is Mode.VERTEX:
        blue = [v for v in range(1 << p) if pattern.word[v] == BLUE]
    else:
        blue = [(u, v) for k, (_, u, v) in enumerate(edge_list(p)) if pattern.word[k] == BLUE]
    masks = set()
    for emb in enumerate_embeddings(host_dim, p):
        img = emb.image()
        m = 0
        if pattern.mode is Mode.VERTEX:
            for v in blue:
                m |= 1 << img[v]
        else:
            for u, v in blue:
                m |= 1 << edge_index_uv(img[u], img[v], host_dim)
        masks.add(m)
    return tuple(_minimal_masks(masks))


def _minimal_masks(masks: Iterable[int]) -> list[int]:
    ordered = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    keep: list[int] = []
    for m in ordered:
        if not any(k & m == k for k in keep):
            keep.append(m)
    return keep


def _blue_mask(c: CubeColouring) -> int:
    m = 0
    for k, x in enumerate(c.word):
        if x == BLUE:
            m |= 1 << k
    return m


def contains_subcube(host: CubeColouring, pattern: CubeColouring) -> bool:
    """Whether some labelled copy of ``pattern`` in ``host`` has all its blue elements blue."""
    if _family_kind(host.mode) is not _family_kind(pattern.mode):
        raise ValueError("host and pattern colour different kinds of element")
    if pattern.dim > host.dim:
        return False
    if host.blue_count() < pattern.blue_count():
        return False
    blue = _blue_mask(host)
    return any(m & blue == m for m in embedding_masks(pattern, host.dim))


def grey_to_red(c: CubeColouring) -> CubeColouring:
    if c.mode in (Mode.VERTEX, Mode.EDGE):
        return c
    return CubeColouring(Mode.EDGE, c.dim, tuple(RED if x == GREY else x for x in c.word))


def is_f_free(c: CubeColouring, fam: ForbiddenFamily) -> bool:
    if fam.mode is not None and _family_kind(c.mode) is not fam.mode:
        raise ValueError(f"{c.mode.value} cube tested against {fam.mode.value} family")
    flat = grey_to_red(c)
    return not any(contains_subcube(flat, f) for f in fam)


@lru_cache(maxsize=None)
def free_position_masks(mode: Mode, n: int, fam: ForbiddenFamily) -> np.ndarray:
    """Masks over packed free-position codes: a code is F-free iff it meets every mask.

    A mask bit set means "this position must be blue for a forbidden copy";
    since Red is bit 1, ``code & mask == 0`` flags a forbidden copy.
    """
    mode = Mode(mode)
    if fam.mode is not None and _family_kind(mode) is not fam.mode:
        raise ValueError(f"{mode.value} cubes tested against {fam.mode.value} family")
    grey = n_grey(mode, n)
    grey_bits = (1 << grey) - 1
    f = n_free(mode, n)
    out = []
    for member in fam:
        for m in embedding_masks(member, n):
            if m & grey_bits:
                continue
            packed = 0
            for k in range(grey, grey + f):
                if m >> k & 1:
                    packed |= 1 << (f - 1 - (k - grey))
            out.append(packed)
    return np.array(_minimal_masks(out), dtype=np.int64)


# -- densities and projections -------------------------------------------------

def density(c: CubeColouring) -> Fraction:
    if c.mode is Mode.VERTEX:
        return Fraction(c.blue_count(), 1 << c.dim)
    if c.mode is Mode.EDGE:
        if c.dim < 1:
            raise ValueError("edge density needs dimension >= 1")
        return Fraction(c.blue_count(), num_edges(c.dim))
    if c.mode is Mode.PARTIAL:
        if c.dim < 2:
            raise ValueError("partial density needs dimension >= 2")
        return Fraction(c.blue_count(), n_free(c.mode, c.dim))
    raise ValueError("density is not defined for triedge colourings")


def grey_project(c: CubeColouring, k: int) -> CubeColouring:
    """Grey out directions ``0..k-1``: k=1 gives a partial cube, k=2 a triedge cube."""
    if c.mode is not Mode.EDGE:
        raise ValueError("grey projection applies to red/blue edge colourings")
    if k not in (1, 2):
        raise ValueError("only one or two grey directions are supported")
    mode = Mode.PARTIAL if k == 1 else Mode.TRIEDGE
    g = n_grey(mode, c.dim)
    return CubeColouring(mode, c.dim, (GREY,) * g + c.word[g:])


def induced(host: CubeColouring, emb: LabelledEmbedding, mode: Mode | None = None) -> CubeColouring:
    """Colouring of the labelled subcube ``emb`` of ``host``, in local coordinates."""
    mode = Mode(mode or host.mode)
    s = emb.dim
    img = emb.image()
    if host.mode is Mode.VERTEX:
        word = tuple(host.word[img[v]] for v in range(1 << s))
    else:
        word = tuple(host.word[edge_index_uv(img[u], img[v], host.dim)] for _, u, v in edge_list(s))
    if mode in (Mode.PARTIAL, Mode.TRIEDGE) and host.mode is Mode.EDGE:
        return grey_project(CubeColouring(Mode.EDGE, s, word), mode.fixed_dirs)
    return CubeColouring(mode, s, word)


def word_from_blue(mode: Mode, n: int, blue: Sequence[int]) -> CubeColouring:
    mode = Mode(mode)
    grey = n_grey(mode, n)
    word = [GREY if k < grey else RED for k in range(n_positions(mode, n))]
    for k in blue:
        word[k] = BLUE
    return CubeColouring(mode, n, tuple(word))
