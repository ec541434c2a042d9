"""Families H, types, flag bases and exact pair-density coefficients.

Every flag of dimension ``m`` over a type of dimension ``s`` is stored in
local coordinates: the type occupies directions ``0..s-1`` at base vertex 0
and the remaining ``m - s`` directions are the extra ones. Two flags are
isomorphic iff they differ by a permutation of the extra directions (maps
that fix the labelled type pointwise cannot flip any bit).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .colouring import (
    GREY,
    CubeColouring,
    ForbiddenFamily,
    Mode,
    canonical_code,
    contains_subcube,
    density,
    free_position_masks,
    group_tables,
    grey_to_red,
    induced,
    n_free,
    n_grey,
    n_positions,
    position_map,
)
from .cube import (
    LabelledEmbedding,
    SignedPermutation,
    edge_index_uv,
    edge_list,
    enumerate_embeddings,
    enumerate_subcubes,
)
from .kernels import CapacityError

H_MODES = (Mode.VERTEX, Mode.EDGE, Mode.PARTIAL)


def _min_dim(mode: Mode) -> int:
    return 2 if mode is Mode.PARTIAL else 1


# -- H families ---------------------------------------------------------------

def class_codes(mode: Mode, l: int, fam: ForbiddenFamily, fixed_dirs: int | None = None) -> np.ndarray:
    """Canonical packed codes of the F-free classes of ``mode`` colourings of Q_l."""
    mode = Mode(mode)
    nbits = n_free(mode, l)
    if nbits > 62:
        raise CapacityError(f"{mode.value} Q_{l} has {nbits} free positions")
    tables = group_tables(mode, l, fixed_dirs)
    masks = free_position_masks(mode, l, fam)
    return kernels.orbit_representatives(nbits, tables, masks)


def enumerate_h(mode: Mode, l: int, fam: ForbiddenFamily) -> list[CubeColouring]:
    """One canonical representative per isomorphism class of F-free Q_l colourings."""
    mode = Mode(mode)
    if mode not in H_MODES:
        raise ValueError(f"H families are vertex, edge or partial, not {mode.value}")
    if l < _min_dim(mode):
        raise ValueError(f"{mode.value} H families need l >= {_min_dim(mode)}")
    return [CubeColouring.from_code(mode, l, c) for c in class_codes(mode, l, fam)]


# -- types and flags ------------------------------------------------------------

@dataclass(frozen=True)
class FlagType:
    cube: CubeColouring

    @property
    def dim(self) -> int:
        return self.cube.dim

    @property
    def mode(self) -> Mode:
        return self.cube.mode


@dataclass(frozen=True)
class Flag:
    cube: CubeColouring
    theta: LabelledEmbedding

    @property
    def dim(self) -> int:
        return self.cube.dim


def enumerate_types(mode: Mode, s: int, fam: ForbiddenFamily) -> list[FlagType]:
    """All F-free fully labelled colourings of Q_s (labels distinguish, no quotient)."""
    mode = Mode(mode)
    if mode is Mode.PARTIAL and s < 1:
        raise ValueError("partial types have dimension >= 1")
    f = n_free(mode, s)
    codes = np.arange(1 << f, dtype=np.int64)
    codes = codes[kernels.free_mask(codes, free_position_masks(mode, s, fam))]
    return [FlagType(CubeColouring.from_code(mode, s, int(c))) for c in codes]


def type_embedding(s: int) -> LabelledEmbedding:
    return LabelledEmbedding(0, tuple(range(s)))


def flag_positions(mode: Mode, s: int, m: int) -> list[int]:
    """Positions of the type subcube inside the local Q_m, in type order."""
    emb = type_embedding(s)
    img = emb.image()
    if mode is Mode.VERTEX:
        return img
    return [edge_index_uv(img[u], img[v], m) for _, u, v in edge_list(s)]


@lru_cache(maxsize=None)
def _flag_tables(mode: Mode, s: int, m: int) -> np.ndarray:
    grey = n_grey(mode, m)
    rows = []
    for tail in itertools.permutations(range(s, m)):
        g = SignedPermutation(tuple(range(s)) + tail, 0)
        pe = position_map(mode, g)
        rows.append([p - grey for p in pe[grey:]])
    return kernels.build_tables(np.array(rows, dtype=np.int64), n_free(mode, m))


@dataclass
class FlagBasis:
    """The F-free sigma-flags of dimension m, plus a packed-code lookup table."""

    sigma: FlagType
    m: int
    flags: tuple[Flag, ...]
    lookup: np.ndarray = field(repr=False)

    @property
    def mode(self) -> Mode:
        return self.sigma.mode

    @property
    def s(self) -> int:
        return self.sigma.dim

    def __len__(self) -> int:
        return len(self.flags)

    def index_of(self, cube: CubeColouring) -> int:
        return int(self.lookup[cube.code])


def enumerate_flags(sigma: FlagType, m: int, fam: ForbiddenFamily, l: int | None = None) -> FlagBasis:
    mode, s = sigma.mode, sigma.dim
    if m < s or (l is not None and 2 * m > l + s):
        raise ValueError(f"flag dimension {m} out of range for type dim {s}, l={l}")
    f = n_free(mode, m)
    if f > 24:
        raise CapacityError(f"flags of {mode.value} Q_{m} have {f} free positions")
    grey = n_grey(mode, m)
    codes = np.arange(1 << f, dtype=np.int64)
    ok = kernels.free_mask(codes, free_position_masks(mode, m, fam))
    # type part must reproduce sigma exactly
    tpos = flag_positions(mode, s, m)
    for k, p in enumerate(tpos):
        want = sigma.cube.word[k]
        if p < grey:
            continue
        bit = (codes >> (f - 1 - (p - grey))) & 1
        ok &= bit == want
    canon = kernels.canonical_codes(codes, _flag_tables(mode, s, m))
    reps = np.unique(canon[ok])
    lookup = np.full(1 << f, -1, dtype=np.int64)
    index = {int(c): i for i, c in enumerate(reps)}
    lookup[ok] = [index[int(c)] for c in canon[ok]]
    theta = type_embedding(s)
    flags = tuple(Flag(CubeColouring.from_code(mode, m, int(c)), theta) for c in reps)
    return FlagBasis(sigma, m, flags, lookup)


# -- subcube densities ----------------------------------------------------------

def _labelled_subcubes(host_dim: int, l: int, mode: Mode):
    """Labelled l-subcubes that realise a uniform random (subcube, labelling) pair.

    For partial targets only the choice of the grey direction matters up to
    partial isomorphism, so each subcube appears once per direction.
    """
    for dirs, base in enumerate_subcubes(host_dim, l):
        if mode is Mode.PARTIAL:
            for d in dirs:
                yield LabelledEmbedding(base, (d,) + tuple(x for x in dirs if x != d))
        else:
            yield LabelledEmbedding(base, dirs)


def subcube_distribution(G: CubeColouring, mode: Mode, l: int) -> dict[int, Fraction]:
    """Map canonical H code -> p(H;G) over all l-dimensional (labelled) subcubes of G."""
    mode = Mode(mode)
    if l > G.dim:
        raise ValueError("subcube dimension exceeds host dimension")
    if mode is Mode.PARTIAL and G.mode is not Mode.EDGE:
        raise ValueError("partial densities are taken in red/blue edge hosts")
    counts: dict[int, int] = {}
    total = 0
    for emb in _labelled_subcubes(G.dim, l, mode):
        sub = induced(G, emb, mode)
        code = canonical_code(mode, l, sub.code)
        counts[code] = counts.get(code, 0) + 1
        total += 1
    return {c: Fraction(k, total) for c, k in counts.items()}


def p_density(H: CubeColouring, G: CubeColouring) -> Fraction:
    if H.dim > G.dim:
        raise ValueError("H is larger than G")
    dist = subcube_distribution(G, H.mode, H.dim)
    return dist.get(canonical_code(H.mode, H.dim, H.code), Fraction(0))


# -- pair coefficients ----------------------------------------------------------

def _disjoint_pairs(rest: Sequence[int], k: int):
    for a in itertools.combinations(rest, k):
        left = [x for x in rest if x not in a]
        for b in itertools.combinations(left, k):
            yield a, b


def _local_free_positions(mode: Mode, l: int, emb: LabelledEmbedding) -> np.ndarray:
    """Host positions of the free positions of the local cube ``emb``."""
    m = emb.dim
    img = emb.image()
    if mode is Mode.VERTEX:
        pos = img
    else:
        pos = [edge_index_uv(img[u], img[v], l) for _, u, v in edge_list(m)]
    return np.array(pos[n_grey(mode, m):], dtype=np.int64)


@dataclass
class PairTensor:
    """Sparse integer form of A_H[a, b] = count / denominator for every H."""

    size: int
    denominator: int
    h: np.ndarray
    a: np.ndarray
    b: np.ndarray
    count: np.ndarray

    def dense(self, hi: int) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.size for _ in range(self.size)]
        sel = np.nonzero(self.h == hi)[0]
        for k in sel:
            out[int(self.a[k])][int(self.b[k])] = Fraction(int(self.count[k]), self.denominator)
        return out

    def entry(self, hi: int, a: int, b: int) -> Fraction:
        sel = (self.h == hi) & (self.a == a) & (self.b == b)
        return Fraction(int(self.count[sel].sum()), self.denominator)


def colour_matrix(hs: Sequence[CubeColouring]) -> np.ndarray:
    if not hs:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.array([h.word for h in hs], dtype=np.uint8)


def pair_tensor(basis: FlagBasis, l: int, colours: np.ndarray) -> PairTensor:
    """Coefficients E_theta[p(F_a, F_b, theta; H)] for each row of ``colours``."""
    mode, s, m = basis.mode, basis.s, basis.m
    if 2 * m > l + s:
        raise ValueError(f"basis with m={m}, s={s} does not fit in l={l}")
    thetas = enumerate_embeddings(l, s, mode.fixed_dirs)
    f = n_free(mode, m)
    weights = (np.int64(1) << np.arange(f - 1, -1, -1, dtype=np.int64))
    cols = np.asarray(colours, dtype=np.int64)
    nh = cols.shape[0]
    hs, as_, bs = [], [], []
    npairs = 0
    for theta in thetas:
        rest = [d for d in range(l) if d not in theta.dirs]
        pairs = list(_disjoint_pairs(rest, m - s))
        npairs = len(pairs)
        cache: dict[tuple[int, ...], np.ndarray] = {}

        def flag_index(extra):
            if extra not in cache:
                emb = LabelledEmbedding(theta.base, theta.dirs + extra)
                pos = _local_free_positions(mode, l, emb)
                codes = cols[:, pos] @ weights if f else np.zeros(nh, dtype=np.int64)
                cache[extra] = basis.lookup[codes]
            return cache[extra]

        for ea, eb in pairs:
            ia, ib = flag_index(ea), flag_index(eb)
            sel = (ia >= 0) & (ib >= 0)
            idx = np.nonzero(sel)[0]
            hs.append(idx)
            as_.append(ia[idx])
            bs.append(ib[idx])
    k = len(basis)
    if hs:
        h = np.concatenate(hs)
        key = (h * k + np.concatenate(as_)) * k + np.concatenate(bs)
        key, count = np.unique(key, return_counts=True)
    else:
        key = np.zeros(0, dtype=np.int64)
        count = np.zeros(0, dtype=np.int64)
    return PairTensor(
        size=k,
        denominator=len(thetas) * max(npairs, 1),
        h=key // (k * k),
        a=(key // k) % k,
        b=key % k,
        count=count.astype(np.int64),
    )


def pair_coefficient(basis: FlagBasis, a: int, b: int, H: CubeColouring, l: int | None = None) -> Fraction:
    l = H.dim if l is None else l
    if not (0 <= a < len(basis) and 0 <= b < len(basis)):
        raise IndexError("flag index out of range")
    t = pair_tensor(basis, l, colour_matrix([H]))
    return t.entry(0, a, b)


# -- problems -----------------------------------------------------------------

def default_shapes(mode: Mode, l: int) -> list[tuple[int, int]]:
    """(type dimension, flag dimension) pairs used when none are requested.

    Every type dimension whose largest admissible flag dimension is
    non-trivial; partial types start at dimension 1.
    """
    mode = Mode(mode)
    low = 1 if mode is Mode.PARTIAL else 0
    return [(s, (l + s) // 2) for s in range(low, l + 1) if (l + s) // 2 > s]


def build_bases(mode: Mode, l: int, fam: ForbiddenFamily, shapes=None) -> list[FlagBasis]:
    shapes = default_shapes(mode, l) if shapes is None else shapes
    out = []
    for s, m in shapes:
        for sigma in enumerate_types(mode, s, fam):
            basis = enumerate_flags(sigma, m, fam, l)
            if len(basis):
                out.append(basis)
    return out


@dataclass
class DensityProblem:
    mode: Mode
    l: int
    family: ForbiddenFamily
    h_list: list[CubeColouring]
    d: list[Fraction]
    bases: list[FlagBasis]
    tensors: list[PairTensor]
    constraints: list = field(default_factory=list)

    def coefficient(self, i: int, hi: int, a: int, b: int) -> Fraction:
        return self.tensors[i].entry(hi, a, b)


def assemble_problem(mode: Mode, l: int, fam: ForbiddenFamily, bases: Sequence[FlagBasis] = ()) -> DensityProblem:
    mode = Mode(mode)
    if mode is Mode.PARTIAL and l < 2:
        raise ValueError("partial problems need l >= 2")
    for b in bases:
        if 2 * b.m > l + b.s:
            raise ValueError(f"basis (s={b.s}, m={b.m}) does not fit in l={l}")
        if b.mode is not mode:
            raise ValueError("basis mode differs from problem mode")
    hs = enumerate_h(mode, l, fam)
    cols = colour_matrix(hs)
    d = [density(h) for h in hs]
    tensors = [pair_tensor(b, l, cols) for b in bases]
    return DensityProblem(mode, l, fam, hs, d, list(bases), tensors)


# -- independent identity check -------------------------------------------------

def slow_flag_word(R: CubeColouring, s: int) -> tuple[int, ...]:
    """Canonical flag word by brute force over extra-direction permutations."""
    from .colouring import apply_map

    m = R.dim
    best = None
    for tail in itertools.permutations(range(s, m)):
        w = apply_map(R, SignedPermutation(tuple(range(s)) + tail, 0)).word
        if best is None or w < best:
            best = w
    return best


def direct_pair_expectation(basis: FlagBasis, a: int, b: int, G: CubeColouring) -> Fraction:
    """E over theta in Theta_G of p(F_a, F_b, theta; G), by direct enumeration in G."""
    mode, s, m = basis.mode, basis.s, basis.m
    fa, fb = basis.flags[a].cube.word, basis.flags[b].cube.word
    n = G.dim
    hits = 0
    total = 0
    for theta in enumerate_embeddings(n, s):
        rest = [d for d in range(n) if d not in theta.dirs]
        pairs = list(_disjoint_pairs(rest, m - s))
        total += len(pairs)
        for ea, eb in pairs:
            ra = induced(G, LabelledEmbedding(theta.base, theta.dirs + ea), mode)
            rb = induced(G, LabelledEmbedding(theta.base, theta.dirs + eb), mode)
            if slow_flag_word(ra, s) == fa and slow_flag_word(rb, s) == fb:
                hits += 1
    return Fraction(hits, total)


def check_averaging_identity(basis: FlagBasis, a: int, b: int, G: CubeColouring, problem: DensityProblem) -> bool:
    i = next(k for k, x in enumerate(problem.bases) if x is basis)
    dist = subcube_distribution(G, problem.mode, problem.l)
    index = {h.code: hi for hi, h in enumerate(problem.h_list)}
    rhs = Fraction(0)
    for code, p in dist.items():
        rhs += problem.coefficient(i, index[code], a, b) * p
    return direct_pair_expectation(basis, a, b, G) == rhs
