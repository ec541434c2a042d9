"""Bit-level combinatorics of the hypercube Q_n.

Vertices are plain integers in ``[0, 2**n)``. Edges are identified by a
direction ``d`` and a base vertex with bit ``d`` clear; the canonical edge
order lists direction 0 first, then direction 1, and so on, with base
vertices ascending inside each direction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

MAX_DIM = 6


def _check_dim(n: int) -> None:
    if n < 0 or n > 63:
        raise ValueError(f"dimension {n} out of range")


def is_edge(u: int, v: int, n: int) -> bool:
    _check_dim(n)
    if not (0 <= u < (1 << n) and 0 <= v < (1 << n)):
        raise ValueError(f"vertex out of range for Q_{n}: {u}, {v}")
    x = u ^ v
    return x != 0 and x & (x - 1) == 0


def layer(v: int) -> int:
    return bin(v).count("1")


def num_edges(n: int) -> int:
    return n << (n - 1) if n > 0 else 0


def edge_index(d: int, base: int, n: int) -> int:
    """Position of the edge ``(base, base | 1 << d)`` in the canonical edge order."""
    low = base & ((1 << d) - 1)
    high = base >> (d + 1)
    return (d << (n - 1)) | (high << d) | low


def edge_index_uv(u: int, v: int, n: int) -> int:
    x = u ^ v
    d = x.bit_length() - 1
    return edge_index(d, min(u, v), n)


@lru_cache(maxsize=None)
def edge_list(n: int) -> tuple[tuple[int, int, int], ...]:
    """All edges of Q_n as ``(direction, u, v)`` in canonical order (u < v)."""
    out = []
    for d in range(n):
        for i in range(1 << n):
            if not i >> d & 1:
                out.append((d, i, i | (1 << d)))
    return tuple(out)


def enumerate_subcubes(n: int, m: int) -> list[tuple[tuple[int, ...], int]]:
    """Every m-subcube of Q_n once, as ``(directions, base)``."""
    if not 0 <= m <= n:
        raise ValueError(f"cannot place Q_{m} in Q_{n}")
    out = []
    for dirs in itertools.combinations(range(n), m):
        free = sum(1 << d for d in dirs)
        for base in range(1 << n):
            if base & free == 0:
                out.append((dirs, base))
    return out


@dataclass(frozen=True)
class LabelledEmbedding:
    """Injection of the canonically labelled Q_s into a host cube."""

    base: int
    dirs: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.dirs)

    def __call__(self, i: int) -> int:
        v = self.base
        for j, d in enumerate(self.dirs):
            if i >> j & 1:
                v ^= 1 << d
        return v

    def image(self) -> list[int]:
        return [self(i) for i in range(1 << self.dim)]


def enumerate_embeddings(n: int, s: int, fixed_dirs: int = 0) -> list[LabelledEmbedding]:
    if not 0 <= s <= n:
        raise ValueError(f"cannot embed Q_{s} in Q_{n}")
    if fixed_dirs > s:
        raise ValueError("fixed_dirs exceeds embedding dimension")
    head = tuple(range(fixed_dirs))
    rest = range(fixed_dirs, n)
    out = []
    for base in range(1 << n):
        for tail in itertools.permutations(rest, s - fixed_dirs):
            out.append(LabelledEmbedding(base, head + tail))
    return out


@dataclass(frozen=True)
class SignedPermutation:
    """Hypercube automorphism ``v -> perm(v ^ flips)``.

    ``perm[j]`` is the bit position that bit ``j`` is moved to.
    """

    perm: tuple[int, ...]
    flips: int = 0

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")
        if self.flips >> len(self.perm):
            raise ValueError("flip mask wider than dimension")

    @property
    def n(self) -> int:
        return len(self.perm)

    def __call__(self, v: int) -> int:
        w = v ^ self.flips
        out = 0
        for j, p in enumerate(self.perm):
            if w >> j & 1:
                out |= 1 << p
        return out

    def compose(self, other: SignedPermutation) -> SignedPermutation:
        """``self o other``: apply ``other`` first."""
        perm = tuple(self.perm[other.perm[j]] for j in range(self.n))
        # self(other(v)) = P_s(P_o(v ^ f_o) ^ f_s) = P_s P_o (v ^ f_o ^ P_o^-1 f_s)
        inv_o = other.inverse()
        flips = other.flips ^ _permute_bits(self.flips, inv_o.perm)
        return SignedPermutation(perm, flips)

    def inverse(self) -> SignedPermutation:
        inv = [0] * self.n
        for j, p in enumerate(self.perm):
            inv[p] = j
        # v = P^-1(w) ^ flips
        return SignedPermutation(tuple(inv), _permute_bits(self.flips, self.perm))

    def vertex_map(self) -> tuple[int, ...]:
        return tuple(self(v) for v in range(1 << self.n))


def _permute_bits(x: int, perm: tuple[int, ...]) -> int:
    out = 0
    for j, p in enumerate(perm):
        if x >> j & 1:
            out |= 1 << p
    return out


def identity(n: int) -> SignedPermutation:
    return SignedPermutation(tuple(range(n)), 0)


@lru_cache(maxsize=None)
def symmetry_group(n: int, fixed_dirs: int = 0) -> tuple[SignedPermutation, ...]:
    """Signed permutations of Q_n fixing directions ``0..fixed_dirs-1`` pointwise."""
    if fixed_dirs > n or fixed_dirs < 0:
        raise ValueError("fixed_dirs exceeds dimension")
    if n > MAX_DIM:
        raise ValueError(f"groups are only enumerated up to dimension {MAX_DIM}")
    head = tuple(range(fixed_dirs))
    out = []
    for tail in itertools.permutations(range(fixed_dirs, n)):
        for flips in range(1 << n):
            out.append(SignedPermutation(head + tail, flips))
    return tuple(out)


def count_subcubes(n: int, m: int) -> int:
    return comb(n, m) << (n - m)
