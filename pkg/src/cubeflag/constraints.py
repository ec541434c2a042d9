"""Linear constraints for partial hypercubes from the direction-0/1 swap.

Each triedge class S (directions 0 and 1 grey) gives the row
``a_H = p_phi(S; H) - p_phi(phi_01(S); H)``, which annihilates the subcube
distribution of every red/blue host.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .colouring import (
    CubeColouring,
    ForbiddenFamily,
    Mode,
    apply_map,
    canonical_code,
    group_tables,
    n_free,
    n_grey,
    position_map,
)
from .cube import SignedPermutation
from .flags import class_codes, colour_matrix

_PRIME = 2_147_483_629  # largest prime below 2**31


def phi_swap(a: int, b: int, n: int) -> SignedPermutation:
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"directions {a}, {b} out of range for Q_{n}")
    perm = list(range(n))
    perm[a], perm[b] = perm[b], perm[a]
    return SignedPermutation(tuple(perm), 0)


def enumerate_s(l: int, fam: ForbiddenFamily) -> list[CubeColouring]:
    if l < 2:
        raise ValueError("triedge classes need l >= 2")
    return [CubeColouring.from_code(Mode.TRIEDGE, l, c) for c in class_codes(Mode.TRIEDGE, l, fam)]


def _projected_codes(cols: np.ndarray, l: int) -> np.ndarray:
    """Packed triedge codes of P'(phi_1n(H)) for every row and n = 1..l-1; shape (N, l-1)."""
    grey = n_grey(Mode.TRIEDGE, l)
    f = n_free(Mode.TRIEDGE, l)
    weights = np.int64(1) << np.arange(f - 1, -1, -1, dtype=np.int64)
    out = np.empty((cols.shape[0], l - 1), dtype=np.int64)
    for j, n in enumerate(range(1, l)):
        pe = np.array(position_map(Mode.EDGE, phi_swap(1, n, l)))
        moved = np.empty_like(cols)
        moved[:, pe] = cols
        out[:, j] = moved[:, grey:].astype(np.int64) @ weights
    return out


def p_phi(S: CubeColouring, H: CubeColouring, l: int | None = None) -> Fraction:
    l = H.dim if l is None else l
    if S.dim != l or H.dim != l:
        raise ValueError("S and H must both have dimension l")
    if S.mode is not Mode.TRIEDGE or H.mode is not Mode.PARTIAL:
        raise ValueError("p_phi takes a triedge S and a partial H")
    target = canonical_code(Mode.TRIEDGE, l, S.code)
    codes = _projected_codes(colour_matrix([H]).astype(np.int64), l)[0]
    canon = kernels.canonical_codes(codes, group_tables(Mode.TRIEDGE, l))
    return Fraction(int(np.count_nonzero(canon == target)), l - 1)


@dataclass
class ConstraintRow:
    """Sparse row ``a_H = values[k] / denominator`` at ``h_list[index[k]]``."""

    s_class: CubeColouring
    index: np.ndarray
    values: np.ndarray
    denominator: int

    def dense(self, size: int) -> list[Fraction]:
        out = [Fraction(0)] * size
        for i, v in zip(self.index, self.values):
            out[int(i)] = Fraction(int(v), self.denominator)
        return out

    def evaluate(self, weights: dict[int, Fraction]) -> Fraction:
        """Sum of a_H * weights[H] over the H indices in ``weights``."""
        total = Fraction(0)
        for i, v in zip(self.index, self.values):
            total += weights.get(int(i), 0) * int(v)
        return total / self.denominator


def phi_counts(l: int, fam: ForbiddenFamily, h_list: Sequence[CubeColouring]):
    """S classes and, per H, the canonical class index of each of the l-1 projections."""
    s_codes = class_codes(Mode.TRIEDGE, l, fam)
    index = {int(c): j for j, c in enumerate(s_codes)}
    cols = colour_matrix(list(h_list)).astype(np.int64)
    proj = _projected_codes(cols, l)
    canon = kernels.canonical_codes(proj.ravel(), group_tables(Mode.TRIEDGE, l)).reshape(proj.shape)
    lookup = np.vectorize(index.__getitem__, otypes=[np.int64])
    return s_codes, lookup(canon) if canon.size else canon


def _independent_rows(rows: list[tuple[np.ndarray, np.ndarray]], size: int) -> list[int]:
    """Greedy maximal independent subset, decided on the Gram matrix modulo a prime.

    rank(R_S R^T) equals rank(R_S), and independence mod p implies independence
    over the rationals, so kept rows are always linearly independent.
    """
    if not rows:
        return []
    from scipy.sparse import csr_matrix

    data = np.concatenate([v for _, v in rows])
    cols = np.concatenate([i for i, _ in rows])
    ptr = np.cumsum([0] + [len(i) for i, _ in rows])
    mat = csr_matrix((data.astype(np.int64), cols, ptr), shape=(len(rows), size))
    gram = (mat @ mat.T).toarray().astype(np.int64) % _PRIME
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    keep = []
    for j in range(gram.shape[0]):
        v = gram[j].copy()
        for p, b in zip(pivots, basis):
            if v[p]:
                v = (v - v[p] * b) % _PRIME
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        p = int(nz[0])
        inv = pow(int(v[p]), _PRIME - 2, _PRIME)
        b = (v * inv) % _PRIME
        # keep earlier basis vectors reduced at the new pivot
        for k, old in enumerate(basis):
            if old[p]:
                basis[k] = (old - old[p] * b) % _PRIME
        basis.append(b)
        pivots.append(p)
        keep.append(j)
    return keep


def constraint_vectors(l: int, fam: ForbiddenFamily, h_list: Sequence[CubeColouring]) -> list[ConstraintRow]:
    h_list = list(h_list)
    if any(h.mode is not Mode.PARTIAL or h.dim != l for h in h_list):
        raise ValueError("constraint rows index partial cubes of dimension l")
    s_codes, canon = phi_counts(l, fam, h_list)
    nh = len(h_list)
    swap = phi_swap(0, 1, l)
    tables = group_tables(Mode.TRIEDGE, l)
    counts: dict[int, np.ndarray] = {}
    s_index = {int(c): j for j, c in enumerate(s_codes)}

    def column(j: int) -> np.ndarray:
        if j not in counts:
            counts[j] = np.count_nonzero(canon == j, axis=1).astype(np.int64)
        return counts[j]

    candidates = []
    seen = set()
    for j, code in enumerate(s_codes):
        S = CubeColouring.from_code(Mode.TRIEDGE, l, int(code))
        swapped = apply_map(S, swap)
        j2 = s_index.get(int(kernels.canonical_codes(np.array([swapped.code]), tables)[0]))
        if j2 is None or j2 == j:
            continue
        key = (min(j, j2), max(j, j2))
        if key in seen:
            continue
        seen.add(key)
        vec = column(j) - column(j2)
        nz = np.nonzero(vec)[0]
        if nz.size == 0:
            continue
        vals = vec[nz]
        g = int(np.gcd.reduce(np.abs(vals)))
        if vals[0] < 0:
            g = -g
        candidates.append((S, nz, vals // g, vals))
    # identical rows after normalising sign and scale
    unique = []
    keys = set()
    for S, nz, norm, vals in candidates:
        k = (nz.tobytes(), norm.tobytes())
        if k not in keys:
            keys.add(k)
            unique.append((S, nz, vals))
    keep = _independent_rows([(nz, vals) for _, nz, vals in unique], nh)
    return [ConstraintRow(unique[k][0], unique[k][1], unique[k][2], l - 1) for k in keep]
