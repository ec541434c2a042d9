"""CSDP-compatible command line front end over the Clarabel conic solver.

    python -m cubeflag.sdpsolve problem.dat-s solution.sol [--verbose]

Reads a sparse SDPA problem (max tr(C X) s.t. tr(A_k X) = b_k, X PSD) and
writes a CSDP-style solution file. Exit status 0 on an optimal or
near-optimal solve, 1 otherwise.

The problem is handed to Clarabel directly: every PSD block becomes a scaled
upper-triangle vector in a PSD cone, every diagonal block a nonnegative cone,
and the equalities a zero cone. Entries are kept in numpy arrays throughout,
so problems with ~10^5 constraints fit in a few GB.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sdp import SparseSDP, write_solution

SQRT2 = np.sqrt(2.0)
_OK = {"Solved", "AlmostSolved"}


@dataclass
class ArraySDP:
    """SDPA data with entries as parallel arrays (1-based, as in the file)."""

    block_sizes: tuple[int, ...]
    rhs: np.ndarray
    mat: np.ndarray
    blk: np.ndarray
    i: np.ndarray
    j: np.ndarray
    val: np.ndarray

    @classmethod
    def from_sparse(cls, sdp: SparseSDP) -> ArraySDP:
        e = np.array(sdp.entries, dtype=float).reshape(-1, 5)
        ints = e[:, :4].astype(np.int64)
        return cls(tuple(sdp.block_sizes), np.array(sdp.rhs, dtype=float), *ints.T, e[:, 4])


def read_sdpa(path) -> ArraySDP:
    """Fast reader for plain whitespace SDPA files; falls back to the general parser."""
    with open(path) as fh:
        text = fh.read()
    lines = text.split("\n", 4)
    try:
        m = int(lines[0].split()[0])
        nblocks = int(lines[1].split()[0])
        sizes = tuple(int(x) for x in lines[2].split()[:nblocks])
        rhs = np.array(lines[3].split()[:m], dtype=float)
        body = lines[4] if len(lines) > 4 else ""
        data = np.loadtxt(io.StringIO(body), dtype=float, ndmin=2) if body.strip() else np.zeros((0, 5))
        if len(sizes) != nblocks or rhs.size != m or data.shape[1] != 5:
            raise ValueError("shape")
    except (ValueError, IndexError):
        return ArraySDP.from_sparse(SparseSDP.loads(text))
    ints = data[:, :4].astype(np.int64)
    return ArraySDP(sizes, rhs, *ints.T, data[:, 4])


def _layout(sizes):
    """Column offset of each block in the solver vector, and the total width."""
    offsets, width = [], 0
    for s in sizes:
        offsets.append(width)
        width += -s if s < 0 else s * (s + 1) // 2
    return offsets, width


def _columns(sdp: ArraySDP, offsets):
    """Solver column and coefficient scale for every entry."""
    lo = np.minimum(sdp.i, sdp.j) - 1
    hi = np.maximum(sdp.i, sdp.j) - 1
    sizes = np.array(sdp.block_sizes)
    diag_block = sizes[sdp.blk - 1] < 0
    base = np.array(offsets)[sdp.blk - 1]
    # upper triangle, column-major: (r, c) with r <= c sits at c(c+1)/2 + r
    col = np.where(diag_block, base + lo, base + hi * (hi + 1) // 2 + lo)
    scale = np.where(diag_block | (lo == hi), 1.0, SQRT2)
    return col, scale


def solve(sdp: ArraySDP, verbose: bool = False):
    import clarabel

    m = sdp.rhs.size
    offsets, width = _layout(sdp.block_sizes)
    col, scale = _columns(sdp, offsets)
    coef = sdp.val * scale

    obj = sdp.mat == 0
    c = np.zeros(width)
    np.add.at(c, col[obj], coef[obj])
    cons = ~obj
    A_eq = sp.csc_matrix((coef[cons], (sdp.mat[cons] - 1, col[cons])), shape=(m, width))
    A = sp.vstack([A_eq, -sp.identity(width, format="csc")], format="csc")
    b = np.concatenate([sdp.rhs, np.zeros(width)])
    cones = [clarabel.ZeroConeT(m)]
    for s in sdp.block_sizes:
        cones.append(clarabel.NonnegativeConeT(-s) if s < 0 else clarabel.PSDTriangleConeT(s))
    P = sp.csc_matrix((width, width))

    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    solution = clarabel.DefaultSolver(P, -c, A, b, cones, settings).solve()
    status = str(solution.status)
    if status not in _OK:
        raise RuntimeError(f"solver status {status}")

    x = np.asarray(solution.x)
    y = np.asarray(solution.z)[:m]
    blocks = [_unpack(x, off, s) for off, s in zip(offsets, sdp.block_sizes)]
    slack = dual_slack(sdp, y)
    return float(c @ x), y, blocks, slack, status


def _unpack(x, off, size):
    if size < 0:
        return x[off : off - size].copy()
    X = np.zeros((size, size))
    r, cc = np.triu_indices(size)
    order = np.argsort(cc * (cc + 1) // 2 + r)
    r, cc = r[order], cc[order]
    v = x[off : off + size * (size + 1) // 2]
    v = np.where(r == cc, v, v / SQRT2)
    X[r, cc] = v
    X[cc, r] = v
    return X


def dual_slack(sdp: ArraySDP, y: np.ndarray):
    """Z = sum_k y_k A_k - C per block; diagonal blocks as vectors."""
    weight = np.concatenate(([-1.0], y))[sdp.mat] * sdp.val
    out = []
    for b, s in enumerate(sdp.block_sizes, start=1):
        sel = sdp.blk == b
        i, j, w = sdp.i[sel] - 1, sdp.j[sel] - 1, weight[sel]
        if s < 0:
            Z = np.zeros(-s)
            np.add.at(Z, i, w)
        else:
            Z = np.zeros((s, s))
            np.add.at(Z, (i, j), w)
            off = i != j
            np.add.at(Z, (j[off], i[off]), w[off])
        out.append(Z)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cubeflag.sdpsolve", description=__doc__.splitlines()[0])
    ap.add_argument("problem")
    ap.add_argument("solution")
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)
    try:
        sdp = read_sdpa(args.problem)
        value, y, blocks, slack, status = solve(sdp, args.verbose)
    except Exception as exc:  # solver failures surface as exit status 1
        print(f"sdpsolve: {exc}", file=sys.stderr)
        return 1
    write_solution(args.solution, y, blocks, sdp.block_sizes, slack)
    print(f"status {status}")
    print(f"Primal objective value: {value:.12e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
