"""Sparse SDPA (.dat-s) emission, solver subprocess control, solution parsing.

The program handed to the solver is

    maximize  -t
    subject to  sum_i <A_iH, Q_i> + s_H + sum_j a_jH mu_j - t = -d(H)   for every H
                Q_i PSD, s_H >= 0,

with the free variables ``t`` and ``mu_j`` split as differences of
nonnegative diagonal entries.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .flags import DensityProblem


class SolverError(RuntimeError):
    pass


class SolverNotFound(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class SolverFailed(SolverError):
    def __init__(self, returncode: int, stderr: str = ""):
        super().__init__(f"solver exited with status {returncode}: {stderr.strip()[-400:]}")
        self.returncode = returncode


class SolutionFormatError(ValueError):
    pass


DEFAULT_SOLVER = f"{shlex.quote(sys.executable)} -m cubeflag.sdpsolve {{in}} {{out}}"


@dataclass(frozen=True)
class SdpLayout:
    q_sizes: tuple[int, ...]
    n_h: int
    n_mu: int

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return self.q_sizes + (-self.n_h, -(2 + 2 * self.n_mu))

    @property
    def slack_block(self) -> int:
        return len(self.q_sizes) + 1

    @property
    def scalar_block(self) -> int:
        return len(self.q_sizes) + 2

    @classmethod
    def for_problem(cls, problem: DensityProblem) -> SdpLayout:
        return cls(tuple(len(b) for b in problem.bases), len(problem.h_list), len(problem.constraints))


@dataclass
class SparseSDP:
    """An SDPA sparse problem with entries ``(matno, block, i, j, value)``, 1-based."""

    block_sizes: tuple[int, ...]
    rhs: list[float]
    entries: list[tuple[int, int, int, int, float]] = field(default_factory=list)

    @property
    def n_constraints(self) -> int:
        return len(self.rhs)

    def dumps(self) -> str:
        lines = [
            str(self.n_constraints),
            str(len(self.block_sizes)),
            " ".join(str(b) for b in self.block_sizes),
            " ".join(_num(x) for x in self.rhs),
        ]
        for mat, blk, i, j, v in sorted(self.entries, key=lambda e: e[:4]):
            lines.append(f"{mat} {blk} {i} {j} {_num(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> SparseSDP:
        tokens = [ln.split('"')[0].split("*")[0] for ln in text.splitlines()]
        lines = [ln.replace(",", " ").replace("{", " ").replace("}", " ").strip() for ln in tokens]
        lines = [ln for ln in lines if ln]
        try:
            m = int(lines[0].split()[0])
            nblocks = int(lines[1].split()[0])
            sizes = tuple(int(x) for x in lines[2].split()[:nblocks])
            rhs = [float(x) for x in lines[3].split()[:m]]
            entries = []
            for ln in lines[4:]:
                a, b, i, j, v = ln.split()[:5]
                entries.append((int(a), int(b), int(i), int(j), float(v)))
        except (IndexError, ValueError) as exc:
            raise SolutionFormatError(f"malformed SDPA problem: {exc}") from None
        return cls(sizes, rhs, entries)


def _num(x: float) -> str:
    return format(float(x), ".17g")


def emit_sdp(problem: DensityProblem) -> str:
    if not problem.bases:
        raise ValueError("an SDP needs at least one flag basis")
    return build_sdp(problem).dumps()


def build_sdp(problem: DensityProblem) -> SparseSDP:
    layout = SdpLayout.for_problem(problem)
    sb, cb = layout.slack_block, layout.scalar_block
    entries: list[tuple[int, int, int, int, float]] = [
        (0, cb, 1, 1, -1.0),
        (0, cb, 2, 2, 1.0),
    ]
    for bi, t in enumerate(problem.tensors):
        upper = t.a <= t.b
        den = t.denominator
        for h, a, b, c in zip(t.h[upper], t.a[upper], t.b[upper], t.count[upper]):
            entries.append((int(h) + 1, bi + 1, int(a) + 1, int(b) + 1, float(Fraction(int(c), den))))
    for h in range(layout.n_h):
        entries.append((h + 1, sb, h + 1, h + 1, 1.0))
        entries.append((h + 1, cb, 1, 1, -1.0))
        entries.append((h + 1, cb, 2, 2, 1.0))
    for j, row in enumerate(problem.constraints):
        for h, v in zip(row.index, row.values):
            val = float(Fraction(int(v), row.denominator))
            entries.append((int(h) + 1, cb, 3 + 2 * j, 3 + 2 * j, val))
            entries.append((int(h) + 1, cb, 4 + 2 * j, 4 + 2 * j, -val))
    rhs = [float(-d) for d in problem.d]
    return SparseSDP(layout.block_sizes, rhs, entries)


# -- solver subprocess ----------------------------------------------------------

def run_solver(template: str, in_file, out_file, timeout: float = 3600.0, log_file=None) -> int:
    if "{in}" not in template or "{out}" not in template:
        raise ValueError("solver command template needs {in} and {out} placeholders")
    cmd = template.replace("{in}", shlex.quote(str(in_file))).replace("{out}", shlex.quote(str(out_file)))
    argv = shlex.split(cmd)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError:
        raise SolverNotFound(f"solver not found: {argv[0]}") from None
    except subprocess.TimeoutExpired:
        Path(out_file).unlink(missing_ok=True)
        raise SolverTimeout(f"solver exceeded {timeout} s") from None
    if log_file is not None:
        Path(log_file).write_text(proc.stdout + proc.stderr)
    if proc.returncode != 0:
        raise SolverFailed(proc.returncode, proc.stderr or proc.stdout)
    if not os.path.exists(out_file):
        raise SolutionFormatError("solver finished without writing a solution file")
    return proc.returncode


# -- solutions ----------------------------------------------------------------

@dataclass
class SolverSolution:
    # square arrays for PSD blocks, diagonal vectors for diagonal blocks
    blocks: list[np.ndarray]
    dual: np.ndarray
    objective: float

    def q_blocks(self, layout: SdpLayout) -> list[np.ndarray]:
        return self.blocks[: len(layout.q_sizes)]

    def scalars(self, layout: SdpLayout) -> np.ndarray:
        return self.blocks[layout.scalar_block - 1]

    def t(self, layout: SdpLayout) -> float:
        sc = self.scalars(layout)
        return float(sc[0] - sc[1])

    def mu(self, layout: SdpLayout) -> np.ndarray:
        sc = self.scalars(layout)
        return sc[2::2] - sc[3::2]


def parse_solution(text: str, layout: SdpLayout) -> SolverSolution:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SolutionFormatError("empty solution file")
    try:
        dual = np.array([float(x) for x in lines[0].split()])
    except ValueError as exc:
        raise SolutionFormatError(f"non-numeric dual vector: {exc}") from None
    sizes = layout.block_sizes
    blocks = [np.zeros(-s) if s < 0 else np.zeros((s, s)) for s in sizes]
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 5:
            raise SolutionFormatError(f"malformed solution line: {ln!r}")
        try:
            mat, blk, i, j = (int(x) for x in parts[:4])
            v = float(parts[4])
        except ValueError:
            raise SolutionFormatError(f"non-numeric token in {ln!r}") from None
        if not 1 <= blk <= len(sizes):
            raise SolutionFormatError(f"block index {blk} out of range")
        n = abs(sizes[blk - 1])
        if not (1 <= i <= n and 1 <= j <= n):
            raise SolutionFormatError(f"entry ({i}, {j}) outside block {blk} of size {n}")
        if sizes[blk - 1] < 0 and i != j:
            raise SolutionFormatError(f"off-diagonal entry in diagonal block {blk}")
        if mat != 2:
            continue
        if sizes[blk - 1] < 0:
            blocks[blk - 1][i - 1] = v
            continue
        blocks[blk - 1][i - 1, j - 1] = v
        blocks[blk - 1][j - 1, i - 1] = v
    if dual.size != layout.n_h:
        raise SolutionFormatError(f"dual vector has {dual.size} entries, expected {layout.n_h}")
    sc = blocks[layout.scalar_block - 1]
    return SolverSolution(blocks, dual, float(-(sc[0] - sc[1])))


def bound_residuals(problem: DensityProblem, sol: SolverSolution) -> np.ndarray:
    """Floating d(H) + c_H + alpha_H - t for every H (should be <= ~0)."""
    layout = SdpLayout.for_problem(problem)
    vals = np.array([float(x) for x in problem.d])
    for t, Q in zip(problem.tensors, sol.q_blocks(layout)):
        np.add.at(vals, t.h, t.count * Q[t.a, t.b] / t.denominator)
    for row, mu in zip(problem.constraints, sol.mu(layout)):
        vals[row.index] += mu * row.values / row.denominator
    return vals - sol.t(layout)


def write_solution(path, dual: Sequence[float], blocks: Sequence[np.ndarray], sizes: Sequence[int], slack=None) -> None:
    """Write a CSDP-style solution: dual line, then ``matno block i j value`` entries.

    Diagonal blocks may be given as their diagonal vector.
    """
    out = [" ".join(_num(y) for y in dual)]
    for matno, mats in ((1, slack), (2, blocks)):
        if mats is None:
            continue
        for bi, (X, s) in enumerate(zip(mats, sizes)):
            X = np.asarray(X)
            if s < 0:
                diag = X if X.ndim == 1 else np.diag(X)
                for i in np.flatnonzero(diag):
                    out.append(f"{matno} {bi + 1} {i + 1} {i + 1} {_num(diag[i])}")
                continue
            for i in range(s):
                for j in range(i, s):
                    v = X[i, j]
                    if v != 0:
                        out.append(f"{matno} {bi + 1} {i + 1} {j + 1} {_num(v)}")
    Path(path).write_text("\n".join(out) + "\n")
