"""Exact rational certificates and their verification.

The checking half of this module (``exact_bound``, ``verify`` and the
file parser) works only with integers and :class:`~fractions.Fraction`;
floating point appears solely in ``round_psd`` and ``make_certificate``,
which turn a solver answer into rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .colouring import CubeColouring, ForbiddenFamily, Mode
from .constraints import ConstraintRow, constraint_vectors
from .flags import DensityProblem, FlagBasis, FlagType, enumerate_flags, enumerate_h, pair_tensor, colour_matrix
from .formats import FormatError, ProblemFile, load_problem, parse_rat, rat

CERT_HEADER = "cubeflag-cert v1"
DEFAULT_K = 20
DEFAULT_EPS_EXP = 30
MAX_EPS_EXP = 10


class RoundingError(RuntimeError):
    pass


# -- rounding (floating side) ---------------------------------------------------

def round_psd(Q, k: int = DEFAULT_K, eps_exp: int = DEFAULT_EPS_EXP) -> list[list[Fraction]]:
    """Upper-triangular rational R with R^T R close to Q.

    Q is symmetrised and its negative eigenvalues clipped; the Cholesky factor
    of ``Q + eps I`` is rounded entrywise to multiples of ``2**-k``. eps starts
    at ``2**-eps_exp`` and doubles on failure up to ``2**-10``.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        raise ValueError("round_psd needs a non-empty square matrix")
    if not np.all(np.isfinite(Q)):
        raise ValueError("matrix has non-finite entries")
    Q = (Q + Q.T) / 2
    w, V = np.linalg.eigh(Q)
    Q = (V * np.clip(w, 0, None)) @ V.T
    n = Q.shape[0]
    e = eps_exp
    while True:
        try:
            L = np.linalg.cholesky(Q + 2.0 ** -e * np.eye(n))
            break
        except np.linalg.LinAlgError:
            e -= 1
            if e < MAX_EPS_EXP:
                raise RoundingError("Cholesky failed even with eps = 2^-10") from None
    R = L.T
    scale = 1 << k
    return [[Fraction(int(round(R[i, j] * scale)), scale) if j >= i else Fraction(0) for j in range(n)] for i in range(n)]


def round_scalar(x: float, k: int) -> Fraction:
    return Fraction(int(round(float(x) * (1 << k))), 1 << k)


# -- certificates ------------------------------------------------------------------

@dataclass
class Certificate:
    mode: Mode
    l: int
    family: ForbiddenFamily
    bases: list[tuple[CubeColouring, int]]
    factors: list[tuple[str, list[list[Fraction]]]]
    mu: list[Fraction] = field(default_factory=list)
    bound: Fraction = Fraction(1)
    constraints: bool = False

    def dumps(self) -> str:
        out = [CERT_HEADER, f"mode {self.mode.value}", f"l {self.l}"]
        out += [f"forbid {m.text()}" for m in self.family]
        out.append(f"constraints {int(self.constraints)}")
        for i, (sigma, m) in enumerate(self.bases):
            out.append(f"basis {i} {sigma.text()} m {m}")
        for i, (kind, M) in enumerate(self.factors):
            n = len(M)
            out.append(f"{kind} {i} {n}")
            for r in range(n):
                out.append(" ".join(rat(x) for x in M[r][r:]))
        out.append("mu" + "".join(" " + rat(x) for x in self.mu))
        out.append(f"bound {rat(self.bound)}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str) -> Certificate:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CERT_HEADER:
            raise FormatError("missing certificate header")
        try:
            pos = 1
            mode = Mode(lines[pos].split()[1]); pos += 1
            l = int(lines[pos].split()[1]); pos += 1
            members = []
            while lines[pos].startswith("forbid "):
                members.append(CubeColouring.parse(lines[pos][7:])); pos += 1
            constraints = bool(int(lines[pos].split()[1])); pos += 1
            bases = []
            while lines[pos].startswith("basis "):
                tok = lines[pos].split()
                bases.append((CubeColouring.parse(" ".join(tok[2:5])), int(tok[6]))); pos += 1
            factors = []
            while lines[pos].split()[0] in ("R", "Q"):
                kind, idx, n = lines[pos].split(); pos += 1
                n = int(n)
                M = [[Fraction(0)] * n for _ in range(n)]
                for r in range(n):
                    vals = [parse_rat(t) for t in lines[pos].split()]; pos += 1
                    if len(vals) != n - r:
                        raise FormatError(f"factor {idx} row {r} has {len(vals)} entries, expected {n - r}")
                    for c, v in enumerate(vals, start=r):
                        M[r][c] = v
                        if kind == "Q":
                            M[c][r] = v
                factors.append((kind, M))
            tok = lines[pos].split(); pos += 1
            if tok[0] != "mu":
                raise FormatError("expected mu line")
            mu = [parse_rat(t) for t in tok[1:]]
            tok = lines[pos].split()
            if tok[0] != "bound":
                raise FormatError("expected bound line")
            bound = parse_rat(tok[1])
        except FormatError:
            raise
        except (IndexError, ValueError) as exc:
            raise FormatError(f"malformed certificate: {exc}") from None
        return cls(mode, l, ForbiddenFamily(tuple(members)), bases, factors, mu, bound, constraints)


# -- exact checking -------------------------------------------------------------------

def ldl_psd(Q: Sequence[Sequence[Fraction]]) -> bool:
    """Exact PSD test by symmetric elimination, pivoting on the first nonzero diagonal."""
    M = [[Fraction(x) for x in row] for row in Q]
    n = len(M)
    if any(M[i][j] != M[j][i] for i in range(n) for j in range(i)):
        return False
    alive = list(range(n))
    while alive:
        if any(M[i][i] < 0 for i in alive):
            return False
        piv = next((i for i in alive if M[i][i] != 0), None)
        if piv is None:
            return all(M[i][j] == 0 for i in alive for j in alive)
        alive.remove(piv)
        p = M[piv][piv]
        for i in alive:
            f = M[i][piv] / p
            if f:
                for j in alive:
                    M[i][j] -= f * M[piv][j]
    return True


def _integer_gram(kind: str, M: list[list[Fraction]]) -> tuple[list[list[int]], int]:
    """(Qint, scale) with Q = Qint / scale; Q = R^T R for factors."""
    n = len(M)
    den = 1
    for row in M:
        for x in row:
            den = lcm(den, x.denominator)
    I = [[int(x * den) for x in row] for row in M]
    if kind == "Q":
        return I, den
    if any(I[i][j] for i in range(n) for j in range(i)):
        raise FormatError("R factor is not upper triangular")
    G = [[sum(I[r][a] * I[r][b] for r in range(min(a, b) + 1)) for b in range(n)] for a in range(n)]
    return G, den * den


def _total_positions(mode: Mode, l: int) -> int:
    from .colouring import n_free

    return n_free(mode, l)


def exact_bound_parts(
    mode: Mode,
    l: int,
    h_list: Sequence[CubeColouring],
    bases: Sequence[FlagBasis],
    rows: Sequence[ConstraintRow],
    cert: Certificate,
) -> tuple[Fraction, int]:
    """max_H d(H) + c_H + alpha_H with everything recomputed from ``h_list``."""
    if len(cert.factors) != len(bases):
        raise ValueError(f"certificate has {len(cert.factors)} blocks, problem has {len(bases)}")
    if len(cert.mu) != len(rows):
        raise ValueError(f"certificate has {len(cert.mu)} multipliers, problem has {len(rows)} rows")
    nh = len(h_list)
    total = _total_positions(mode, l)
    blue = np.array([h.blue_count() for h in h_list], dtype=object)
    cols = colour_matrix(list(h_list))
    parts = []  # (numerators per H as object array, denominator)
    for basis, (kind, M) in zip(bases, cert.factors):
        if len(M) != len(basis):
            raise ValueError(f"block of size {len(M)} for a basis of {len(basis)} flags")
        G, scale = _integer_gram(kind, M)
        t = pair_tensor(basis, l, cols)
        Gobj = np.empty((len(G), len(G)), dtype=object)
        for a in range(len(G)):
            for b in range(len(G)):
                Gobj[a, b] = G[a][b]
        num = np.zeros(nh, dtype=object)
        if len(t.count):
            vals = t.count.astype(object) * Gobj[t.a, t.b]
            np.add.at(num, t.h, vals)
        parts.append((num, t.denominator * scale))
    if rows:
        mden = 1
        for x in cert.mu:
            mden = lcm(mden, x.denominator)
        num = np.zeros(nh, dtype=object)
        for mu, row in zip(cert.mu, rows):
            if row.denominator != l - 1:
                raise ValueError("constraint row with unexpected denominator")
            mi = int(mu * mden)
            if mi:
                np.add.at(num, row.index, row.values.astype(object) * mi)
        parts.append((num, mden * (l - 1)))
    L = total
    for _, den in parts:
        L = lcm(L, den)
    acc = blue * (L // total)
    for num, den in parts:
        acc = acc + num * (L // den)
    best = max(range(nh), key=lambda i: acc[i])
    return Fraction(int(acc[best]), L), best


def exact_bound(problem: DensityProblem, cert: Certificate) -> Fraction:
    """Certified bound, recomputing coefficients from ``problem.h_list`` and fresh bases."""
    bases = [enumerate_flags(FlagType(sigma), m, problem.family, problem.l) for sigma, m in cert.bases]
    rows = constraint_vectors(problem.l, problem.family, problem.h_list) if cert.constraints else []
    return exact_bound_parts(problem.mode, problem.l, problem.h_list, bases, rows, cert)[0]


def make_certificate(problem: DensityProblem, q_blocks, mu=(), k: int = DEFAULT_K, mu_k: int | None = None) -> Certificate:
    factors = [("R", round_psd(Q, k)) for Q in q_blocks]
    mu_k = k + 12 if mu_k is None else mu_k
    mus = [round_scalar(x, mu_k) for x in mu]
    cert = Certificate(
        problem.mode,
        problem.l,
        problem.family,
        [(b.sigma.cube, b.m) for b in problem.bases],
        factors,
        mus,
        Fraction(1),
        bool(problem.constraints),
    )
    cert.bound = exact_bound(problem, cert)
    return cert


def zero_certificate(problem: DensityProblem) -> Certificate:
    factors = [("R", [[Fraction(0)] * len(b) for _ in range(len(b))]) for b in problem.bases]
    cert = Certificate(
        problem.mode,
        problem.l,
        problem.family,
        [(b.sigma.cube, b.m) for b in problem.bases],
        factors,
        [Fraction(0)] * len(problem.constraints),
        Fraction(1),
        bool(problem.constraints),
    )
    cert.bound = exact_bound_parts(problem.mode, problem.l, problem.h_list, problem.bases, problem.constraints, cert)[0]
    return cert


# -- verification ---------------------------------------------------------------------

@dataclass
class Report:
    passed: bool
    status: str  # PASS, FAIL or ERROR
    bound: Fraction | None = None
    target: Fraction | None = None
    argmax: CubeColouring | None = None
    reason: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"PASS": 0, "FAIL": 1}.get(self.status, 2)

    def text(self) -> str:
        out = [f"{self.status}" + (f": {self.reason}" if self.reason else "")]
        if self.bound is not None:
            out.append(f"certified bound {rat(self.bound)} (~{decimal_str(self.bound)})")
        if self.target is not None:
            out.append(f"target {rat(self.target)}")
        if self.argmax is not None:
            out.append(f"attained at {self.argmax.text()}")
        out += self.notes
        return "\n".join(out)


def decimal_str(x: Fraction, digits: int = 8) -> str:
    """Decimal rendering truncated toward zero, by integer arithmetic only."""
    sign = "-" if x < 0 else ""
    q = abs(x.numerator) * 10**digits // x.denominator
    whole, frac = divmod(q, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def parse_target(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"target {text!r} is not a rational or decimal") from None


def verify_objects(pf: ProblemFile, cert: Certificate, target: Fraction) -> Report:
    if (cert.mode, cert.l) != (pf.mode, pf.l) or cert.family.key() != pf.family.key():
        return Report(False, "FAIL", target=target, reason="certificate describes a different problem")
    if cert.constraints != bool(pf.rows):
        return Report(False, "FAIL", target=target, reason="constraint usage differs from problem file")
    if [(s.text(), m) for s, m in cert.bases] != [(s.text(), m) for s, m, _ in pf.bases]:
        return Report(False, "FAIL", target=target, reason="basis list differs from problem file")
    if len(cert.factors) != len(cert.bases):
        return Report(False, "FAIL", target=target, reason="factor count differs from basis count")
    fresh = enumerate_h(pf.mode, pf.l, pf.family)
    if [h.word for h in fresh] != [h.word for h in pf.h_list]:
        return Report(False, "FAIL", target=target, reason="stale problem: H list differs from fresh enumeration")
    notes = []
    bases = []
    for i, ((sigma, m), (kind, M)) in enumerate(zip(cert.bases, cert.factors)):
        basis = enumerate_flags(FlagType(sigma), m, pf.family, pf.l)
        bases.append(basis)
        if kind == "R":
            notes.append(f"block {i}: Q = R^T R with R rational upper triangular ({len(M)}x{len(M)}), PSD by construction")
        elif ldl_psd(M):
            notes.append(f"block {i}: direct Q ({len(M)}x{len(M)}) passes exact LDL check")
        else:
            return Report(False, "FAIL", target=target, reason=f"block {i} is not positive semidefinite")
    rows = constraint_vectors(pf.l, pf.family, fresh) if cert.constraints else []
    try:
        bound, arg = exact_bound_parts(pf.mode, pf.l, fresh, bases, rows, cert)
    except ValueError as exc:
        return Report(False, "FAIL", target=target, reason=str(exc))
    if rows:
        notes.append(f"{len(rows)} constraint rows recomputed")
    ok = bound <= target
    return Report(ok, "PASS" if ok else "FAIL", bound, target, fresh[arg], "", notes)


def verify(problem_path, cert_path, target) -> Report:
    target = target if isinstance(target, Fraction) else parse_target(str(target))
    try:
        with open(problem_path) as fh:
            pf = load_problem(fh.read())
        with open(cert_path) as fh:
            cert = Certificate.loads(fh.read())
    except (OSError, FormatError, ValueError) as exc:
        return Report(False, "ERROR", target=target, reason=f"input error: {exc}")
    return verify_objects(pf, cert, target)
