"""Shared test helpers: random hosts and bundled families."""

from __future__ import annotations

import random

from cubeflag.cli import load_family
from cubeflag.colouring import BLUE, RED, CubeColouring, Mode, is_f_free, n_positions


def family(name: str):
    return load_family(name)


def random_free_host(mode: Mode, n: int, fam, rng: random.Random) -> CubeColouring:
    """Greedy random F-free colouring: blues are added in random order while allowed."""
    size = n_positions(mode, n)
    word = [RED] * size
    order = list(range(size))
    rng.shuffle(order)
    stop = rng.randint(0, size)
    for pos in order[:stop]:
        word[pos] = BLUE
        if not is_f_free(CubeColouring(mode, n, tuple(word)), fam):
            word[pos] = RED
    return CubeColouring(mode, n, tuple(word))


def random_host(mode: Mode, n: int, rng: random.Random) -> CubeColouring:
    p = rng.random()
    size = n_positions(mode, n)
    return CubeColouring(mode, n, tuple(BLUE if rng.random() < p else RED for _ in range(size)))


def solve(problem, workdir):
    """Float SDP solution for ``problem`` via the bundled solver adapter."""
    from cubeflag.sdp import DEFAULT_SOLVER, SdpLayout, emit_sdp, parse_solution, run_solver

    layout = SdpLayout.for_problem(problem)
    src, out = workdir / "p.dat-s", workdir / "p.sol"
    src.write_text(emit_sdp(problem))
    run_solver(DEFAULT_SOLVER, src, out, timeout=1800)
    sol = parse_solution(out.read_text(), layout)
    return sol.q_blocks(layout), sol.mu(layout)


def certify(problem, workdir, k=20):
    from cubeflag.certificate import make_certificate

    qs, mu = solve(problem, workdir)
    return make_certificate(problem, qs, mu, k=k)
