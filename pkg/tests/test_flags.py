import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from cubeflag.colouring import (
    BLUE,
    EMPTY_FAMILY,
    RED,
    CubeColouring,
    Mode,
    apply_map,
    canonical_form,
    density,
    grey_project,
    is_f_free,
    n_free,
)
from cubeflag.cube import enumerate_embeddings, symmetry_group
from cubeflag.flags import (
    FlagType,
    assemble_problem,
    build_bases,
    check_averaging_identity,
    default_shapes,
    direct_pair_expectation,
    enumerate_flags,
    enumerate_h,
    enumerate_types,
    p_density,
    pair_coefficient,
    subcube_distribution,
    type_embedding,
)
from cubeflag.kernels import CapacityError

from helpers import family, random_free_host


def brute_classes(mode, n, fam):
    group = symmetry_group(n, mode.fixed_dirs)
    seen = set()
    for code in range(1 << n_free(mode, n)):
        c = CubeColouring.from_code(mode, n, code)
        if is_f_free(c, fam):
            seen.add(min(apply_map(c, g).word for g in group))
    return seen


def test_enumerate_h_edge_b():
    hs = enumerate_h(Mode.EDGE, 3, family("B"))
    assert len(hs) == 99
    assert [h.word for h in hs] == sorted(h.word for h in hs)
    assert all(canonical_form(h) == h.word for h in hs)


def test_enumerate_h_vertex_l1():
    hs = enumerate_h(Mode.VERTEX, 1, EMPTY_FAMILY)
    oracle = {min(w, w[::-1]) for w in itertools.product((BLUE, RED), repeat=2)}
    assert len(hs) == len(oracle) == 3


@pytest.mark.parametrize(
    "mode,n,name",
    [(Mode.VERTEX, 3, "B3-"), (Mode.VERTEX, 3, "B4B5"), (Mode.EDGE, 3, "B1B2"), (Mode.PARTIAL, 3, "B")],
)
def test_enumerate_h_matches_brute_force(mode, n, name):
    fam = family(name)
    assert {h.word for h in enumerate_h(mode, n, fam)} == brute_classes(mode, n, fam)


def test_enumerate_h_partial_needs_l2():
    with pytest.raises(ValueError):
        enumerate_h(Mode.PARTIAL, 1, family("B"))


def test_enumerate_h_capacity():
    with pytest.raises(CapacityError):
        enumerate_h(Mode.EDGE, 5, family("B"))


@pytest.mark.parametrize("mode,l,name", [(Mode.EDGE, 3, "B"), (Mode.VERTEX, 3, "B3")])
def test_h_list_closed_under_recolouring(mode, l, name):
    hs = enumerate_h(mode, l, family(name))
    words = {h.word for h in hs}
    for h in hs:
        for i, x in enumerate(h.word):
            if x == BLUE:
                w = list(h.word)
                w[i] = RED
                assert canonical_form(CubeColouring(mode, l, tuple(w))) in words


def test_enumerate_types():
    assert len(enumerate_types(Mode.VERTEX, 0, EMPTY_FAMILY)) == 2
    assert len(enumerate_types(Mode.EDGE, 1, family("B"))) == 2
    assert len(enumerate_types(Mode.EDGE, 2, family("B"))) == 15
    with pytest.raises(ValueError):
        enumerate_types(Mode.PARTIAL, 0, family("B"))


def test_flags_blue_vertex():
    sigma = FlagType(CubeColouring.parse("vertex 0 B"))
    basis = enumerate_flags(sigma, 1, EMPTY_FAMILY, 2)
    assert [f.cube.letters for f in basis.flags] == ["BB", "BR"]
    red = FlagType(CubeColouring.parse("vertex 0 R"))
    assert len(enumerate_flags(red, 0, EMPTY_FAMILY)) == 1


def test_flags_blue_edge_oracle():
    fam = family("B")
    sigma = FlagType(CubeColouring.parse("edge 1 B"))
    basis = enumerate_flags(sigma, 2, fam, 3)
    theta = type_embedding(1)
    fixing = [g for g in symmetry_group(2, 0) if all(g(theta(i)) == theta(i) for i in range(2))]
    orbits = set()
    for code in range(16):
        c = CubeColouring.from_code(Mode.EDGE, 2, code)
        if c.word[0] != BLUE or not is_f_free(c, fam):
            continue
        orbits.add(min(apply_map(c, g).word for g in fixing))
    assert len(basis) == len(orbits) == 7


def test_flags_m_range():
    sigma = FlagType(CubeColouring.parse("vertex 0 B"))
    with pytest.raises(ValueError):
        enumerate_flags(sigma, 2, EMPTY_FAMILY, 3)


def test_flag_isomorphism_fixes_labels():
    # with two extra directions, flags differing by a swap of them coincide
    sigma = FlagType(CubeColouring.parse("vertex 0 B"))
    basis = enumerate_flags(sigma, 2, EMPTY_FAMILY, 4)
    assert len(basis) == 6
    a = CubeColouring.parse("vertex 2 BRBB")
    b = CubeColouring.parse("vertex 2 BBRB")
    assert basis.index_of(a) == basis.index_of(b)


def test_p_density_examples():
    blue_edge = CubeColouring.parse("vertex 1 BB")
    assert p_density(blue_edge, CubeColouring.uniform(Mode.VERTEX, 2)) == 1
    assert p_density(blue_edge, CubeColouring.parse("vertex 2 RBBB")) == Fraction(1, 2)
    with pytest.raises(ValueError):
        p_density(CubeColouring.uniform(Mode.VERTEX, 3), blue_edge)


def test_p_density_partial_oracle():
    # direct: every (subcube, grey direction) pair, projected and compared up to partial isomorphism
    rng = random.Random(2)
    G = CubeColouring.from_code(Mode.EDGE, 4, rng.randrange(1 << 32))
    H = grey_project(CubeColouring.from_code(Mode.EDGE, 3, 0b101100111010), 1)
    target = canonical_form(H)
    hits = total = 0
    for e in enumerate_embeddings(4, 3):
        if list(e.dirs[1:]) != sorted(e.dirs[1:]):
            continue
        sub = [G.word[_edge(e, d, u)] for d, u in _local_edges(3)]
        c = grey_project(CubeColouring(Mode.EDGE, 3, tuple(sub)), 1)
        total += 1
        hits += canonical_form(c) == target
    # each subcube appears once per grey direction and each of its 8 base choices
    assert p_density(H, G) == Fraction(hits, total)


def _local_edges(n):
    from cubeflag.cube import edge_list

    return [(d, u) for d, u, _ in edge_list(n)]


def _edge(e, d, u):
    from cubeflag.cube import edge_index_uv

    return edge_index_uv(e(u), e(u | 1 << d), 4)


@pytest.mark.parametrize(
    "mode,l,name,dim",
    [(Mode.VERTEX, 3, "B3-", 5), (Mode.EDGE, 3, "B", 5), (Mode.PARTIAL, 3, "B1B2", 4), (Mode.VERTEX, 2, "empty", 4)],
)
def test_partition_of_unity(mode, l, name, dim):
    fam = family(name)
    rng = random.Random(l * 31 + dim)
    codes = {h.code for h in enumerate_h(mode, l, fam)}
    host_mode = Mode.EDGE if mode is Mode.PARTIAL else mode
    for _ in range(10):
        G = random_free_host(host_mode, dim, fam, rng)
        dist = subcube_distribution(G, mode, l)
        assert sum(dist.values()) == 1
        assert set(dist) <= codes


def vertex_problem():
    sigma = FlagType(CubeColouring.parse("vertex 0 B"))
    basis = enumerate_flags(sigma, 1, EMPTY_FAMILY, 2)
    return basis


def test_pair_coefficient_examples():
    basis = vertex_problem()
    a = basis.index_of(CubeColouring.parse("vertex 1 BB"))
    assert pair_coefficient(basis, a, a, CubeColouring.uniform(Mode.VERTEX, 2), 2) == 1
    assert pair_coefficient(basis, a, a, CubeColouring.parse("vertex 2 RBBB"), 2) == Fraction(1, 4)
    # no vertex of an all-red host induces the blue type
    red = CubeColouring.uniform(Mode.VERTEX, 2, RED)
    assert all(pair_coefficient(basis, x, y, red, 2) == 0 for x in range(2) for y in range(2))


def test_pair_coefficient_matches_direct_count():
    basis = vertex_problem()
    rng = random.Random(4)
    for _ in range(10):
        H = CubeColouring.from_code(Mode.VERTEX, 2, rng.randrange(16))
        for a in range(2):
            for b in range(2):
                assert pair_coefficient(basis, a, b, H, 2) == direct_pair_expectation(basis, a, b, H)


@pytest.mark.parametrize("mode,l,name", [(Mode.EDGE, 3, "B"), (Mode.VERTEX, 3, "B3-"), (Mode.PARTIAL, 3, "B")])
def test_tensor_symmetry_and_range(mode, l, name):
    fam = family(name)
    problem = assemble_problem(mode, l, fam, build_bases(mode, l, fam))
    for t in problem.tensors:
        dense = {}
        for h, a, b, c in zip(t.h, t.a, t.b, t.count):
            dense[(int(h), int(a), int(b))] = int(c)
        for (h, a, b), c in dense.items():
            assert dense.get((h, b, a)) == c
            assert 0 < c <= t.denominator
        sums = np.zeros(len(problem.h_list), dtype=np.int64)
        np.add.at(sums, t.h, t.count)
        assert np.all(sums <= t.denominator)


def test_default_shapes():
    assert default_shapes(Mode.EDGE, 3) == [(0, 1), (1, 2)]
    assert default_shapes(Mode.VERTEX, 3) == [(0, 1), (1, 2)]
    assert default_shapes(Mode.PARTIAL, 4) == [(1, 2), (2, 3)]


def test_assemble_examples():
    p = assemble_problem(Mode.VERTEX, 1, EMPTY_FAMILY)
    assert p.d == [1, Fraction(1, 2), 0]
    fam = family("B")
    p = assemble_problem(Mode.EDGE, 3, fam)
    oracle = max(
        density(c)
        for c in (CubeColouring.from_code(Mode.EDGE, 3, code) for code in range(1 << 12))
        if is_f_free(c, fam)
    )
    assert max(p.d) == oracle
    p = assemble_problem(Mode.VERTEX, 3, family("B3-"))
    assert len(p.h_list) == 20 and max(p.d) == Fraction(3, 4)


def test_b3minus_averaging_oracle():
    # every 7-blue Q_3 contains B3-, no 6-blue one does
    fam = family("B3-")
    for code in range(256):
        c = CubeColouring.from_code(Mode.VERTEX, 3, code)
        if c.blue_count() >= 7:
            assert not is_f_free(c, fam)
        elif c.blue_count() == 6:
            assert is_f_free(c, fam)


def test_assemble_rejects():
    with pytest.raises(ValueError):
        assemble_problem(Mode.PARTIAL, 1, family("B"))
    sigma = FlagType(CubeColouring.parse("vertex 0 B"))
    too_big = enumerate_flags(sigma, 2, EMPTY_FAMILY)
    with pytest.raises(ValueError):
        assemble_problem(Mode.VERTEX, 3, EMPTY_FAMILY, [too_big])


def test_averaging_identity_all_blue():
    fam = EMPTY_FAMILY
    bases = build_bases(Mode.VERTEX, 3, fam)
    problem = assemble_problem(Mode.VERTEX, 3, fam, bases)
    G = CubeColouring.uniform(Mode.VERTEX, 4)
    for basis in bases:
        assert check_averaging_identity(basis, 0, len(basis) - 1, G, problem)


def test_averaging_identity_edge_hosts():
    fam = family("B")
    bases = build_bases(Mode.EDGE, 3, fam)
    problem = assemble_problem(Mode.EDGE, 3, fam, bases)
    rng = random.Random(9)
    for _ in range(15):
        G = random_free_host(Mode.EDGE, 4, fam, rng)
        basis = rng.choice(bases)
        a, b = rng.randrange(len(basis)), rng.randrange(len(basis))
        assert check_averaging_identity(basis, a, b, G, problem)


def test_averaging_identity_vertex_q5():
    fam = family("B3")
    bases = build_bases(Mode.VERTEX, 3, fam)
    problem = assemble_problem(Mode.VERTEX, 3, fam, bases)
    rng = random.Random(10)
    for _ in range(4):
        G = random_free_host(Mode.VERTEX, 5, fam, rng)
        basis = bases[-1]
        a, b = rng.randrange(len(basis)), rng.randrange(len(basis))
        assert check_averaging_identity(basis, a, b, G, problem)


def test_averaging_identity_partial():
    fam = family("B")
    bases = build_bases(Mode.PARTIAL, 3, fam)
    problem = assemble_problem(Mode.PARTIAL, 3, fam, bases)
    rng = random.Random(12)
    for _ in range(4):
        G = random_free_host(Mode.EDGE, 4, fam, rng)
        basis = bases[0]
        a, b = rng.randrange(len(basis)), rng.randrange(len(basis))
        assert check_averaging_identity(basis, a, b, G, problem)


def test_averaging_identity_detects_error():
    fam = family("B")
    bases = build_bases(Mode.EDGE, 3, fam)
    problem = assemble_problem(Mode.EDGE, 3, fam, bases)
    t = problem.tensors[1]
    t.count = t.count.copy()
    t.count[:] += 1
    G = random_free_host(Mode.EDGE, 4, fam, random.Random(1))
    assert not all(
        check_averaging_identity(bases[1], a, b, G, problem) for a in range(len(bases[1])) for b in range(len(bases[1]))
    )
