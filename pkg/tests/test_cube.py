import itertools
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from cubeflag.cube import (
    LabelledEmbedding,
    SignedPermutation,
    edge_index,
    edge_index_uv,
    edge_list,
    enumerate_embeddings,
    enumerate_subcubes,
    is_edge,
    layer,
    num_edges,
    symmetry_group,
)


@pytest.mark.parametrize("u,v,n,expected", [(0, 1, 2, True), (1, 2, 2, False), (3, 7, 3, True)])
def test_is_edge(u, v, n, expected):
    assert is_edge(u, v, n) is expected


def test_is_edge_range():
    with pytest.raises(ValueError):
        is_edge(0, 4, 2)


def test_q2_edge_set():
    edges = {frozenset((u, v)) for u in range(4) for v in range(4) if is_edge(u, v, 2)}
    assert edges == {frozenset(e) for e in [(0, 1), (0, 2), (1, 3), (2, 3)]}


@pytest.mark.parametrize("v,expected", [(0, 0), (5, 2), (7, 3)])
def test_layer(v, expected):
    assert layer(v) == expected


def test_layer_two_of_q3():
    assert [v for v in range(8) if layer(v) == 2] == [3, 5, 6]


@pytest.mark.parametrize("n,m,count", [(3, 2, 6), (4, 1, 32), (3, 3, 1)])
def test_enumerate_subcubes(n, m, count):
    subs = enumerate_subcubes(n, m)
    assert len(subs) == count == comb(n, m) * 2 ** (n - m)
    assert len(set(subs)) == count
    for dirs, base in subs:
        assert all(not base >> d & 1 for d in dirs)


def test_enumerate_subcubes_rejects():
    with pytest.raises(ValueError):
        enumerate_subcubes(2, 3)


def test_edge_order():
    # direction ascending, then base ascending among vertices with that bit clear
    assert edge_list(2) == ((0, 0, 1), (0, 2, 3), (1, 0, 2), (1, 1, 3))
    for n in range(1, 6):
        edges = edge_list(n)
        assert len(edges) == num_edges(n) == n * 2 ** (n - 1)
        for k, (d, u, v) in enumerate(edges):
            assert v == u + (1 << d)
            assert edge_index(d, u, n) == k == edge_index_uv(v, u, n)
        assert [(d, u) for d, u, _ in edges] == sorted((d, u) for d, u, _ in edges)


@pytest.mark.parametrize("n,s,count", [(3, 1, 24), (3, 3, 48), (2, 0, 4)])
def test_enumerate_embeddings(n, s, count):
    assert len(enumerate_embeddings(n, s, 0)) == count


@pytest.mark.parametrize("n", range(0, 6))
def test_embedding_count_identity(n):
    for s in range(n + 1):
        assert len(enumerate_embeddings(n, s, 0)) == len(enumerate_subcubes(n, s)) * 2**s * factorial(s)


def test_embeddings_fixed_dirs():
    embs = enumerate_embeddings(4, 3, 2)
    assert embs and all(e.dirs[:2] == (0, 1) for e in embs)
    assert len(embs) == 16 * 2
    with pytest.raises(ValueError):
        enumerate_embeddings(3, 1, 2)
    with pytest.raises(ValueError):
        enumerate_embeddings(2, 3, 0)


def test_embedding_action():
    e = LabelledEmbedding(5, (1, 0))
    assert [e(i) for i in range(4)] == [5, 7, 4, 6]
    for i in range(4):
        for j in range(4):
            if is_edge(i, j, 2):
                assert is_edge(e(i), e(j), 3)


@pytest.mark.parametrize("n,k,order", [(3, 0, 48), (4, 1, 96), (4, 2, 32)])
def test_symmetry_group_order(n, k, order):
    assert len(symmetry_group(n, k)) == order


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("k", [0, 1, 2])
def test_group_closed_and_edge_preserving(n, k):
    if k > n:
        pytest.skip("fixed directions exceed dimension")
    group = symmetry_group(n, k)
    maps = {g.vertex_map() for g in group}
    assert len(maps) == len(group)
    for g in group:
        assert all(g.perm[j] == j for j in range(k))
        assert g.inverse().vertex_map() in maps
        for _, u, v in edge_list(n):
            assert is_edge(g(u), g(v), n)
    for g, h in itertools.product(group[:12], group):
        assert g.compose(h).vertex_map() in maps


def test_group_rejects_too_many_fixed():
    with pytest.raises(ValueError):
        symmetry_group(1, 2)


@pytest.mark.parametrize("n", range(0, 5))
def test_full_embeddings_match_group(n):
    from_embs = {tuple(e(v) for v in range(1 << n)) for e in enumerate_embeddings(n, n, 0)}
    assert from_embs == {g.vertex_map() for g in symmetry_group(n, 0)}


@given(st.permutations(range(4)), st.integers(0, 15), st.permutations(range(4)), st.integers(0, 15))
def test_compose_matches_function_composition(p1, f1, p2, f2):
    g, h = SignedPermutation(tuple(p1), f1), SignedPermutation(tuple(p2), f2)
    gh = g.compose(h)
    for v in range(16):
        assert gh(v) == g(h(v))
        assert g.inverse()(g(v)) == v


def test_signed_permutation_validates():
    with pytest.raises(ValueError):
        SignedPermutation((0, 0), 0)
