import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convdom.groups import (F2, H3, GroupError, HypothesisViolation, OutOfRadius, Z, growth_fit,
                            parse_group, product_index)


def test_heisenberg_law():
    G = H3()
    assert G.mul((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    assert G.mul((0, 1, 0), (1, 0, 0)) == (1, 1, 0)
    g = (2, -3, 5)
    assert G.mul(g, G.inv(g)) == G.identity
    assert G.mul(G.inv(g), g) == G.identity


def test_free_group_reduction():
    G = F2()
    assert G.mul((1, 2), (-2, -1)) == ()
    assert G.mul((1,), (2,)) == (1, 2)
    assert G.inv((1, -2, 1)) == (-1, 2, -1)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lattice_ball_sizes(d):
    G = Z(d)
    for n in range(6):
        # direct count over the cube
        count = sum(1 for g in itertools.product(range(-n, n + 1), repeat=d)
                    if sum(map(abs, g)) <= n)
        assert len(G.ball(n)) == count


def test_z2_closed_form():
    assert [len(Z(2).ball(n)) for n in range(1, 7)] == [2 * n * n + 2 * n + 1 for n in range(1, 7)]


def test_heisenberg_ball_sizes_by_independent_bfs():
    # breadth-first search written out separately from the library
    G = H3()
    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]

    def mul(g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    seen = {(0, 0, 0)}
    frontier = [(0, 0, 0)]
    sizes = [1]
    for _ in range(5):
        nxt = []
        for g in frontier:
            for u in gens:
                h = mul(g, u)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
        sizes.append(len(seen))
    assert [len(G.ball(n)) for n in range(6)] == sizes
    assert sizes[:3] == [1, 5, 17]


def test_free_group_ball_sizes():
    G = F2(max_radius=6)
    assert [len(G.ball(n)) for n in range(6)] == [2 * 3 ** n - 1 for n in range(6)]


def test_ball_is_canonically_ordered():
    b = H3().ball(3)
    assert np.all(np.diff(b.lengths) >= 0)
    assert b.elements[0] == (0, 0, 0)
    for i, g in enumerate(b.elements):
        assert b.index[g] == i


def test_word_length_out_of_radius():
    G = H3(max_radius=3)
    with pytest.raises(OutOfRadius):
        G.word_length((0, 0, 50))
    with pytest.raises(OutOfRadius):
        G.ball(4)


def test_central_element_length():
    # the commutator [a, b] = (0, 0, 1) has length 4
    assert H3().word_length((0, 0, 1)) == 4


def test_parse_group_guards_free_group():
    with pytest.raises(HypothesisViolation):
        parse_group("F2")
    assert parse_group("F2", allow_out_of_hypothesis=True).name == "F2"
    with pytest.raises(GroupError):
        parse_group("Q8")


def test_spec_equality_ignores_budget():
    assert Z(2, max_radius=5) == Z(2, max_radius=50)
    assert hash(H3(max_radius=4)) == hash(H3())
    assert Z(1) != Z(2)


def test_element_serialization_round_trip():
    for G, g in [(Z(2), (3, -2)), (H3(), (1, 0, 0)), (F2(), (1, -2, 1))]:
        assert G.parse_element(G.format_element(g)) == g
    assert F2().parse_element("") == ()


@pytest.mark.parametrize("G", [Z(2), H3(), F2(max_radius=6)], ids=["Z2", "H3", "F2"])
def test_product_index_matches_scalar_products(G):
    b = G.ball(2)
    t = G.ball(4)
    idx = product_index(G, b, b, t, invert_right=True)
    for i, g in enumerate(b):
        for j, h in enumerate(b):
            assert t[idx[i, j]] == G.mul(g, G.inv(h))


def test_product_index_marks_outside():
    G = Z(1)
    idx = product_index(G, G.ball(3), G.ball(3), G.ball(2))
    assert idx[G.ball(3).index[(3,)], G.ball(3).index[(3,)]] == -1


heis = st.tuples(*[st.integers(-20, 20)] * 3)


@settings(max_examples=200, deadline=None)
@given(heis, heis, heis)
def test_heisenberg_associativity(a, b, c):
    G = H3()
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))


@settings(max_examples=100, deadline=None)
@given(heis, heis)
def test_heisenberg_vectorized_agrees(a, b):
    G = H3()
    prod = G.mul_arrays(np.array([a]), np.array([b]))[0]
    assert tuple(prod) == G.mul(a, b)
    assert tuple(G.inv_arrays(np.array([a]))[0]) == G.inv(a)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8))
def test_free_group_length_triangle(u, v):
    G = F2(max_radius=20)

    def word(letters):
        g = ()
        for a in letters:
            g = G.mul(g, (a,))
        return g

    g, h = word(u), word(v)
    assert G.word_length(G.mul(g, h)) <= G.word_length(g) + G.word_length(h)
    assert G.word_length(G.inv(g)) == G.word_length(g)


def test_growth_fit_exact_for_z1():
    sizes = [(n, 2 * n + 1) for n in range(2, 13)]
    assert growth_fit(sizes) == pytest.approx(1.0, abs=1e-12)


def test_growth_fit_needs_points():
    with pytest.raises(ValueError):
        growth_fit([(2, 5), (3, 7)])
    assert growth_fit([(1, 3), (2, 5)], min_radius=1, min_points=2) == pytest.approx(1.0)
