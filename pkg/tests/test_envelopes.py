import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convdom.algebra import cd_norm, envelope_of, identity, random_cdmatrix, shift
from convdom.envelopes import (FAIL, PASS, Envelope, TruncationError, Weight, convolve,
                               grs_diagnostic, induced_weight_v, l1_norm, l1w_norm,
                               ratio_condition, sphere_sums, ugrs_diagnostic)
from convdom.groups import H3, Z

WEIGHTS = ["const", "poly:s=2", "poly:s=0.5", "subexp:c=0.5,beta=0.5", "exp:c=0.7"]


def geometric(n=10):
    return Envelope(Z(1, max_radius=20), {(k,): 2.0 ** -abs(k) for k in range(-n, n + 1)})


def test_delta_is_convolution_identity():
    a = geometric()
    assert convolve(Envelope.delta(Z(1)), a).allclose(a)


def test_convolution_at_zero():
    # sum over |k| <= 10 of 4^-|k|
    expected = 1 + (2 / 3) * (1 - 4.0 ** -10)
    assert convolve(geometric(), geometric())[(0,)] == pytest.approx(expected, rel=1e-15)


def test_point_masses_multiply():
    G = H3()
    g, h = (1, 0, 0), (0, 1, 0)
    c = convolve(Envelope.delta(G, g), Envelope.delta(G, h))
    assert c.support() == [G.mul(g, h)]


def test_convolution_refuses_to_truncate():
    G = Z(1, max_radius=12)
    a = Envelope(G, {(10,): 1.0})
    with pytest.raises(TruncationError):
        convolve(a, a)


def test_norms():
    assert l1_norm(Envelope.delta(Z(1))) == 1.0
    assert l1_norm(geometric()) == 1 + 2 * (1 - 2.0 ** -10) == 2.998046875
    w = Weight.parse("poly:s=2")
    assert l1w_norm(Envelope.delta(Z(2), (2, 1)), w) == 16.0


def test_negative_values_rejected():
    with pytest.raises(ValueError):
        Envelope(Z(1), {(0,): -1.0})


def test_l1_of_convolution_is_product():
    rng = np.random.default_rng(1)
    G = H3()
    b = G.ball(2)
    a1 = Envelope.from_array(b, rng.random(len(b)))
    a2 = Envelope.from_array(b, rng.random(len(b)))
    assert l1_norm(convolve(a1, a2)) == pytest.approx(l1_norm(a1) * l1_norm(a2), rel=1e-13)


@pytest.mark.parametrize("text", WEIGHTS + ["prodz2:s=2"])
def test_weight_axioms_on_b6(text):
    w = Weight.parse(text)
    G = Z(2)
    b = G.ball(6)
    vals = w.on_ball(b)
    assert vals[0] == 1.0
    assert np.all(vals >= 1.0)
    for g, v in zip(b.elements, vals):
        assert w(G, G.inv(g)) == pytest.approx(v)
    for i, j in itertools.product(range(0, len(b), 7), range(0, len(b), 5)):
        g, h = b[i], b[j]
        assert w(G, G.mul(g, h)) <= vals[i] * vals[j] * (1 + 1e-12)


def test_weight_string_round_trip():
    for text in WEIGHTS + ["prodz2:s=2"]:
        assert str(Weight.parse(text)) == text


def test_grs_examples():
    assert grs_diagnostic(Weight.parse("const"), Z(1), (1,), 50).verdict == PASS
    d = grs_diagnostic(Weight.parse(f"exp:c={math.log(2)}"), Z(1), (1,), 50)
    assert np.allclose(d.values, 2.0) and d.verdict == FAIL
    d = grs_diagnostic(Weight.parse("poly:s=2"), Z(1), (1,), 1000)
    assert d.values[-1] == pytest.approx(1001 ** (2 / 1000), rel=1e-14)
    assert d.verdict == PASS


@pytest.mark.parametrize("text,verdict", [("poly:s=2", PASS), ("subexp:c=0.5,beta=0.5", PASS),
                                          ("exp:c=0.7", FAIL)])
def test_grs_and_ugrs_verdicts(text, verdict):
    w = Weight.parse(text)
    for G in (Z(1), Z(2), H3()):
        assert grs_diagnostic(w, G, G.generators[0], 1000).verdict == verdict
        assert ugrs_diagnostic(w, G, 1000).verdict == verdict


def test_heisenberg_closed_form_lengths_match_bfs():
    G = H3()
    for g in G.ball(6).elements:
        a, b, c = g
        if c == 0 or c == a * b:
            assert abs(a) + abs(b) == G.ball(6).lengths[G.ball(6).index[g]]


def test_ugrs_enumeration_matches_closed_form():
    w = Weight.parse("poly:s=1.5")
    G = H3()
    a = ugrs_diagnostic(w, G, 6, method="enumerate").values
    b = ugrs_diagnostic(w, G, 6, method="closed").values
    assert np.allclose(a, b, rtol=0, atol=1e-15)


def test_product_weight_closed_form():
    d = ugrs_diagnostic(Weight.parse("prodz2:s=2"), Z(2), 1000)
    n = np.arange(1, 1001)
    assert np.allclose(d.values, (1.0 + n) ** (2 / n))
    assert d.method == "closed" and d.verdict == PASS
    assert ratio_condition(Weight.parse("prodz2:s=2"), Z(2), 50).max_ratio == 1.0


@pytest.mark.parametrize("G", [Z(1), Z(2), H3()], ids=["Z1", "Z2", "H3"])
def test_ratio_is_one_for_length_weights(G):
    for text in ["const", "poly:s=1", "subexp:c=0.5,beta=0.5"]:
        r = ratio_condition(Weight.parse(text), G, 5, C=1.0)
        assert r.max_ratio == 1.0 and r.within


def test_induced_weight():
    v = induced_weight_v(Weight.parse("poly:s=2"), H3(), 5)
    assert [v(n) for n in range(6)] == [(1.0 + n) ** 2 for n in range(6)]
    assert v(-3) == v(3)
    for m in range(-2, 3):
        for n in range(-2, 3):
            assert v(m + n) <= v(m) * v(n)
    assert np.all(induced_weight_v(Weight.parse("const"), Z(2), 4).values == 1.0)


def test_sphere_sums():
    G = Z(2)
    b = sphere_sums(envelope_of(identity(G, 3)))
    assert b[0] == 1.0 and not np.any(b[1:])
    b = sphere_sums(envelope_of(shift(G, (1, 2), 3, 0.5)))
    assert b[3] == 0.5 and math.fsum(b) == 0.5
    rng = np.random.default_rng(0)
    for _ in range(5):
        f = random_cdmatrix(G, 3, 3, rng)
        assert math.fsum(sphere_sums(envelope_of(f))) == pytest.approx(cd_norm(f), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=5, max_size=5),
       st.lists(st.floats(0, 10), min_size=5, max_size=5))
def test_convolution_commutes_on_abelian(x, y):
    b = Z(2).ball(1)
    a1, a2 = Envelope.from_array(b, x), Envelope.from_array(b, y)
    assert convolve(a1, a2).allclose(convolve(a2, a1), rtol=1e-12)
