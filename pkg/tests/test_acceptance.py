"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected in
the "acceptance criteria" section of the terminal summary.
"""
import math
import time
import warnings

import numpy as np
import pytest

from convdom.algebra import (VectorSection, adjoint, apply, cd_norm, compose, envelope_of,
                             product_region, random_cdmatrix, scale, section_operator, to_dense,
                             toeplitz)
from convdom.envelopes import (FAIL, PASS, Weight, convolve, grs_diagnostic, ratio_condition,
                               ugrs_diagnostic)
from convdom.groups import H3, Z, growth_fit
from convdom.inversion import (CONSISTENT, TestMatrixSpec, envelope_convergence_study,
                               finite_section_inverse, lp_condition_experiment, make_test_matrix,
                               neumann_inverse, weighted_inverse_check)
from convdom.representations import (PowerIterationWarning, check_intertwining,
                                     interior_bivector, opnorm_estimate, specrad_L_estimate)
from convdom.verify import dense_cd_norm

GROUPS = [Z(1), Z(2), H3(max_radius=16)]

# Hermitian specs beyond the Neumann regime: cd_norm(K) > 1 > ||K||.
# One phase per diagonal, flat envelope on 1 <= |z| <= R.
HERMITIAN_SPECS = {
    "Z2": (TestMatrixSpec(Z(2, max_radius=70), shape="polynomial", s=0.0, support_radius=3,
                          mass=1.5, phases="toeplitz", hermitian=True), [16, 24, 32]),
    "H3": (TestMatrixSpec(H3(max_radius=16), shape="polynomial", s=0.0, support_radius=2,
                          mass=1.4, phases="toeplitz", hermitian=True), [4, 6, 8]),
}
SEED = 1


def test_criterion_1_isometry(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for G in GROUPS:
        rng = np.random.default_rng(101)
        b = G.ball(8)
        for _ in range(50):
            f = random_cdmatrix(G, 2, 6, rng)
            dense = dense_cd_norm(to_dense(f, b).entries, b, diag_radius=4)
            worst = max(worst, abs(cd_norm(f) - dense))
    dt = time.perf_counter() - t0
    ok = criterion("1 (isometry)", worst <= 1e-12 and dt < 30,
                   f"max |cd_norm - dense sup-sum| = {worst:.3e} over 150 matrices, {dt:.1f} s")
    assert ok


def test_criterion_2_homomorphism(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for G in GROUPS:
        rng = np.random.default_rng(202)
        b = G.ball(6)
        for _ in range(50):
            h = random_cdmatrix(G, 2, 6, rng)
            f = random_cdmatrix(G, 2, 6, rng)
            mask = product_region(h, f, b).mask()
            assert mask.any()
            diff = np.abs(to_dense(compose(h, f), b).entries
                          - to_dense(h, b).entries @ to_dense(f, b).entries)
            worst = max(worst, float(diff[mask].max()))
    dt = time.perf_counter() - t0
    ok = criterion("2 (homomorphism)", worst <= 1e-10 and dt < 60,
                   f"max diff on certified region = {worst:.3e} over 150 pairs, {dt:.1f} s")
    assert ok


def test_criterion_3_involution(criterion):
    worst = 0.0
    exact = True
    for G in GROUPS:
        rng = np.random.default_rng(303)
        b = G.ball(8)
        for _ in range(50):
            f = random_cdmatrix(G, 2, 6, rng)
            a = adjoint(f)
            exact &= adjoint(a) == f
            D = to_dense(a, b)
            mask = D.certified.mask()
            assert mask.any()
            diff = np.abs(D.entries - to_dense(f, b).entries.conj().T)
            worst = max(worst, float(diff[mask].max()))
    ok = criterion("3 (involution)", worst <= 1e-12 and exact,
                   f"max diff vs conjugate transpose = {worst:.3e}; adjoint twice exact: {exact}")
    assert ok


def test_criterion_4_domination(criterion):
    worst = -math.inf
    rng = np.random.default_rng(404)
    for t in range(100):
        G = GROUPS[t % 3]
        b = G.ball(3)
        A = random_cdmatrix(G, 2, 3, rng)
        c = VectorSection(b, rng.standard_normal(len(b)) + 1j * rng.standard_normal(len(b)))
        y, region = apply(A, c)
        conv = convolve(envelope_of(A), c.abs_envelope())
        bound = np.array([conv[x] for x in b.elements])
        excess = (np.abs(y.values) - bound)[region.rows]
        worst = max(worst, float(excess.max()))
    ok = criterion("4 (domination)", worst <= 1e-12,
                   f"max of |Ac| - a * |c| on certified rows = {worst:.3e} (must be <= 1e-12), "
                   "100 pairs")
    assert ok


def test_criterion_5_intertwining(criterion):
    worst = 0.0
    for G, n, supp in [(Z(1), 5, 2), (Z(2), 5, 2), (H3(max_radius=16), 4, 1)]:
        rng = np.random.default_rng(505)
        b = G.ball(n)
        for _ in range(25):
            f = random_cdmatrix(G, 2, n + 1, rng)
            xi = interior_bivector(b, supp, rng)
            worst = max(worst, check_intertwining(f, xi))
    ok = criterion("5 (intertwining)", worst <= 1e-12,
                   f"max diff on certified pairs = {worst:.3e} over 75 (f, xi)")
    assert ok


@pytest.fixture(scope="module")
def clock():
    return {"criterion 6": 0.0}


def test_criterion_6a_contractive(criterion, clock):
    t0 = time.perf_counter()
    lines = []
    ok = True
    for G, n in [(Z(1, max_radius=200), 40), (H3(max_radius=16), 4)]:
        spec = TestMatrixSpec(G, mass=0.5, support_radius=2)
        A = make_test_matrix(spec, 6, n)
        ball = G.ball(n)
        sec = finite_section_inverse(A, ball)
        K = make_test_matrix(TestMatrixSpec(**{**spec.__dict__, "identity": 0.0}), 6, n)
        S, bound = neumann_inverse(scale(-1, section_operator(K, ball)))
        k = ball.size_of(n - sec.margin)
        diff = float(np.max(np.abs(to_dense(S, ball).entries - sec.inverse.entries)[:k, :k]))
        b_norm = sec.envelope.l1_norm()
        ok &= b_norm <= 2.05 and diff <= 1e-8
        lines.append(f"{G.name}: cd_norm(b) = {b_norm:.4f}, Neumann diff = {diff:.1e}")
    clock["criterion 6"] += time.perf_counter() - t0
    assert criterion("6a (contractive inverse)", ok, "; ".join(lines))


def test_criterion_6b_three_term_oracle(criterion, clock):
    t0 = time.perf_counter()
    G = Z(1, max_radius=240)
    A = toeplitz(G, {(0,): 3.0, (1,): 1.0, (-1,): 1.0}, 60)
    rho = (3 - math.sqrt(5)) / 2
    C = 1 / math.sqrt(5)  # 1 / sqrt(3^2 - 2^2), from the generating function
    _, b = finite_section_inverse(A, G.ball(60), margin=15)
    rel = max(abs(b[(k,)] - C * rho ** abs(k)) / (C * rho ** abs(k)) for k in range(-15, 16))
    clock["criterion 6"] += time.perf_counter() - t0
    assert criterion("6b (3I + shifts oracle)", rel <= 1e-5,
                     f"max relative error vs C rho^|k| for |k| <= 15: {rel:.2e}")


def test_criterion_6c_beyond_neumann(criterion, clock):
    t0 = time.perf_counter()
    lines = []
    ok = True
    for name, (spec, radii) in HERMITIAN_SPECS.items():
        rep = envelope_convergence_study(spec, radii, seed=SEED)
        K = make_test_matrix(TestMatrixSpec(**{**spec.__dict__, "identity": 0.0}), SEED, radii[-1])
        opK = opnorm_estimate(to_dense(K, spec.group.ball(radii[-1])))
        ratio = rep.deltas[-1] / rep.deltas[-2]
        ok &= rep.verdict == CONSISTENT and cd_norm(K) > 1 > opK
        lines.append(f"{name} radii {radii}: verdict {rep.verdict}, delta ratio {ratio:.3f}, "
                     f"cd_norm(K) = {cd_norm(K):.2f}, ||K|| = {opK:.3f}")
    dt = time.perf_counter() - t0
    clock["criterion 6"] += dt
    total = clock["criterion 6"]
    ok &= total < 300
    criterion("6c (Hermitian beyond Neumann)", ok,
              "; ".join(lines) + f"; criterion 6 total {total:.0f} s")
    # informational: an independent phase per entry makes the max-over-pairs
    # envelope creep upward with the section, which the halving rule rejects
    spec, radii = HERMITIAN_SPECS["H3"]
    rnd = envelope_convergence_study(TestMatrixSpec(**{**spec.__dict__, "phases": "random"}),
                                     radii, seed=SEED)
    criterion("6c (per-entry phases, not asserted)", None,
              f"H3 radii {radii}: verdict {rnd.verdict}, "
              f"delta ratio {rnd.deltas[-1] / rnd.deltas[-2]:.3f}")
    assert ok


def test_criterion_7_lp_consistency(criterion):
    lines = []
    ok = True
    for name, (spec, radii) in HERMITIAN_SPECS.items():
        table = lp_condition_experiment(spec, radii=radii, seed=SEED)
        drift = {p: table.drift(p) for p in ("1", "2", "inf")}
        ok &= all(d <= 1.5 for d in drift.values())
        lines.append(f"{name} drift " + ", ".join(f"p={p}: {d:.3f}" for p, d in drift.items()))
    G = Z(1, max_radius=200)
    A = toeplitz(G, {(0,): 1.0, (1,): -0.5}, 40)
    t = lp_condition_experiment(A, ps=(1,), radii=[40])
    cond1 = t.cond["1"][-1]
    ok &= abs(cond1 - 3.0) <= 0.05 and t.norms["1"][-1] == 1.5
    lines.append(f"I - 0.5 lambda(1): cond_1 = {cond1:.6f} at radius 40")
    assert criterion("7 (l^p consistency)", ok, "; ".join(lines))


def test_criterion_8_spectral_identity(criterion):
    G = Z(1, max_radius=400)
    f = toeplitz(G, {(0,): 1.0, (1,): 1.0}, 200)
    est = specrad_L_estimate(compose(adjoint(f), f), 4)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PowerIterationWarning)
        op2 = opnorm_estimate(to_dense(f, G.ball(200))) ** 2
    ratio = est.r[4] / op2
    ok = est.nonincreasing() and ratio <= 1.25 and abs(op2 - 4.0) <= 0.01
    note = " (power iteration hit its cap; last iterate used)" if caught else ""
    assert criterion("8 (spectral identity surrogate)", ok,
                     f"r = {[round(r, 6) for r in est.r]}, opnorm^2 = {op2:.5f}{note}, "
                     f"r_4 / opnorm^2 = {ratio:.5f}")


def test_criterion_9_weight_diagnostics(criterion):
    problems = []
    for G in GROUPS:
        for text, verdict in [("poly:s=2", PASS), ("subexp:c=0.5,beta=0.5", PASS),
                              ("exp:c=0.7", FAIL)]:
            w = Weight.parse(text)
            got = (grs_diagnostic(w, G, G.generators[0], 1000).verdict,
                   ugrs_diagnostic(w, G, 1000).verdict)
            if got != (verdict, verdict):
                problems.append(f"{G.name} {text}: {got}")
        for text in ["const", "poly:s=1", "subexp:c=0.5,beta=0.5"]:
            r = ratio_condition(Weight.parse(text), G, 5, C=1.0)
            if r.max_ratio != 1.0:
                problems.append(f"{G.name} ratio {text}: {r.max_ratio}")
    prod = ugrs_diagnostic(Weight.parse("prodz2:s=2"), Z(2), 1000)
    if (prod.method, prod.verdict) != ("closed", PASS):
        problems.append(f"prodz2: {prod.method} {prod.verdict}")
    assert criterion("9 (weight diagnostics)", not problems,
                     "poly/subexp pass, exp fails, ratio 1, Z2 product weight closed form"
                     if not problems else "; ".join(problems))


@pytest.mark.xfail(strict=True, reason="the stated target 11 omits the k = 0 term; the series "
                                       "sum_{k>=0} 0.5^k (1+k)^2 equals 12")
def test_criterion_9_weighted_value(criterion):
    G = Z(1, max_radius=240)
    A = toeplitz(G, {(0,): 1.0, (1,): -0.5}, 60)
    rep = weighted_inverse_check(A, Weight.parse("poly:s=2"), [20, 30, 40])
    exact = (1 + 0.5) / (1 - 0.5) ** 3
    ok = abs(rep.value - 11.0) <= 0.01
    criterion("9 (weighted value 11 +- 0.01)", ok,
              f"observed {rep.value:.10f} (verdict {rep.verdict}); the closed form "
              f"(1 + x)/(1 - x)^3 at x = 1/2 gives {exact:g}, and 11 is the same sum without "
              f"its k = 0 term, so the target is unreachable by a correct computation")
    assert ok


def test_criterion_10_growth(criterion):
    lines = []
    ok = True
    for G, n_max, D, tol in [(Z(1), 12, 1, 0.1), (Z(2), 8, 2, 0.2), (H3(max_radius=8), 8, 4, 0.4)]:
        fit = growth_fit([(n, len(G.ball(n))) for n in range(1, n_max + 1)])
        ok &= abs(fit - D) <= tol
        lines.append(f"{G.name}: D = {fit:.3f} (target {D} +- {tol})")
    assert criterion("10 (growth exponents)", ok, "; ".join(lines))
