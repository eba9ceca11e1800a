"""Inverse envelopes of convolution-dominated matrices beyond the Neumann regime.

A = I + K with K Hermitian, flat off-diagonal envelope and one phase per
diagonal.  The algebra norm of K exceeds 1, so the Neumann series gives no
information, yet ||K|| < 1 keeps every section invertible.  We invert
growing sections and watch the interior envelope of the inverse settle.

    python demos/inverse_envelopes.py
"""
from convdom.algebra import cd_norm, to_dense
from convdom.groups import H3, Z
from convdom.inversion import TestMatrixSpec, envelope_convergence_study, make_test_matrix
from convdom.representations import opnorm_estimate

CASES = [
    (TestMatrixSpec(Z(2, max_radius=70), shape="polynomial", s=0.0, support_radius=3,
                    mass=1.5, phases="toeplitz", hermitian=True), [16, 24, 32]),
    (TestMatrixSpec(H3(max_radius=16), shape="polynomial", s=0.0, support_radius=2,
                    mass=1.4, phases="toeplitz", hermitian=True), [4, 6, 8]),
]


def main():
    for spec, radii in CASES:
        G = spec.group
        K = make_test_matrix(TestMatrixSpec(**{**spec.__dict__, "identity": 0.0}), 1, radii[-1])
        op = opnorm_estimate(to_dense(K, G.ball(radii[-1])))
        print(f"{G.name}: cd_norm(K) = {cd_norm(K):.3f}, ||K|| on B_{radii[-1]} = {op:.3f}")

        rep = envelope_convergence_study(spec, radii, seed=1)
        for n, m, env, t in zip(rep.radii, rep.margins, rep.envelopes, rep.tail_sums):
            head = ", ".join(f"{x:.6f}" for x in t[:4])
            print(f"  radius {n:2d} (margin {m}): |b|_1 = {env.l1_norm():.6f}, tails {head} ...")
        print("  sup-distance between consecutive envelopes:",
              ", ".join(f"{d:.2e}" for d in rep.deltas))
        print(f"  verdict: {rep.verdict}\n")


if __name__ == "__main__":
    main()
