"""Spectral-radius estimates in the algebra and weight diagnostics.

For f = delta_0 + delta_1 on Z the operator f* f has symbol |1 + e^{it}|^2,
whose maximum is 4.  The algebra bounds r_k = ||(f* f)^(2^k)||^(1/2^k)
start at the algebra norm and decrease; here they sit at 4 from the start,
matching the operator norm squared of a large section.

The second part evaluates the GRS and UGRS diagnostics for a few weights
and the weighted norm of the inverse of I - 0.5 lambda(1), where the
inverse is exactly sum_k 0.5^k lambda(k).

    python demos/spectral_and_weights.py
"""
import warnings

from convdom.algebra import adjoint, compose, to_dense, toeplitz
from convdom.envelopes import Weight, grs_diagnostic, ugrs_diagnostic
from convdom.groups import H3, Z
from convdom.inversion import weighted_inverse_check
from convdom.representations import PowerIterationWarning, opnorm_estimate, specrad_L_estimate


def spectral():
    G = Z(1, max_radius=400)
    f = toeplitz(G, {(0,): 1.0, (1,): 1.0}, 200)
    est = specrad_L_estimate(compose(adjoint(f), f), 4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PowerIterationWarning)
        op = opnorm_estimate(to_dense(f, G.ball(200)))
    print("r_k for f* f:", [round(r, 6) for r in est.r])
    print(f"||f||^2 on the section of radius 200: {op * op:.5f}\n")


def weights():
    for text in ["poly:s=2", "subexp:c=0.5,beta=0.5", "exp:c=0.7"]:
        w = Weight.parse(text)
        for G in (Z(1), Z(2), H3()):
            g = grs_diagnostic(w, G, G.generators[0], 1000)
            u = ugrs_diagnostic(w, G, 1000)
            print(f"{text:24s} {G.name}: GRS {g.verdict} ({g.values[-1]:.4f}), "
                  f"UGRS {u.verdict} ({u.method})")
    G = Z(1, max_radius=240)
    A = toeplitz(G, {(0,): 1.0, (1,): -0.5}, 60)
    for text in ["poly:s=2", "exp:c=1.3862943611198906"]:
        rep = weighted_inverse_check(A, Weight.parse(text), [20, 30, 40])
        print(f"weighted norm of the inverse envelope, {text}: "
              f"{[round(v, 6) for v in rep.weighted_norms]} -> {rep.verdict}")


if __name__ == "__main__":
    spectral()
    weights()
