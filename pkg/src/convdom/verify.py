"""Randomized property suites over the algebra and its representations.

Each check compares two independent computations of the same quantity
(a diagonal-storage route against a dense-matrix route) on seeded random
inputs and returns the worst discrepancy seen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (CDMatrix, VectorSection, adjoint, apply, cd_norm, compose, envelope_of,
                      product_region, random_cdmatrix, to_dense)
from .envelopes import convolve
from .groups import Ball, GroupSpec, product_index
from .representations import check_intertwining, interior_bivector, opnorm_estimate

# diagonal radius, column radius, bivector ball, bivector support
_SIZES = {"Z1": (2, 6, 5, 2), "Z2": (2, 6, 5, 2), "Z3": (2, 4, 4, 1), "H3": (2, 4, 4, 1),
          "F2": (1, 3, 3, 1)}
LEVELS = {"quick": 5, "full": 25}


def dense_cd_norm(D: np.ndarray, ball: Ball, diag_radius: int | None = None) -> float:
    """``sum_z max_{x y^-1 = z} |D(x, y)|`` straight from a dense section.

    Differences ``x y^-1`` are looked up in ``B_diag_radius`` (default: as
    far as the budget allows up to ``2 * ball.radius``); a nonzero entry
    whose difference falls outside raises ``ValueError``.
    """
    spec = ball.group
    if diag_radius is None:
        diag_radius = min(2 * ball.radius, spec.max_radius)
    dball = spec.ball(diag_radius)
    z = product_index(spec, ball, ball, dball, invert_right=True)
    a = np.abs(D)
    if np.any(a[z < 0]):
        raise ValueError("section has entries beyond the radius budget")
    sup = np.zeros(len(dball))
    np.maximum.at(sup, z[z >= 0], a[z >= 0])
    return math.fsum(sup)


@dataclass
class CheckResult:
    name: str
    trials: int
    worst: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.worst <= self.tol

    def to_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "worst": self.worst, "tol": self.tol,
                "ok": self.ok}


def _section_ball(f: CDMatrix) -> Ball:
    return f.group.ball(f.K + f.N)


def check_isometry(group: GroupSpec, rng, trials: int, K: int, N: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        f = random_cdmatrix(group, K, N, rng)
        b = _section_ball(f)
        worst = max(worst, abs(cd_norm(f) - dense_cd_norm(to_dense(f, b).entries, b)))
    return CheckResult("isometry", trials, worst, 1e-12)


def check_homomorphism(group: GroupSpec, rng, trials: int, K: int, N: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        h = random_cdmatrix(group, K, N, rng)
        f = random_cdmatrix(group, K, N, rng)
        b = group.ball(N + 2 * K)
        mask = product_region(h, f, b).mask()
        lhs = to_dense(compose(h, f), b).entries
        rhs = to_dense(h, b).entries @ to_dense(f, b).entries
        worst = max(worst, float(np.max(np.abs(lhs - rhs)[mask])))
    return CheckResult("homomorphism", trials, worst, 1e-10)


def check_involution(group: GroupSpec, rng, trials: int, K: int, N: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        f = random_cdmatrix(group, K, N, rng)
        a = adjoint(f)
        if adjoint(a) != f:
            worst = math.inf
            break
        b = _section_ball(f)
        diff = np.abs(to_dense(a, b).entries - to_dense(f, b).entries.conj().T)
        worst = max(worst, float(diff.max()))
    return CheckResult("involution", trials, worst, 1e-12)


def check_domination(group: GroupSpec, rng, trials: int, K: int, N: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        A = random_cdmatrix(group, K, N, rng)
        ball = group.ball(N)
        c = VectorSection(ball, rng.standard_normal(len(ball)) + 1j * rng.standard_normal(len(ball)))
        y, region = apply(A, c)
        conv = convolve(envelope_of(A), c.abs_envelope())
        bound = np.array([conv[x] for x in ball.elements])
        excess = (np.abs(y.values) - bound)[region.rows]
        worst = max(worst, float(excess.max(initial=0.0)))
    return CheckResult("domination", trials, worst, 1e-12)


def check_intertwining_batch(group: GroupSpec, rng, trials: int, K: int, N: int,
                             radius: int, support: int) -> CheckResult:
    worst = 0.0
    ball = group.ball(radius)
    for _ in range(trials):
        f = random_cdmatrix(group, K, N, rng)
        xi = interior_bivector(ball, support, rng)
        worst = max(worst, check_intertwining(f, xi))
    return CheckResult("intertwining", trials, worst, 1e-12)


def check_opnorm_bound(group: GroupSpec, rng, trials: int, K: int, N: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        f = random_cdmatrix(group, K, N, rng)
        est = opnorm_estimate(to_dense(f, _section_ball(f)))
        worst = max(worst, est - cd_norm(f))
    return CheckResult("opnorm_bound", trials, max(worst, 0.0), 1e-8)


def run_suite(group: GroupSpec, seed: int = 0, level: str = "quick") -> list[CheckResult]:
    """All property checks on ``group`` with ``LEVELS[level]`` trials each."""
    trials = LEVELS[level]
    K, N, radius, support = _SIZES.get(group.name, (2, 4, 4, 1))
    rng = np.random.default_rng(seed)
    return [
        check_isometry(group, rng, trials, K, N),
        check_homomorphism(group, rng, trials, K, N),
        check_involution(group, rng, trials, K, N),
        check_domination(group, rng, trials, K, N),
        check_intertwining_batch(group, rng, trials, K, N, radius, support),
        check_opnorm_bound(group, rng, trials, K, N),
    ]


__all__ = ["CheckResult", "dense_cd_norm", "run_suite", "check_isometry", "check_homomorphism",
           "check_involution", "check_domination", "check_intertwining_batch",
           "check_opnorm_bound", "LEVELS"]
