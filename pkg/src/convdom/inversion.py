"""Inverting convolution-dominated matrices and measuring the inverse envelope.

Two independent routes are provided: the Neumann series in the algebra
(for ``cd_norm(f) < 1``) and dense LU inversion of finite sections.  The
study functions run finite sections over growing radii and report how the
interior envelope of the inverse settles down; their verdicts are
heuristics, not proofs of summability.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .algebra import (CDMatrix, DenseSection, SupportOverflow, add, cd_norm, compose, identity,
                      to_dense)
from .envelopes import Envelope, Weight
from .groups import Ball, GroupSpec, OutOfRadius, product_index
from .representations import PowerIterationWarning, opnorm_estimate


class NotContractive(ValueError):
    """The Neumann series was requested for ``cd_norm(f) >= 1``."""


class SingularSection(ArithmeticError):
    """A finite section is numerically singular."""

    def __init__(self, message, radius=None, rcond=None):
        super().__init__(message)
        self.radius = radius
        self.rcond = rcond


CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"


# -- test matrices --------------------------------------------------------------

PHASES = ("random", "positive", "toeplitz")
SHAPES = ("geometric", "polynomial")


@dataclass(frozen=True)
class TestMatrixSpec:
    """Recipe for ``A = identity * I + K`` with ``|K(x, y)| = a(x y^-1)``.

    The envelope ``a`` lives on ``1 <= |z| <= support_radius`` with shape
    ``rate**|z|`` (geometric) or ``(1 + |z|)**-s`` (polynomial), rescaled
    so that ``sum_z a(z) = mass``.

    Attributes
    ----------
    group : GroupSpec
    shape : {"geometric", "polynomial"}
    rate, s : float
        Shape parameters.
    support_radius : int
    mass : float
        Off-identity mass ``cd_norm(K)``.
    phases : {"random", "positive", "toeplitz"}
        ``random``: an independent unit-modulus phase per entry;
        ``positive``: all phases 1; ``toeplitz``: one phase per diagonal.
    hermitian : bool
    identity : float
        Coefficient of ``I``.
    """

    __test__ = False  # not a pytest class

    group: GroupSpec
    shape: str = "geometric"
    rate: float = 0.5
    s: float = 2.0
    support_radius: int = 2
    mass: float = 0.5
    phases: str = "random"
    hermitian: bool = False
    identity: float = 1.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if self.phases not in PHASES:
            raise ValueError(f"phases must be one of {PHASES}")
        if self.support_radius < 1 or self.mass < 0:
            raise ValueError("need support_radius >= 1 and mass >= 0")
        if self.shape == "geometric" and not 0 < self.rate:
            raise ValueError("geometric rate must be positive")

    def profile(self, lengths) -> np.ndarray:
        n = np.asarray(lengths, dtype=float)
        if self.shape == "geometric":
            return self.rate ** n
        return (1.0 + n) ** (-self.s)

    def off_identity_envelope(self) -> Envelope:
        ball = self.group.ball(self.support_radius)
        a = self.profile(ball.lengths)
        a[0] = 0.0
        total = math.fsum(a)
        if total > 0:
            a *= self.mass / total
        return Envelope.from_array(ball, a)

    def envelope(self) -> Envelope:
        """Envelope of the generated matrix (identity coefficient included)."""
        a = dict(self.off_identity_envelope().items())
        if self.identity:
            a[self.group.identity] = abs(self.identity)
        return Envelope(self.group, a)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["group"] = self.group.name
        return d


def _unit_phase(seed: int, *parts) -> complex:
    # counter-based: the phase depends only on (seed, parts), so matrices of
    # different radii built from one seed agree on their common entries
    key = "|".join([str(seed)] + [",".join(map(str, p)) for p in parts]).encode()
    u = struct.unpack("<Q", hashlib.blake2b(key, digest_size=8).digest())[0] / 2.0 ** 64
    return complex(math.cos(2 * math.pi * u), math.sin(2 * math.pi * u))


def make_test_matrix(spec: TestMatrixSpec, seed: int, radius: int) -> CDMatrix:
    """Generate the matrix of ``spec`` on columns ``B_radius``.

    Non-Hermitian specs yield the column window of the infinite matrix
    (``certified = radius``).  Hermitian specs yield the exact section
    ``P A P`` with ``P`` the projection onto ``B_radius``; pairs are built
    in a canonical orientation so that ``A = A*`` holds exactly.
    """
    group = spec.group
    env = spec.off_identity_envelope()
    kball = group.ball(spec.support_radius)
    cball = group.ball(radius)
    a = env.to_array(kball)
    data = np.zeros((len(kball), len(cball)), dtype=complex)
    if spec.identity:
        data[0] = spec.identity
    if spec.hermitian:
        rows = product_index(group, kball, cball, cball)        # [z, y] -> z y inside B_radius
    for i, z in enumerate(kball.elements):
        if i == 0 or a[i] == 0.0:
            continue
        zinv = group.inv(z)
        canonical = group.sort_key(z) < group.sort_key(zinv)
        for j, y in enumerate(cball.elements):
            if spec.hermitian and rows[i, j] < 0:
                continue
            if spec.phases == "positive":
                ph = 1.0
            elif spec.hermitian:
                # entry (zy, y) and its mirror (y, zy) share one phase
                if spec.phases == "toeplitz":
                    ph = _unit_phase(seed, z) if canonical else _unit_phase(seed, zinv).conjugate()
                else:
                    ph = (_unit_phase(seed, z, y) if canonical
                          else _unit_phase(seed, zinv, group.mul(z, y)).conjugate())
            else:
                ph = _unit_phase(seed, z) if spec.phases == "toeplitz" else _unit_phase(seed, z, y)
            data[i, j] = a[i] * ph
    if spec.hermitian:
        return CDMatrix(group, data, row_radius=radius)
    return CDMatrix(group, data, certified=radius)


# -- Neumann series -------------------------------------------------------------

def neumann_inverse(f: CDMatrix, tol: float = 1e-12, max_terms: int = 500) -> tuple[CDMatrix, float]:
    """Invert ``I - f`` by ``sum_k f^(k)`` in the algebra.

    Returns the partial sum ``S`` and the achieved bound
    ``c^(K+1) / (1 - c)`` on the norm of the omitted tail, ``c = cd_norm(f)``.
    ``S`` carries the identity on the columns of ``f``.
    """
    c = cd_norm(f)
    if c >= 1.0:
        raise NotContractive(f"cd_norm(f) = {c!r} >= 1")
    S = identity(f.group, f.N)
    if f.certified is None:
        S = CDMatrix(f.group, S.data, row_radius=f.N)
    if c == 0.0:
        return S, 0.0
    term = f
    S = add(S, f)
    k = 1
    bound = c ** (k + 1) / (1 - c)
    while bound > tol and k < max_terms:
        term = compose(term, f)
        if not np.any(term.data):
            bound = 0.0
            break
        S = add(S, term)
        k += 1
        bound = c ** (k + 1) / (1 - c)
    return S, bound


# -- finite sections ------------------------------------------------------------

def default_margin(radius: int) -> int:
    return math.ceil(radius / 4)


@dataclass
class SectionInverse:
    """Inverse of a finite section with its interior envelope.

    Unpacks as ``(inverse, envelope)``.
    """

    inverse: DenseSection
    envelope: Envelope
    rcond: float
    residual: float
    margin: int

    def __iter__(self):
        return iter((self.inverse, self.envelope))


def interior_envelope(M: np.ndarray, ball: Ball, interior_radius: int) -> Envelope:
    """``b(z) = max |M(x, y)|`` over ``x, y`` in ``B_interior`` with ``x y^-1 = z``."""
    spec = ball.group
    k = ball.size_of(interior_radius)
    try:
        dball = spec.ball(2 * interior_radius)
    except OutOfRadius as exc:
        raise SupportOverflow(str(exc)) from None
    z = product_index(spec, ball.elements[:k] if not spec.vectorized else ball.coords[:k],
                      ball.elements[:k] if not spec.vectorized else ball.coords[:k],
                      dball, invert_right=True)
    b = np.zeros(len(dball))
    np.maximum.at(b, z.ravel(), np.abs(M[:k, :k]).ravel())
    return Envelope.from_array(dball, b)


def finite_section_inverse(A: CDMatrix, ball: Ball, margin: int | None = None) -> SectionInverse:
    """LU inverse of the section of ``A`` on ``ball`` and its interior envelope.

    Raises :class:`SingularSection` when a pivot falls below
    ``1e-12 * max |A|``.
    """
    margin = default_margin(ball.radius) if margin is None else int(margin)
    if not 0 <= margin <= ball.radius:
        raise ValueError("margin must lie in [0, radius]")
    D = to_dense(A, ball).entries
    scale = float(np.max(np.abs(D), initial=0.0))
    if scale == 0.0:
        raise SingularSection("zero section", radius=ball.radius, rcond=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(D, check_finite=True)
    pivots = np.abs(np.diag(lu))
    anorm = float(np.max(np.sum(np.abs(D), axis=0)))
    if pivots.min() < 1e-12 * scale:
        raise SingularSection(f"section of radius {ball.radius} is singular "
                              f"(pivot {pivots.min():.3e})", radius=ball.radius, rcond=0.0)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(len(ball), dtype=complex))
    residual = float(np.max(np.abs(D @ inv - np.eye(len(ball)))))
    env = interior_envelope(inv, ball, ball.radius - margin)
    return SectionInverse(DenseSection(ball, inv), env, float(rcond), residual, margin)


# -- studies ----------------------------------------------------------------------

def _sup_diff(a: Envelope, b: Envelope) -> float:
    keys = set(a.support()) | set(b.support())
    return max((abs(a[z] - b[z]) for z in keys), default=0.0)


def _strictly_decreasing_to_zero(t) -> bool:
    t = list(t)
    for u, v in zip(t, t[1:]):
        if u == 0.0:
            if v != 0.0:
                return False
        elif not v < u:
            return False
    return True


def _halving(seq) -> bool:
    return len(seq) >= 2 and seq[-1] <= seq[-2] / 2


@dataclass
class InversionReport:
    """Per-radius interior envelopes of finite-section inverses."""

    group: str
    radii: list[int]
    margins: list[int]
    envelopes: list[Envelope]
    tail_sums: list[list[float]]
    deltas: list[float]
    cd_norm_b: float
    cd_norm_w_b: float | None = None
    weight: str | None = None
    rcond: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    conditions: dict | None = None
    verdict: str | None = None
    spec: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "radii": self.radii,
            "margins": self.margins,
            "deltas": self.deltas,
            "tail_sums": self.tail_sums,
            "cd_norm_b": self.cd_norm_b,
            "cd_norm_w_b": self.cd_norm_w_b,
            "weight": self.weight,
            "rcond": self.rcond,
            "residuals": self.residuals,
            "conditions": self.conditions,
            "verdict": self.verdict,
            "spec": self.spec,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _map(fn, items, jobs: int):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def study_sections(A_for_radius, group: GroupSpec, radii, margin: int | None = None,
                   weight: Weight | None = None, jobs: int = 1, in_hypothesis: bool | None = None
                   ) -> InversionReport:
    """Invert sections ``A_for_radius(n)`` on ``B_n`` for each radius and collect the envelopes."""
    radii = sorted(int(n) for n in radii)
    if not radii:
        raise ValueError("need at least one radius")

    def run(n):
        return finite_section_inverse(A_for_radius(n), group.ball(n), margin)

    results = _map(run, radii, jobs)
    envs = [r.envelope for r in results]
    deltas = [_sup_diff(a, b) for a, b in zip(envs, envs[1:])]
    tails = [list(map(float, e.tail_sums())) for e in envs]
    final = envs[-1]
    report = InversionReport(
        group=group.name, radii=radii, margins=[r.margin for r in results], envelopes=envs,
        tail_sums=tails, deltas=deltas, cd_norm_b=final.l1_norm(),
        cd_norm_w_b=final.l1w_norm(weight) if weight is not None else None,
        weight=str(weight) if weight is not None else None,
        rcond=[r.rcond for r in results], residuals=[r.residual for r in results])
    if in_hypothesis is None:
        in_hypothesis = group.polynomial_growth
    if not in_hypothesis:
        report.notes.append(f"{group.name} is outside the hypotheses; no verdict")
    elif len(deltas) < 2:
        report.notes.append("fewer than three radii; no verdict")
    else:
        ok = _halving(deltas) and all(_strictly_decreasing_to_zero(t) for t in tails)
        report.verdict = CONSISTENT if ok else INCONSISTENT
    return report


def envelope_convergence_study(spec: TestMatrixSpec, radii, margin: int | None = None,
                               seed: int = 0, weight: Weight | None = None,
                               jobs: int = 1) -> InversionReport:
    """Finite-section inverses of ``make_test_matrix(spec)`` over growing radii.

    The verdict is ``"consistent"`` when the sup-distance between
    consecutive interior envelopes at least halves over the last step and
    every envelope's tail sums decrease strictly until they vanish; groups
    outside the hypotheses get no verdict.
    """
    report = study_sections(lambda n: make_test_matrix(spec, seed, n), spec.group, radii,
                            margin, weight, jobs)
    report.spec = spec.to_dict()
    return report


# -- l^p conditioning ---------------------------------------------------------------

def _pnorm(M: np.ndarray, p) -> float:
    if p == 1:
        return float(np.max(np.sum(np.abs(M), axis=0)))
    if p in (np.inf, "inf"):
        return float(np.max(np.sum(np.abs(M), axis=1)))
    if p == 2:
        return opnorm_estimate(M)
    raise ValueError("p must be 1, 2 or inf")


def _pkey(p) -> str:
    return "inf" if p in (np.inf, "inf") else str(int(p))


@dataclass
class LpTable:
    """``||A_n||_p``, ``||A_n^-1||_p`` and their product per radius."""

    radii: list[int]
    norms: dict
    inverse_norms: dict
    cond: dict
    notes: list[str] = field(default_factory=list)

    def drift(self, p) -> float:
        c = self.cond[_pkey(p)]
        return max(c) / min(c)

    def to_dict(self) -> dict:
        return {"radii": self.radii, "norm": self.norms, "inverse_norm": self.inverse_norms,
                "cond": self.cond, "drift": {k: self.drift(k) for k in self.cond},
                "notes": self.notes}


def lp_condition_experiment(A, ps=(1, 2, np.inf), radii=(), seed: int = 0,
                            jobs: int = 1) -> LpTable:
    """Condition numbers of finite sections in ``l^1``, ``l^2`` and ``l^inf``.

    ``A`` is a :class:`CDMatrix` covering the largest radius, or a
    :class:`TestMatrixSpec` generated per radius with ``seed``.
    ``p = 1`` and ``p = inf`` use exact column and row sums, ``p = 2``
    power iteration.
    """
    radii = sorted(int(n) for n in radii)
    keys = [_pkey(p) for p in ps]
    group = A.group

    def run(n):
        M = make_test_matrix(A, seed, n) if isinstance(A, TestMatrixSpec) else A
        ball = group.ball(n)
        D = to_dense(M, ball).entries
        inv = finite_section_inverse(M, ball, margin=0).inverse.entries
        return [(_pnorm(D, p), _pnorm(inv, p)) for p in ps]

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PowerIterationWarning)
        rows = _map(run, radii, jobs)
    notes = sorted({f"l2 norm: {w.message}; last iterate used" for w in caught
                    if issubclass(w.category, PowerIterationWarning)})
    norms = {k: [r[i][0] for r in rows] for i, k in enumerate(keys)}
    inv_norms = {k: [r[i][1] for r in rows] for i, k in enumerate(keys)}
    cond = {k: [a * b for a, b in zip(norms[k], inv_norms[k])] for k in keys}
    return LpTable(radii, norms, inv_norms, cond, notes)


# -- weighted summability ----------------------------------------------------------

@dataclass
class WeightedReport:
    """Weighted norms ``W_n = sum_z b_n(z) w(z)`` of interior inverse envelopes."""

    weight: str
    radii: list[int]
    weighted_norms: list[float]
    increments: list[float]
    verdict: str
    report: InversionReport

    @property
    def member(self) -> bool:
        return self.verdict == CONSISTENT

    @property
    def value(self) -> float:
        return self.weighted_norms[-1]

    def to_dict(self) -> dict:
        return {"weight": self.weight, "radii": self.radii,
                "weighted_norms": self.weighted_norms, "increments": self.increments,
                "verdict": self.verdict, "member": self.member}


def weighted_inverse_check(A: CDMatrix, weight: Weight, radii, margin: int | None = None,
                           jobs: int = 1) -> WeightedReport:
    """Track the weighted norm of the interior inverse envelope over radii.

    ``consistent`` when the increments ``W_{n+1} - W_n`` at least halve in
    absolute value over the last step; a weighted norm that keeps growing
    (for instance an exponential weight beating the decay of the inverse)
    is reported ``inconsistent``.
    """
    rep = study_sections(lambda n: A, A.group, radii, margin, weight, jobs,
                         in_hypothesis=True)
    W = [e.l1w_norm(weight) for e in rep.envelopes]
    inc = [b - a for a, b in zip(W, W[1:])]
    ok = (len(inc) >= 2 and all(math.isfinite(w) for w in W)
          and abs(inc[-1]) <= abs(inc[-2]) / 2)
    return WeightedReport(str(weight), rep.radii, W, inc, CONSISTENT if ok else INCONSISTENT, rep)


__all__ = [
    "NotContractive", "SingularSection", "TestMatrixSpec", "make_test_matrix",
    "neumann_inverse", "finite_section_inverse", "SectionInverse", "interior_envelope",
    "default_margin", "InversionReport", "envelope_convergence_study", "study_sections",
    "LpTable", "lp_condition_experiment", "WeightedReport", "weighted_inverse_check",
    "CONSISTENT", "INCONSISTENT",
]
