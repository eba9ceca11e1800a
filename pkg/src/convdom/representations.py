r"""Representations of the twisted algebra on ``l^2(G x G)`` and norm estimators.

``lambda_D_apply`` is the D-regular representation

.. math::

    (\lambda^D(f)\xi)(x, z) = \sum_y f(xy)(y^{-1} z)\, \xi(y^{-1}, z),

``R_omega_apply`` lets ``R(f)`` act on the first coordinate and
``shear_S`` is ``(S\xi)(x, z) = \xi(xz, z)``; the two representations
are intertwined by ``S``.  Everything is evaluated on a finite section
``B x B`` with a mask marking the entries whose defining sums stay inside
the section.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import (CDMatrix, DenseSection, SupportOverflow, VectorSection, adjoint, apply,
                      cd_norm, compose, to_dense)
from .groups import Ball, Element, GroupMismatch, OutOfRadius, product_index


class PowerIterationWarning(RuntimeWarning):
    pass


@dataclass
class BiVectorSection:
    """``xi(x, z)`` for ``x, z`` in a ball; ``certified`` flags exact entries."""

    ball: Ball
    values: np.ndarray
    certified: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.ball)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (n, n):
            raise ValueError(f"bivector on {self.ball} must be {n}x{n}")
        if self.certified is None:
            self.certified = np.ones((n, n), dtype=bool)

    def norm(self) -> float:
        a = np.abs(self.values).ravel()
        return math.sqrt(math.fsum(a * a))

    def slice(self, z_index: int) -> VectorSection:
        return VectorSection(self.ball, self.values[:, z_index])


def _check(f: CDMatrix, xi: BiVectorSection):
    if f.group != xi.ball.group:
        raise GroupMismatch("matrix and bivector live on different groups")


def _pad(a: np.ndarray, axis: int) -> np.ndarray:
    shape = list(a.shape)
    shape[axis] = 1
    return np.concatenate([a, np.zeros(shape, dtype=a.dtype)], axis=axis)


def _col_limit(f: CDMatrix, ball: Ball | None = None) -> int:
    """Number of leading columns of ``f`` holding certified values."""
    n = f.data.shape[1]
    if f.certified is None:
        return n
    if f.certified < 0:
        return 0
    return min(n, f.col_ball.size_of(f.certified))


def shear_S(xi: BiVectorSection) -> BiVectorSection:
    """``(S xi)(x, z) = xi(x z, z)``; entries with ``x z`` outside the ball are uncertified."""
    ball = xi.ball
    src = product_index(ball.group, ball, ball, ball)      # [x, z] -> x z
    return _gather_rows(xi, src)


def shear_S_inv(xi: BiVectorSection) -> BiVectorSection:
    """``(S^-1 xi)(x, z) = xi(x z^-1, z)``."""
    ball = xi.ball
    src = product_index(ball.group, ball, ball, ball, invert_right=True)
    return _gather_rows(xi, src)


def _gather_rows(xi: BiVectorSection, src: np.ndarray) -> BiVectorSection:
    n = len(xi.ball)
    cols = np.broadcast_to(np.arange(n), src.shape)
    vals = _pad(xi.values, 0)[src, cols]
    cert = _pad(xi.certified, 0)[src, cols] & (src >= 0)
    return BiVectorSection(xi.ball, vals, cert)


def R_omega_apply(f: CDMatrix, xi: BiVectorSection) -> BiVectorSection:
    """``(R^w(f) xi)(x, z) = sum_v m_v(v^-1 x) xi(v^-1 x, z)``: ``R(f)`` on the first coordinate."""
    _check(f, xi)
    ball = xi.ball
    u = product_index(f.group, f.diag_ball, ball, ball, invert_left=True)   # [v, x] -> v^-1 x
    limit = _col_limit(f)
    data = _pad(f.data, 1)
    ncol = f.data.shape[1]
    vals = _pad(xi.values, 0)
    cert_in = _pad(xi.certified, 0)
    out = np.zeros_like(xi.values)
    cert = np.ones(xi.values.shape, dtype=bool)
    for v in np.flatnonzero(np.any(f.data != 0, axis=1)):
        uv = u[v]
        col = np.where((uv >= 0) & (uv < ncol), uv, ncol)
        out += data[v, col][:, None] * vals[uv]
        inside = (uv >= 0) & (uv < limit)
        cert &= inside[:, None] & cert_in[uv]
    return BiVectorSection(ball, out, cert)


def lambda_D_apply(f: CDMatrix, xi: BiVectorSection) -> BiVectorSection:
    r"""The D-regular representation, summed over ``u = y^{-1}``:
    ``sum_u m_{x u^{-1}}(u z) xi(u, z)``, i.e. over diagonals ``v`` with
    ``u = v^{-1} x``."""
    _check(f, xi)
    spec = f.group
    ball = xi.ball
    n = len(ball)
    u = product_index(spec, f.diag_ball, ball, ball, invert_left=True)      # [v, x] -> v^-1 x
    cball = f.col_ball
    limit = _col_limit(f)
    data = _pad(f.data, 1)
    ncol = f.data.shape[1]
    vals = _pad(xi.values, 0)
    cert_in = _pad(xi.certified, 0)
    zs = np.arange(n)
    out = np.zeros_like(xi.values)
    cert = np.ones((n, n), dtype=bool)
    for v in np.flatnonzero(np.any(f.data != 0, axis=1)):
        uv = u[v]
        if spec.vectorized:
            ucoords = np.where((uv >= 0)[:, None], ball.coords[np.maximum(uv, 0)], 0)
            uz = cball.locate(spec.mul_arrays(ucoords[:, None, :], ball.coords[None, :, :]))
        else:
            uz = np.array([[cball.index.get(spec.mul(ball[i], z), -1) if i >= 0 else -1
                            for z in ball] for i in uv], dtype=np.int64)
        uz = np.where((uv >= 0)[:, None], uz, -1)
        col = np.where(uz >= 0, uz, ncol)
        out += data[v, col] * vals[uv[:, None], zs[None, :]]
        # entries beyond the column ball are exact zeros unless f is a window
        col_ok = (uz >= 0) & (uz < limit) if f.certified is not None else np.ones((n, n), bool)
        cert &= (uv >= 0)[:, None] & col_ok & cert_in[uv[:, None], zs[None, :]]
    return BiVectorSection(ball, out, cert)


def check_intertwining(f: CDMatrix, xi: BiVectorSection) -> float:
    """Max ``|lambda^D(f)(S xi) - S(R^w(f) xi)|`` over the jointly certified entries."""
    lhs = lambda_D_apply(f, shear_S(xi))
    rhs = shear_S(R_omega_apply(f, xi))
    mask = lhs.certified & rhs.certified
    if not mask.any():
        raise ValueError("no entry is certified on both sides")
    return float(np.max(np.abs(lhs.values[mask] - rhs.values[mask])))


def interior_bivector(ball: Ball, radius: int, rng) -> BiVectorSection:
    """Random ``xi`` supported on ``B_radius x B_radius`` inside ``ball``."""
    n = len(ball)
    vals = np.zeros((n, n), dtype=complex)
    k = ball.size_of(radius)
    vals[:k, :k] = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return BiVectorSection(ball, vals)


# -- norm estimates -------------------------------------------------------------

def opnorm_estimate(M, iters: int = 5000, tol: float = 1e-10, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``M* M``.

    Starts from a fixed seeded vector and stops once the Rayleigh quotient
    changes by less than ``tol`` relatively.  Emits
    :class:`PowerIterationWarning` and returns the last iterate if the cap
    is reached.
    """
    A = M.entries if isinstance(M, DenseSection) else np.asarray(M)
    if not np.any(A):
        raise ValueError("opnorm_estimate needs a nonzero matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    rq = 0.0
    for _ in range(iters):
        w = A @ v
        u = A.conj().T @ w
        new = float(np.vdot(w, w).real)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        if rq > 0 and abs(new - rq) <= tol * new:
            return math.sqrt(new)
        rq = new
    warnings.warn(f"power iteration did not converge in {iters} steps", PowerIterationWarning)
    return math.sqrt(rq)


def single_diag_opnorm_check(m, z: Element, ball: Ball) -> tuple[float, float, float]:
    """Operator norm of ``D^m_z`` versus ``sup |m|`` (they coincide).

    ``m`` is an array over ``ball`` (the column support); the dense section
    is taken on a ball large enough to hold every row ``z y``.
    """
    spec = ball.group
    m = np.asarray(m, dtype=complex)
    zlen = spec.word_length(tuple(z))
    data = np.zeros((len(spec.ball(zlen)), len(ball)), dtype=complex)
    data[spec.ball(zlen).index[tuple(z)]] = m
    f = CDMatrix(spec, data)
    big = spec.ball(ball.radius + zlen)
    # M* M is diagonal here, so near-ties in |m| slow the iteration; a
    # tighter stopping rule keeps the estimate within 1e-8 of the sup
    est = opnorm_estimate(to_dense(f, big), iters=50000, tol=1e-15)
    sup = float(np.max(np.abs(m)))
    return est, sup, abs(est - sup)


@dataclass
class SpectralEstimate:
    """``r_k = ||f^(2^k)||^(1/2^k)`` for ``k = 0..``, with an operator-norm comparator."""

    r: list[float]
    opnorm: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def final(self) -> float:
        return self.r[-1]

    @property
    def ratio(self) -> float | None:
        if self.opnorm is None:
            return None
        return self.final / self.opnorm

    def nonincreasing(self, rtol: float = 1e-12) -> bool:
        return all(b <= a * (1 + rtol) for a, b in zip(self.r, self.r[1:]))

    def to_dict(self) -> dict:
        return {"r": list(self.r), "opnorm": self.opnorm, "ratio": self.ratio}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def specrad_L_estimate(f: CDMatrix, k_max: int) -> SpectralEstimate:
    """Upper bounds for the spectral radius of ``f`` in the algebra norm.

    Squares repeatedly; stops early (with a note) when the next square
    would overflow the radius budget.
    """
    r = [cd_norm(f)]
    notes = []
    g = f
    for k in range(1, k_max + 1):
        try:
            g = compose(g, g)
        except (SupportOverflow, OutOfRadius) as exc:
            notes.append(f"stopped at k={k - 1}: {exc}")
            break
        r.append(cd_norm(g) ** (1.0 / 2 ** k))
    return SpectralEstimate(r, None, notes)


@dataclass
class NormIdReport:
    estimate: SpectralEstimate
    opnorm: float
    ratio: float
    monotone: bool

    def to_dict(self) -> dict:
        d = self.estimate.to_dict()
        d.update(opnorm_f=self.opnorm, monotone=self.monotone)
        return d


def check_normid(f: CDMatrix, ball: Ball, k_max: int) -> NormIdReport:
    """Compare ``r_L(f* f)`` estimates with ``||R(f)||^2`` on a section.

    The identity between the two is a limit statement; this reports the
    ratio at ``k_max`` and whether the ``r_k`` decrease.
    """
    est = specrad_L_estimate(compose(adjoint(f), f), k_max)
    op = opnorm_estimate(to_dense(f, ball))
    est.opnorm = op * op
    return NormIdReport(est, op, est.ratio, est.nonincreasing())


__all__ = [
    "BiVectorSection", "PowerIterationWarning", "SpectralEstimate", "NormIdReport",
    "shear_S", "shear_S_inv", "R_omega_apply", "lambda_D_apply", "check_intertwining",
    "interior_bivector", "opnorm_estimate", "single_diag_opnorm_check",
    "specrad_L_estimate", "check_normid", "apply",
]
