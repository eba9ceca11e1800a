r"""Convolution-dominated matrices stored by side-diagonals.

A matrix ``A`` indexed by a group is split into side-diagonals
``z = x y^{-1}``; the ``z``-th one is a function ``m_z`` of the column
index, so that

.. math::

    A(x, y) = m_{x y^{-1}}(y).

:class:`CDMatrix` keeps the ``m_z`` as rows of a complex array whose row
axis runs over the diagonal ball ``B_K`` and whose column axis runs over
the column ball ``B_N`` (both canonically ordered).  Values outside
``B_N`` are zero, so every stored matrix is an exact finitely supported
operator on ``l^2(G)`` and all algebra operations on it are exact.

When a stored matrix is a window of an infinite operator (a Toeplitz
matrix cut to ``B_N``, for example) the attribute ``certified`` records
the column radius on which stored columns agree with that operator;
``None`` means the stored object is itself the operator.  Products and
adjoints shrink this radius by the diagonal reach of the factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelopes import Envelope, Weight
from .groups import Ball, Element, GroupMismatch, GroupSpec, OutOfRadius, product_index


class SupportOverflow(ValueError):
    """A result would need diagonals or columns beyond the radius budget."""


def _ball(group: GroupSpec, n: int) -> Ball:
    try:
        return group.ball(n)
    except OutOfRadius as exc:
        raise SupportOverflow(str(exc)) from None


def _min_cert(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _shift_cert(c, k):
    return None if c is None else c - k


class CDMatrix:
    """An element ``f = sum_z m_z delta_z`` of the twisted algebra, as a matrix.

    Parameters
    ----------
    group : GroupSpec
    data : array_like, shape (|B_K|, |B_N|)
        ``data[i, j] = m_{z_i}(y_j)`` for ``z_i`` in ``B_K`` and ``y_j``
        in ``B_N``.
    row_radius : int, optional
        Upper bound on the length of nonzero rows ``x = z y``; defaults to
        ``K + N``.
    certified : int or None
        Column radius on which the stored values are those of the
        represented operator (``None``: exact object).

    The constructor trims ``K`` and ``N`` to the actual support.
    """

    __slots__ = ("group", "data", "K", "N", "M", "certified")

    def __init__(self, group: GroupSpec, data, row_radius: int | None = None,
                 certified: int | None = None):
        data = np.array(data, dtype=complex)
        if data.ndim != 2:
            raise ValueError("diagonal data must be two-dimensional")
        dball = _diag_ball_for(group, data.shape[0])
        cball = _diag_ball_for(group, data.shape[1])
        rows = np.flatnonzero(np.any(data != 0, axis=1))
        cols = np.flatnonzero(np.any(data != 0, axis=0))
        K = int(dball.lengths[rows[-1]]) if len(rows) else 0
        N = int(cball.lengths[cols[-1]]) if len(cols) else 0
        data = np.ascontiguousarray(data[: dball.size_of(K), : cball.size_of(N)])
        data.setflags(write=False)
        self.group = group
        self.data = data
        self.K = K
        self.N = N
        self.M = K + N if row_radius is None else min(int(row_radius), K + N)
        self.certified = certified

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, group: GroupSpec) -> "CDMatrix":
        return cls(group, np.zeros((1, 1)))

    @classmethod
    def from_diagonals(cls, group: GroupSpec, diagonals, col_radius: int,
                       certified: int | None = None) -> "CDMatrix":
        """Build from ``{z: m_z}`` where ``m_z`` is an array over ``B_N``,
        a mapping ``{y: value}`` or a scalar (constant on ``B_N``)."""
        cball = _ball(group, col_radius)
        zs = [group.check(z) for z in diagonals]
        K = max((group.word_length(z) for z in zs), default=0)
        dball = _ball(group, K)
        data = np.zeros((len(dball), len(cball)), dtype=complex)
        for z, m in zip(zs, diagonals.values()):
            i = dball.index[z]
            if isinstance(m, dict):
                for y, v in m.items():
                    j = cball.index.get(group.check(y))
                    if j is None:
                        raise SupportOverflow(f"column {y} is outside B_{col_radius}")
                    data[i, j] = v
            else:
                data[i] = m
        return cls(group, data, certified=certified)

    # -- access --------------------------------------------------------------

    @property
    def diag_ball(self) -> Ball:
        return self.group.ball(self.K)

    @property
    def col_ball(self) -> Ball:
        return self.group.ball(self.N)

    def diagonal(self, z: Element) -> np.ndarray:
        """``m_z`` on the column ball (zeros if ``z`` is not in the support)."""
        i = self.diag_ball.index.get(tuple(z))
        if i is None:
            return np.zeros(self.data.shape[1], dtype=complex)
        return self.data[i].copy()

    def support(self) -> list[Element]:
        rows = np.flatnonzero(np.any(self.data != 0, axis=1))
        return [self.diag_ball.elements[i] for i in rows]

    def entry(self, x: Element, y: Element) -> complex:
        spec = self.group
        z = spec.mul(tuple(x), spec.inv(tuple(y)))
        i = self.diag_ball.index.get(z)
        j = self.col_ball.index.get(tuple(y))
        if i is None or j is None:
            return 0j
        return complex(self.data[i, j])

    def padded(self, K: int, N: int) -> np.ndarray:
        """The data embedded in the larger ``B_K x B_N`` array."""
        out = np.zeros((len(_ball(self.group, K)), len(_ball(self.group, N))), dtype=complex)
        out[: self.data.shape[0], : self.data.shape[1]] = self.data
        return out

    def __eq__(self, other):
        if not isinstance(other, CDMatrix):
            return NotImplemented
        return (self.group == other.group and self.data.shape == other.data.shape
                and bool(np.array_equal(self.data, other.data)))

    __hash__ = None

    def max_abs_diff(self, other: "CDMatrix") -> float:
        _same_group(self, other)
        K, N = max(self.K, other.K), max(self.N, other.N)
        d = self.padded(K, N) - other.padded(K, N)
        return float(np.max(np.abs(d))) if d.size else 0.0

    def __repr__(self):
        return (f"CDMatrix({self.group.name}, K={self.K}, N={self.N}, "
                f"diagonals={len(self.support())}, cd_norm={cd_norm(self):.6g})")

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __rmul__(self, alpha):
        return scale(alpha, self)

    def __matmul__(self, other):
        return compose(self, other)

    @property
    def H(self):
        return adjoint(self)


def _diag_ball_for(group: GroupSpec, size: int) -> Ball:
    """The ball whose size equals ``size`` (data axes are ball prefixes)."""
    n = 0
    while True:
        b = _ball(group, n)
        if len(b) == size:
            return b
        if len(b) > size:
            raise ValueError(f"axis length {size} is not the size of a ball in {group.name}")
        n += 1


def _same_group(a: CDMatrix, b: CDMatrix):
    if a.group != b.group:
        raise GroupMismatch(f"{a.group.name} vs {b.group.name}")


# -- linear structure ----------------------------------------------------------

def identity(group: GroupSpec, radius: int | None = None) -> CDMatrix:
    """The identity window: ``m_e = 1`` on ``B_radius``."""
    radius = group.max_radius if radius is None else radius
    cball = _ball(group, radius)
    return CDMatrix(group, np.ones((1, len(cball))), row_radius=radius, certified=radius)


def shift(group: GroupSpec, z: Element, radius: int, coeff: complex = 1.0) -> CDMatrix:
    """Left translation ``coeff * lambda(z)`` on columns ``B_radius``."""
    return toeplitz(group, {tuple(z): coeff}, radius)


def toeplitz(group: GroupSpec, coeffs: dict, radius: int) -> CDMatrix:
    """Convolution operator with constant diagonals ``coeffs[z]``, cut to ``B_radius``."""
    return CDMatrix.from_diagonals(group, dict(coeffs), radius, certified=radius)


def multiplication(group: GroupSpec, m) -> CDMatrix:
    """The diagonal operator ``D^m`` for ``m`` an array over a ball."""
    m = np.asarray(m, dtype=complex)
    return CDMatrix(group, m[None, :])


def add(a: CDMatrix, b: CDMatrix) -> CDMatrix:
    _same_group(a, b)
    K, N = max(a.K, b.K), max(a.N, b.N)
    return CDMatrix(a.group, a.padded(K, N) + b.padded(K, N),
                    row_radius=max(a.M, b.M), certified=_min_cert(a.certified, b.certified))


def scale(alpha: complex, a: CDMatrix) -> CDMatrix:
    return CDMatrix(a.group, alpha * a.data, row_radius=a.M, certified=a.certified)


# -- norms and envelopes -------------------------------------------------------

def diagonal_norms(a: CDMatrix) -> np.ndarray:
    """``sup_y |m_z(y)|`` for every ``z`` in the diagonal ball."""
    return np.max(np.abs(a.data), axis=1)


def cd_norm(a: CDMatrix) -> float:
    """``sum_z sup_y |m_z(y)|`` (correctly rounded sum)."""
    return math.fsum(diagonal_norms(a))


def cd_norm_w(a: CDMatrix, weight: Weight) -> float:
    w = weight.on_ball(a.diag_ball)
    return math.fsum(diagonal_norms(a) * w)


def envelope_of(a: CDMatrix) -> Envelope:
    """The dominating sequence ``a(z) = sup_{x y^-1 = z} |A(x, y)|``."""
    return Envelope.from_array(a.diag_ball, diagonal_norms(a), radius=a.group.max_radius)


# -- products -------------------------------------------------------------------

def compose(h: CDMatrix, f: CDMatrix) -> CDMatrix:
    r"""Twisted convolution ``h * f``, i.e. the matrix product ``R(h) R(f)``.

    Diagonal ``v`` of the product is
    ``l_v(y) = sum_w n_{v w^{-1}}(w y) m_w(y)``, accumulated over ``w`` in
    canonical order.
    """
    _same_group(h, f)
    spec = h.group
    K = min(h.K + f.K, h.M + f.N)
    out_ball = _ball(spec, K)
    hd, fd = h.diag_ball, f.diag_ball
    fc, hc = f.col_ball, h.col_ball
    rw = product_index(spec, hd, fd, out_ball)          # (|B_Kh|, |B_Kf|)
    wy = product_index(spec, fd, fc, hc)                # (|B_Kf|, |B_Nf|)
    H = np.concatenate([h.data, np.zeros((h.data.shape[0], 1))], axis=1)
    out = np.zeros((len(out_ball), len(fc)), dtype=complex)
    active = np.flatnonzero(np.any(f.data != 0, axis=1))
    for w in active:
        block = H[:, wy[w]] * f.data[w]
        dest = rw[:, w]
        lost = dest < 0
        if lost.any():
            if np.any(block[lost] != 0):
                raise SupportOverflow("product diagonal outside the diagonal ball")
            out[dest[~lost]] += block[~lost]
        else:
            out[dest] += block
    cert = _min_cert(f.certified, _shift_cert(h.certified, f.K))
    return CDMatrix(spec, out, row_radius=h.M, certified=cert)


def adjoint(f: CDMatrix) -> CDMatrix:
    r"""The involution: diagonal ``v^{-1}`` of ``f*`` is ``T_v conj(m_v)``,
    i.e. ``y -> conj(m_v(v^{-1} y))``."""
    spec = f.group
    N_out = min(f.N + f.K, f.M)
    dball, cball = f.diag_ball, f.col_ball
    out_cols = _ball(spec, N_out)
    src = product_index(spec, dball, out_cols, cball, invert_left=True)
    if spec.vectorized:
        inv_pos = dball.locate(spec.inv_arrays(dball.coords))
    else:
        inv_pos = dball.locate_elements(spec.inv(z) for z in dball.elements)
    padded = np.concatenate([f.data, np.zeros((f.data.shape[0], 1))], axis=1)
    out = np.zeros((len(dball), len(out_cols)), dtype=complex)
    rows = np.arange(len(dball))[:, None]
    out[inv_pos] = np.conj(padded[rows, src])
    return CDMatrix(spec, out, row_radius=f.N, certified=_shift_cert(f.certified, f.K))


def star_power(f: CDMatrix, k: int) -> CDMatrix:
    """``f^(k)`` under the twisted product, by repeated squaring."""
    if k < 0:
        raise ValueError("star_power needs k >= 0")
    result = None
    base = f
    while True:
        if k & 1:
            result = base if result is None else compose(result, base)
        k >>= 1
        if not k:
            break
        base = compose(base, base)
    return identity(f.group, f.N) if result is None else result


# -- sections -------------------------------------------------------------------

@dataclass(frozen=True)
class CertifiedRegion:
    """A product set of (row, column) positions of a ball.

    ``rows`` and ``cols`` are boolean masks over the ball; an entry
    ``(i, j)`` is certified when both flags are set.
    """

    ball: Ball
    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def radii(cls, ball: Ball, row_radius: int | None = None, col_radius: int | None = None):
        r = np.ones(len(ball), bool) if row_radius is None else ball.lengths <= row_radius
        c = np.ones(len(ball), bool) if col_radius is None else ball.lengths <= col_radius
        return cls(ball, r, c)

    @classmethod
    def full(cls, ball: Ball):
        return cls.radii(ball)

    def contains(self, i: int, j: int) -> bool:
        return bool(self.rows[i] and self.cols[j])

    def mask(self) -> np.ndarray:
        return np.logical_and.outer(self.rows, self.cols)

    def meet(self, other: "CertifiedRegion") -> "CertifiedRegion":
        if other.ball is not self.ball:
            raise ValueError("regions over different balls")
        return CertifiedRegion(self.ball, self.rows & other.rows, self.cols & other.cols)

    @property
    def empty(self) -> bool:
        return not (self.rows.any() and self.cols.any())


@dataclass
class DenseSection:
    """Entries ``A(x, y)`` for ``x, y`` in a ball (rows by columns)."""

    ball: Ball
    entries: np.ndarray
    certified: CertifiedRegion | None = None
    hermitian: bool | None = None

    def __post_init__(self):
        n = len(self.ball)
        if self.entries.shape != (n, n):
            raise ValueError(f"section of {self.ball} must be {n}x{n}")
        if self.certified is None:
            self.certified = CertifiedRegion.full(self.ball)
        if self.hermitian:
            if not np.array_equal(self.entries, self.entries.conj().T):
                raise ValueError("entries are not Hermitian")


@dataclass
class VectorSection:
    """A vector indexed by a ball."""

    ball: Ball
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.ball),):
            raise ValueError(f"vector on {self.ball} must have length {len(self.ball)}")

    def norm(self, p=2) -> float:
        a = np.abs(self.values)
        if p == 1:
            return math.fsum(a)
        if p == 2:
            return math.sqrt(math.fsum(a * a))
        if p in (np.inf, "inf"):
            return float(a.max(initial=0.0))
        raise ValueError("p must be 1, 2 or inf")

    def abs_envelope(self) -> Envelope:
        return Envelope.from_array(self.ball, np.abs(self.values), radius=self.ball.group.max_radius)


def to_dense(a: CDMatrix, ball: Ball) -> DenseSection:
    """Section of ``a`` on ``ball``: ``A(x, y) = m_{x y^-1}(y)``."""
    if ball.group != a.group:
        raise GroupMismatch("ball belongs to a different group")
    n_cols = min(len(ball), a.data.shape[1])
    rows = product_index(a.group, a.diag_ball, ball.elements[:n_cols] if not ball.group.vectorized
                         else ball.coords[:n_cols], ball)
    out = np.zeros((len(ball), len(ball)), dtype=complex)
    zi, yj = np.nonzero(rows >= 0)
    out[rows[zi, yj], yj] = a.data[zi, yj]
    region = CertifiedRegion.radii(ball, None, a.certified)
    return DenseSection(ball, out, region)


def from_dense(section: DenseSection) -> CDMatrix:
    """Side-diagonal decomposition ``m_z(y) = M(z y, y)`` of a section."""
    ball = section.ball
    spec = ball.group
    dball = _ball(spec, 2 * ball.radius)
    z = product_index(spec, ball, ball, dball, invert_right=True)   # x y^-1
    data = np.zeros((len(dball), len(ball)), dtype=complex)
    cols = np.broadcast_to(np.arange(len(ball)), z.shape)
    data[z, cols] = section.entries
    return CDMatrix(spec, data, row_radius=ball.radius)


def section_operator(a: CDMatrix, ball: Ball) -> CDMatrix:
    """``P A P`` for the coordinate projection ``P`` onto ``ball``, as an exact object."""
    return from_dense(to_dense(a, ball))


def apply(a: CDMatrix, c: VectorSection) -> tuple[VectorSection, CertifiedRegion]:
    """``(A c)(x) = sum_y A(x, y) c(y)`` for ``x`` in ``c.ball``.

    The returned region marks the rows whose defining sum only involves
    columns inside the ball (and inside the certified columns of ``a``).
    """
    ball = c.ball
    spec = a.group
    if ball.group != spec:
        raise GroupMismatch("vector lives on a different group")
    # src[z, x] = position of z^-1 x
    src = product_index(spec, a.diag_ball, ball, ball, invert_left=True)
    ncol = a.data.shape[1]
    data = np.concatenate([a.data, np.zeros((a.data.shape[0], 1))], axis=1)
    vals = np.concatenate([c.values, [0.0]])
    col = np.where((src >= 0) & (src < ncol), src, ncol)
    terms = data[np.arange(len(data))[:, None], col] * vals[src]
    out = terms.sum(axis=0)
    active = np.any(a.data != 0, axis=1)
    limit = len(ball) if a.certified is None else min(len(ball), ball.size_of(a.certified))
    ok = (src[active] >= 0) & (src[active] < limit)
    rows = np.all(ok, axis=0)
    region = CertifiedRegion(ball, rows, np.ones(len(ball), bool))
    return VectorSection(ball, out), region


def product_region(h: CDMatrix, f: CDMatrix, ball: Ball) -> CertifiedRegion:
    """Entries where ``to_dense(h) @ to_dense(f)`` on ``ball`` is exact.

    A column ``y`` is complete when every intermediate index ``w y`` with
    ``w`` a diagonal of ``f`` lies inside the ball.
    """
    return CertifiedRegion.radii(ball, None, ball.radius - f.K)


def random_cdmatrix(group: GroupSpec, diag_radius: int, col_radius: int, rng,
                    density: float = 1.0, hermitian: bool = False) -> CDMatrix:
    """Random complex diagonals on ``B_K x B_N`` (test and verification helper).

    With ``hermitian=True`` the result is ``(A + A*) / 2`` for such an ``A``.
    """
    K = len(_ball(group, diag_radius))
    N = len(_ball(group, col_radius))
    data = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    if density < 1.0:
        data *= rng.random((K, N)) < density
    a = CDMatrix(group, data)
    if hermitian:
        a = scale(0.5, add(a, adjoint(a)))
    return a
