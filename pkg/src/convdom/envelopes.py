"""Envelopes (finitely supported dominating sequences) and weights.

An :class:`Envelope` is a nonnegative function on the group with finite
support.  A :class:`Weight` is a submultiplicative, symmetric function
``w >= 1`` with ``w(e) = 1``; the diagnostics below probe the growth
conditions on weights used for weighted inverse-closedness.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .groups import Ball, Element, GroupMismatch, GroupSpec, OutOfRadius


class TruncationError(ValueError):
    """An exact result would need values outside the configured ball."""


class Envelope:
    """A finitely supported nonnegative function ``a: G -> [0, inf)``.

    Parameters
    ----------
    group : GroupSpec
    values : mapping Element -> float
        Zero entries are dropped.
    radius : int, optional
        Support bound; defaults to the group's radius budget.
    """

    def __init__(self, group: GroupSpec, values: Mapping[Element, float], radius: int | None = None):
        self.group = group
        self.radius = group.max_radius if radius is None else int(radius)
        clean = {}
        for g, v in values.items():
            v = float(v)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"envelope value at {g} must be finite and >= 0, got {v}")
            if v == 0.0:
                continue
            g = group.check(g)
            try:
                n = group.word_length(g)
            except OutOfRadius as exc:
                raise TruncationError(str(exc)) from None
            if n > self.radius:
                raise TruncationError(f"{g} (length {n}) lies outside B_{self.radius}")
            clean[g] = v
        self._values = {g: clean[g] for g in group.sorted(clean)}

    @classmethod
    def delta(cls, group: GroupSpec, g: Element | None = None, value: float = 1.0, radius=None):
        g = group.identity if g is None else tuple(g)
        return cls(group, {g: value}, radius)

    @classmethod
    def from_array(cls, ball: Ball, values, radius=None):
        values = np.asarray(values, dtype=float)
        return cls(ball.group, {g: v for g, v in zip(ball.elements, values) if v != 0.0}, radius)

    def __getitem__(self, g) -> float:
        return self._values.get(tuple(g), 0.0)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f"Envelope({self.group.name}, support={len(self)}, l1={self.l1_norm():.6g})"

    def items(self):
        return self._values.items()

    def support(self) -> list[Element]:
        return list(self._values)

    @property
    def support_radius(self) -> int:
        if not self._values:
            return 0
        return max(self.group.word_length(g) for g in self._values)

    def to_array(self, ball: Ball) -> np.ndarray:
        out = np.zeros(len(ball))
        for g, v in self._values.items():
            i = ball.index.get(g)
            if i is None:
                raise TruncationError(f"{g} is outside {ball}")
            out[i] = v
        return out

    def l1_norm(self) -> float:
        return math.fsum(self._values.values())

    def l1w_norm(self, weight: "Weight") -> float:
        return math.fsum(v * weight(self.group, g) for g, v in self._values.items())

    def tail_sums(self, weight: "Weight | None" = None) -> np.ndarray:
        """``t_m = sum_{|z| > m} a(z) w(z)`` for ``m = 0 .. support radius``."""
        b = sphere_sums(self, weight)
        tails = np.array([math.fsum(b[m + 1:]) for m in range(len(b))])
        return tails

    def allclose(self, other: "Envelope", atol=0.0, rtol=0.0) -> bool:
        keys = set(self._values) | set(other._values)
        return all(math.isclose(self[g], other[g], abs_tol=atol, rel_tol=rtol) for g in keys)


def convolve(a: Envelope, b: Envelope) -> Envelope:
    """``(a * b)(x) = sum_y a(x y^-1) b(y)`` over the finite supports."""
    if a.group != b.group:
        raise GroupMismatch("envelopes live on different groups")
    spec = a.group
    radius = max(a.radius, b.radius)
    acc: dict[Element, list[float]] = {}
    for g, u in a.items():
        for h, v in b.items():
            acc.setdefault(spec.mul(g, h), []).append(u * v)
    out = {x: math.fsum(terms) for x, terms in acc.items()}
    try:
        return Envelope(spec, out, radius)
    except TruncationError as exc:
        raise TruncationError(f"convolution support exceeds B_{radius}: {exc}") from None


def l1_norm(a: Envelope) -> float:
    return a.l1_norm()


def l1w_norm(a: Envelope, weight: "Weight") -> float:
    return a.l1w_norm(weight)


def sphere_sums(a: Envelope, weight: "Weight | None" = None) -> np.ndarray:
    """Group the mass of ``a`` by word-length spheres.

    ``b[k]`` is the sum of ``a(z)`` (times ``w(z)`` if a weight is given)
    over ``|z| = k``; ``b[0]`` covers the identity.  Applied to the
    envelope of a CD matrix, ``sum(b)`` is its CD norm.
    """
    spec = a.group
    by_len: dict[int, list[float]] = {}
    for g, v in a.items():
        w = 1.0 if weight is None else weight(spec, g)
        by_len.setdefault(spec.word_length(g), []).append(v * w)
    k_max = max(by_len, default=0)
    return np.array([math.fsum(by_len.get(k, [])) for k in range(k_max + 1)])


# -- weights -----------------------------------------------------------------

_KINDS = ("const", "poly", "subexp", "exp", "prodz2")


@dataclass(frozen=True)
class Weight:
    """Parametric weight families.

    ``const``  -- ``w = 1``;
    ``poly``   -- ``(1 + |g|)^s``;
    ``subexp`` -- ``exp(c |g|^beta)``, ``0 < beta < 1``;
    ``exp``    -- ``exp(c |g|)``;
    ``prodz2`` -- ``(1 + |k1|)^s`` on ``Z^2`` (first coordinate only).

    ``|g|`` is the word length.  Call as ``w(group, g)``.
    """

    kind: str = "const"
    s: float = 0.0
    c: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("poly", "prodz2") and not self.s >= 0:
            raise ValueError("weight exponent s must be >= 0")
        if self.kind in ("subexp", "exp") and not self.c > 0:
            raise ValueError("weight rate c must be > 0")
        if self.kind == "subexp" and not 0 < self.beta < 1:
            raise ValueError("subexponential beta must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "Weight":
        """Parse ``"const"``, ``"poly:s=2"``, ``"subexp:c=0.5,beta=0.5"``,
        ``"exp:c=0.7"`` or ``"prodz2:s=2"``."""
        kind, _, rest = text.strip().partition(":")
        params = {}
        for part in filter(None, (p.strip() for p in rest.split(","))):
            key, eq, val = part.partition("=")
            if not eq or key.strip() not in ("s", "c", "beta"):
                raise ValueError(f"bad weight parameter {part!r} in {text!r}")
            params[key.strip()] = float(val)
        return cls(kind.strip().lower(), **params)

    def __str__(self):
        if self.kind == "const":
            return "const"
        if self.kind in ("poly", "prodz2"):
            return f"{self.kind}:s={self.s:g}"
        if self.kind == "exp":
            return f"exp:c={self.c:g}"
        return f"subexp:c={self.c:g},beta={self.beta:g}"

    @property
    def length_based(self) -> bool:
        return self.kind != "prodz2"

    def profile(self, n) -> np.ndarray | float:
        """Value as a function of word length (length-based kinds only)."""
        n = np.asarray(n, dtype=float)
        if self.kind == "const":
            out = np.ones_like(n)
        elif self.kind == "poly":
            out = (1.0 + n) ** self.s
        elif self.kind == "subexp":
            out = np.exp(self.c * n ** self.beta)
        elif self.kind == "exp":
            out = np.exp(self.c * n)
        else:
            raise ValueError("prodz2 is not a function of word length")
        return float(out) if out.ndim == 0 else out

    def __call__(self, group: GroupSpec, g: Element) -> float:
        if self.kind == "prodz2":
            _require_z2(group)
            return (1.0 + abs(g[0])) ** self.s
        return self.profile(group.word_length(g))

    def on_ball(self, ball: Ball) -> np.ndarray:
        if self.kind == "prodz2":
            _require_z2(ball.group)
            return (1.0 + np.abs(ball.coords[:, 0])) ** self.s
        return np.asarray(self.profile(ball.lengths), dtype=float)


def _require_z2(group: GroupSpec):
    if group.name != "Z2":
        raise ValueError("the product weight is defined on Z2 only")


# -- diagnostics -------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Diagnostic:
    """A finite sequence probing a limit, with a heuristic verdict."""

    values: np.ndarray
    verdict: str
    method: str = "enumerate"


def verdict_for(seq) -> str:
    """Heuristic verdict for sequences expected to tend to 1.

    Pass when the last quarter is strictly decreasing (or identically 1)
    and ends below 1.05; fail when that tail stays >= 1.1.  A finite
    sequence proves nothing about the limit, so these are thresholds only.
    """
    seq = np.asarray(seq, dtype=float)
    tail = seq[-max(2, len(seq) // 4):]
    if np.all(tail == 1.0):
        return PASS
    if np.all(np.diff(tail) < 0) and tail[-1] < 1.05:
        return PASS
    if np.min(tail) >= 1.1:
        return FAIL
    return INCONCLUSIVE


def grs_diagnostic(weight: Weight, group: GroupSpec, x: Element, N: int = 1000) -> Diagnostic:
    """The sequence ``w(x^n)^(1/n)``, ``n = 1..N``."""
    if N < 10:
        raise ValueError("grs_diagnostic needs N >= 10")
    x = group.check(x)
    vals = np.empty(N)
    p = group.identity
    for n in range(1, N + 1):
        p = group.mul(p, x)
        vals[n - 1] = weight(group, p) ** (1.0 / n)
    return Diagnostic(vals, verdict_for(vals), "powers")


def ugrs_diagnostic(weight: Weight, group: GroupSpec, N: int = 1000,
                    method: str = "auto") -> Diagnostic:
    """The sequence ``sup_{U^n} w^(1/n)`` with ``U`` = generators plus identity.

    ``method="enumerate"`` takes the sup over the enumerated ball ``B_n``;
    ``"closed"`` uses the sup in closed form.  For length-based weights
    the sup over ``B_n`` is the profile at length ``n`` (profiles are
    nondecreasing and every sphere of an infinite group is nonempty).  The
    product weight on ``Z^2`` is evaluated for the generating set
    ``{-1, 0, 1} x Z`` where the sup over ``U^n`` is ``(1 + n)^s``.
    ``"auto"`` enumerates within the radius budget and uses closed forms
    otherwise (always for the product weight).
    """
    n = np.arange(1, N + 1)
    if method == "auto":
        closed = weight.kind == "prodz2" or N > group.max_radius
        method = "closed" if closed else "enumerate"
    if method == "closed":
        if weight.kind == "prodz2":
            _require_z2(group)
            sup = (1.0 + n) ** weight.s
        else:
            sup = weight.profile(n)
    elif method == "enumerate":
        b = group.ball(N)
        w = weight.on_ball(b)
        sup = np.array([w[: b.size_of(k)].max() for k in n])
    else:
        raise ValueError(f"unknown method {method!r}")
    vals = np.asarray(sup, dtype=float) ** (1.0 / n)
    return Diagnostic(vals, verdict_for(vals), method)


@dataclass
class RatioReport:
    """Sphere ratios ``sup / inf`` of a weight over ``U^n \\ U^(n-1)``."""

    ratios: dict[int, float]
    max_ratio: float
    within: bool | None
    skipped: list[int] = field(default_factory=list)
    method: str = "enumerate"


def ratio_condition(weight: Weight, group: GroupSpec, N: int, C: float | None = None) -> RatioReport:
    """Per-sphere ratios and their maximum; compared with ``C`` if given."""
    ratios: dict[int, float] = {}
    skipped: list[int] = []
    if weight.kind == "prodz2":
        # spheres of {-1,0,1} x Z are {|k1| = n} x Z, where w is constant
        _require_z2(group)
        ratios = {n: 1.0 for n in range(1, N + 1)}
        method = "closed"
    else:
        b = group.ball(N)
        w = weight.on_ball(b)
        for n in range(1, N + 1):
            vals = w[b.sphere_slice(n)]
            if len(vals) == 0:
                skipped.append(n)
                continue
            ratios[n] = float(vals.max() / vals.min())
        method = "enumerate"
    max_ratio = max(ratios.values(), default=1.0)
    within = None if C is None else bool(max_ratio <= C)
    return RatioReport(ratios, max_ratio, within, skipped, method)


@dataclass
class InducedWeightZ:
    """The weight ``v(n) = sup_{U^|n|} w`` on the integers, ``|n| <= N``."""

    values: np.ndarray  # v(0), v(1), ..., v(N)

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __call__(self, n: int) -> float:
        n = abs(int(n))
        if n > self.N:
            raise OutOfRadius(f"v({n}) is beyond the tabulated range {self.N}")
        return float(self.values[n])

    def table(self) -> list[tuple[int, float]]:
        return [(n, self(n)) for n in range(-self.N, self.N + 1)]


def induced_weight_v(weight: Weight, group: GroupSpec, N: int) -> InducedWeightZ:
    if weight.kind == "prodz2":
        _require_z2(group)
        vals = (1.0 + np.arange(N + 1)) ** weight.s
    else:
        b = group.ball(N)
        w = weight.on_ball(b)
        vals = np.array([w[: b.size_of(n)].max() for n in range(N + 1)])
    return InducedWeightZ(np.asarray(vals, dtype=float))
