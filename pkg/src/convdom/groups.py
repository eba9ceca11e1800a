"""Finitely generated discrete groups as computable objects.

Three families are shipped:

* ``Z<d>``  -- the integer lattice with the standard generators ``±e_i``;
* ``H3``    -- the discrete Heisenberg group of unitriangular integer
  matrices ``[[1, a, c], [0, 1, b], [0, 0, 1]]`` encoded as ``(a, b, c)``
  and generated by ``x = (1, 0, 0)``, ``y = (0, 1, 0)`` and their inverses;
* ``F2``    -- the free group on two letters, elements are reduced words
  of signed generator indices (``1, -1, 2, -2``).

Elements are plain integer tuples.  Balls are enumerated in the canonical
order ``(word length, lexicographic coordinates)`` so that ``B_m`` is a
prefix of ``B_n`` whenever ``m <= n``.
"""
from __future__ import annotations

import itertools
import threading
from collections.abc import Iterable, Sequence

import numpy as np

Element = tuple[int, ...]

LATTICE = "lattice"
HEISENBERG = "heisenberg"
FREE = "free"

DEFAULT_MAX_RADIUS = {LATTICE: 12, HEISENBERG: 10, FREE: 6}

# coordinate packing for vectorized lookup, |coord| < 2**20
_OFFSET = 1 << 20
_BASE = 1 << 21


class GroupError(ValueError):
    """Base class for usage errors raised by the group kernel."""


class GroupMismatch(GroupError):
    pass


class OutOfRadius(GroupError):
    """Raised when a word length cannot be certified within the radius budget."""


class HypothesisViolation(GroupError):
    """The group lacks polynomial growth and no override was given."""


class ResourceLimit(RuntimeError):
    def __init__(self, message, partial_size=None):
        super().__init__(message)
        self.partial_size = partial_size


class GroupSpec:
    """A finitely generated group together with its symmetric generating set.

    Parameters
    ----------
    kind : {"lattice", "heisenberg", "free"}
    dim : int, optional
        Rank of the lattice; ignored for the other kinds.
    max_radius : int, optional
        Budget for ball enumeration and breadth-first word lengths.

    Two specs compare equal when they describe the same group, regardless
    of their radius budgets.
    """

    def __init__(self, kind: str, dim: int | None = None, max_radius: int | None = None):
        if kind == LATTICE:
            if dim is None or dim < 1:
                raise GroupError("lattice rank must be a positive integer")
            self.dim = int(dim)
        elif kind == HEISENBERG:
            self.dim = 3
        elif kind == FREE:
            self.dim = None
        else:
            raise GroupError(f"unknown group kind {kind!r}")
        self.kind = kind
        self.max_radius = DEFAULT_MAX_RADIUS[kind] if max_radius is None else int(max_radius)
        if self.max_radius < 0:
            raise GroupError("max_radius must be nonnegative")
        self._lock = threading.Lock()
        self._balls: dict[int, Ball] = {}
        # breadth-first layers (Heisenberg and free group)
        self._lengths: dict[Element, int] = {self.identity: 0}
        self._layers: list[list[Element]] = [[self.identity]]

    # -- identity and naming -------------------------------------------------

    @property
    def name(self) -> str:
        if self.kind == LATTICE:
            return f"Z{self.dim}"
        return "H3" if self.kind == HEISENBERG else "F2"

    def __repr__(self):
        return f"GroupSpec({self.name}, max_radius={self.max_radius})"

    def __eq__(self, other):
        if not isinstance(other, GroupSpec):
            return NotImplemented
        return (self.kind, self.dim) == (other.kind, other.dim)

    def __hash__(self):
        return hash((self.kind, self.dim))

    def __getstate__(self):
        return {"kind": self.kind, "dim": self.dim, "max_radius": self.max_radius}

    def __setstate__(self, state):
        self.__init__(state["kind"], state["dim"], state["max_radius"])

    def with_max_radius(self, max_radius: int) -> "GroupSpec":
        return GroupSpec(self.kind, self.dim, max_radius)

    @property
    def polynomial_growth(self) -> bool:
        return self.kind != FREE

    @property
    def vectorized(self) -> bool:
        """True when elements are fixed-length coordinate vectors."""
        return self.kind != FREE

    @property
    def identity(self) -> Element:
        if self.kind == LATTICE:
            return (0,) * self.dim
        if self.kind == HEISENBERG:
            return (0, 0, 0)
        return ()

    @property
    def generators(self) -> tuple[Element, ...]:
        """Symmetric generating set ``U`` (identity not included)."""
        if self.kind == LATTICE:
            gens = []
            for i in range(self.dim):
                for s in (1, -1):
                    e = [0] * self.dim
                    e[i] = s
                    gens.append(tuple(e))
            return tuple(gens)
        if self.kind == HEISENBERG:
            return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))
        return ((1,), (-1,), (2,), (-2,))

    # -- element arithmetic --------------------------------------------------

    def check(self, g) -> Element:
        g = tuple(int(v) for v in g)
        if self.kind == FREE:
            if any(v not in (1, -1, 2, -2) for v in g):
                raise GroupError(f"{g} is not a word in the letters ±1, ±2")
            if any(a == -b for a, b in zip(g, g[1:])):
                raise GroupError(f"{g} is not a reduced word")
        elif len(g) != self.dim:
            raise GroupError(f"{g} is not an element of {self.name}")
        return g

    def mul(self, g: Element, h: Element) -> Element:
        if self.kind == LATTICE:
            return tuple(a + b for a, b in zip(g, h))
        if self.kind == HEISENBERG:
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
        # free reduction
        k = 0
        n = min(len(g), len(h))
        while k < n and g[len(g) - 1 - k] == -h[k]:
            k += 1
        return g[: len(g) - k] + h[k:]

    def inv(self, g: Element) -> Element:
        if self.kind == LATTICE:
            return tuple(-a for a in g)
        if self.kind == HEISENBERG:
            a, b, c = g
            return (-a, -b, a * b - c)
        return tuple(-v for v in reversed(g))

    def power(self, g: Element, n: int) -> Element:
        if n < 0:
            g, n = self.inv(g), -n
        out = self.identity
        base = g
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def sort_key(self, g: Element):
        return (self.word_length(g), g)

    def sorted(self, elements: Iterable[Element]) -> list[Element]:
        return sorted(elements, key=self.sort_key)

    # vectorized arithmetic on integer coordinate arrays (..., dim)
    def mul_arrays(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.kind == LATTICE:
            return g + h
        if self.kind == HEISENBERG:
            g, h = np.broadcast_arrays(g, h)
            out = g + h
            out[..., 2] += g[..., 0] * h[..., 1]
            return out
        raise GroupError("free group elements are not coordinate vectors")

    def inv_arrays(self, g: np.ndarray) -> np.ndarray:
        if self.kind == LATTICE:
            return -g
        if self.kind == HEISENBERG:
            out = -g
            out[..., 2] = g[..., 0] * g[..., 1] - g[..., 2]
            return out
        raise GroupError("free group elements are not coordinate vectors")

    # -- word metric ---------------------------------------------------------

    def word_length(self, g: Element) -> int:
        """Length of ``g`` in the word metric of the standard generators.

        Closed forms are used for the lattice (taxicab norm), the free
        group (reduced word length) and Heisenberg elements ``(a, b, 0)`` or
        ``(a, b, ab)``; other Heisenberg lengths come from memoized
        breadth-first layers and raise :class:`OutOfRadius` past the budget.
        """
        if self.kind == LATTICE:
            return sum(abs(v) for v in g)
        if self.kind == FREE:
            return len(g)
        n = self._lengths.get(g)
        if n is not None:
            return n
        a, b, c = g
        if c == 0 or c == a * b:
            # b^b a^a and a^a b^b meet the abelianization bound |a| + |b|
            return abs(a) + abs(b)
        # cheap lower bound before growing the layers
        if abs(g[0]) + abs(g[1]) > self.max_radius:
            raise OutOfRadius(f"{g} lies outside B_{self.max_radius} of {self.name}")
        self._grow_layers(self.max_radius, stop_at=g)
        n = self._lengths.get(g)
        if n is None:
            raise OutOfRadius(f"{g} lies outside B_{self.max_radius} of {self.name}")
        return n

    def _grow_layers(self, radius: int, stop_at: Element | None = None):
        with self._lock:
            gens = self.generators
            while len(self._layers) <= radius:
                if stop_at is not None and stop_at in self._lengths:
                    return
                n = len(self._layers)
                layer = []
                for g in self._layers[-1]:
                    for u in gens:
                        h = self.mul(g, u)
                        if h not in self._lengths:
                            self._lengths[h] = n
                            layer.append(h)
                self._layers.append(layer)

    # -- balls ---------------------------------------------------------------

    def ball(self, n: int) -> "Ball":
        return ball(self, n)

    def sphere_size(self, n: int) -> int:
        b = self.ball(n)
        return len(b) - (len(self.ball(n - 1)) if n > 0 else 0)

    # -- serialization -------------------------------------------------------

    def format_element(self, g: Element) -> str:
        return ",".join(str(v) for v in g)

    def parse_element(self, text: str) -> Element:
        text = text.strip()
        if not text:
            return self.check(())
        return self.check(int(v) for v in text.split(","))


class Ball:
    """The word-metric ball ``B_n``, canonically ordered.

    Attributes
    ----------
    group : GroupSpec
    radius : int
    elements : tuple of Element
    lengths : ndarray of int
        Word length of every element, nondecreasing.
    coords : ndarray of int, shape (len, dim) or None
        Coordinates for vectorized groups.
    """

    def __init__(self, group: GroupSpec, radius: int, elements: Sequence[Element], lengths):
        self.group = group
        self.radius = int(radius)
        self.elements = tuple(elements)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.lengths.setflags(write=False)
        self.index = {g: i for i, g in enumerate(self.elements)}
        if group.vectorized:
            self.coords = np.array(self.elements, dtype=np.int64).reshape(len(self.elements), group.dim)
            self.coords.setflags(write=False)
            keys = _pack(self.coords)
            self._order = np.argsort(keys, kind="stable")
            self._sorted_keys = keys[self._order]
            self._lo = self.coords.min(axis=0)
            self._hi = self.coords.max(axis=0)
        else:
            self.coords = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g):
        return tuple(g) in self.index

    def __getitem__(self, i):
        return self.elements[i]

    def __repr__(self):
        return f"Ball({self.group.name}, n={self.radius}, size={len(self)})"

    def position(self, g: Element) -> int:
        return self.index[tuple(g)]

    def size_of(self, radius: int) -> int:
        """Number of elements of length <= radius (a prefix length)."""
        return int(np.searchsorted(self.lengths, radius, side="right"))

    def sphere_slice(self, k: int) -> slice:
        lo = int(np.searchsorted(self.lengths, k, side="left"))
        hi = int(np.searchsorted(self.lengths, k, side="right"))
        return slice(lo, hi)

    def locate(self, coords: np.ndarray) -> np.ndarray:
        """Positions of the given coordinate vectors, ``-1`` where absent."""
        coords = np.asarray(coords, dtype=np.int64)
        shape = coords.shape[:-1]
        flat = coords.reshape(-1, coords.shape[-1])
        out = np.full(len(flat), -1, dtype=np.int64)
        # only points inside the bounding box can be members
        cand = np.flatnonzero(np.all((flat >= self._lo) & (flat <= self._hi), axis=1))
        keys = _pack(flat[cand])
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        found = self._sorted_keys[pos] == keys
        out[cand[found]] = self._order[pos[found]]
        return out.reshape(shape)

    def locate_elements(self, elements: Iterable[Element]) -> np.ndarray:
        get = self.index.get
        return np.fromiter((get(g, -1) for g in elements), dtype=np.int64)


def _pack(coords: np.ndarray) -> np.ndarray:
    key = np.zeros(coords.shape[0], dtype=np.int64)
    for j in range(coords.shape[1]):
        key = key * _BASE + (coords[:, j] + _OFFSET)
    return key


_BALL_SIZE_LIMIT = 2_000_000


def ball(spec: GroupSpec, n: int) -> Ball:
    """Enumerate ``B_n`` for ``spec`` (cached per spec instance)."""
    n = int(n)
    if n < 0:
        raise GroupError("radius must be nonnegative")
    cached = spec._balls.get(n)
    if cached is not None:
        return cached
    if n > spec.max_radius:
        raise OutOfRadius(f"B_{n} exceeds the radius budget {spec.max_radius} of {spec.name}")
    if spec.kind == LATTICE:
        elements = _lattice_ball(spec.dim, n)
    else:
        spec._grow_layers(n)
        elements = []
        for layer in spec._layers[: n + 1]:
            elements.extend(sorted(layer))
            if len(elements) > _BALL_SIZE_LIMIT:
                raise ResourceLimit(f"B_{n} of {spec.name} exceeds {_BALL_SIZE_LIMIT} elements",
                                    partial_size=len(elements))
    lengths = [spec.word_length(g) for g in elements]
    b = Ball(spec, n, elements, lengths)
    with spec._lock:
        spec._balls.setdefault(n, b)
    return spec._balls[n]


def _lattice_ball(dim: int, n: int) -> list[Element]:
    # |B_n| grows like n^dim; refuse before materializing the cube
    if (2 * n + 1) ** dim > 50 * _BALL_SIZE_LIMIT:
        raise ResourceLimit(f"B_{n} of Z{dim} is too large to enumerate")
    out = [g for g in itertools.product(range(-n, n + 1), repeat=dim)
           if sum(abs(v) for v in g) <= n]
    if len(out) > _BALL_SIZE_LIMIT:
        raise ResourceLimit(f"B_{n} of Z{dim} exceeds {_BALL_SIZE_LIMIT} elements",
                            partial_size=len(out))
    out.sort(key=lambda g: (sum(abs(v) for v in g), g))
    return out


def product_index(spec: GroupSpec, left, right, target: Ball,
                  invert_left: bool = False, invert_right: bool = False) -> np.ndarray:
    """Positions in ``target`` of all products ``l * r``.

    ``left`` and ``right`` are balls or element sequences.  Returns an
    integer array of shape ``(len(left), len(right))`` with ``-1`` wherever
    the product falls outside ``target``.
    """
    if target.group != spec:
        raise GroupMismatch("target ball belongs to a different group")
    if spec.vectorized:
        lc = _coords(spec, left)
        rc = _coords(spec, right)
        if invert_left:
            lc = spec.inv_arrays(lc)
        if invert_right:
            rc = spec.inv_arrays(rc)
        prod = spec.mul_arrays(lc[:, None, :], rc[None, :, :])
        return target.locate(prod)
    le = list(left)
    re_ = list(right)
    if invert_left:
        le = [spec.inv(g) for g in le]
    if invert_right:
        re_ = [spec.inv(g) for g in re_]
    get = target.index.get
    out = np.empty((len(le), len(re_)), dtype=np.int64)
    for i, g in enumerate(le):
        for j, h in enumerate(re_):
            out[i, j] = get(spec.mul(g, h), -1)
    return out


def _coords(spec: GroupSpec, items) -> np.ndarray:
    if isinstance(items, Ball):
        return items.coords
    if isinstance(items, np.ndarray):
        return items.reshape(-1, spec.dim)
    arr = np.array([tuple(g) for g in items], dtype=np.int64)
    return arr.reshape(len(arr), spec.dim)


def growth_fit(sizes: Sequence[tuple[int, int]], method: str = "centered",
               min_radius: int = 2, min_points: int = 4) -> float:
    """Fit the polynomial growth degree ``D`` in ``|B_n| ~ C n^D``.

    Parameters
    ----------
    sizes : sequence of (n, |B_n|)
        At least ``min_points`` points with ``n >= min_radius`` (default
        four points with ``n >= 2``).
    method : {"centered", "raw"}
        ``"raw"`` regresses ``log|B_n|`` on ``log n``.  ``"centered"``
        regresses on ``log(n + 1/2)``, which removes the leading finite-size
        bias of balls that contain their center (for ``Z`` the fit is exact).

    Returns
    -------
    float
        Least-squares slope.
    """
    pts = [(int(n), float(s)) for n, s in sizes if int(n) >= max(1, min_radius)]
    if len(pts) < max(2, min_points):
        raise ValueError(f"growth_fit needs at least {min_points} radii >= {min_radius}, "
                         f"got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    s = np.array([p[1] for p in pts])
    if method == "centered":
        x = np.log(n + 0.5)
    elif method == "raw":
        x = np.log(n)
    else:
        raise ValueError(f"unknown growth_fit method {method!r}")
    slope, _ = np.polyfit(x, np.log(s), 1)
    return float(slope)


def parse_group(text: str, max_radius: int | None = None,
                allow_out_of_hypothesis: bool = False) -> GroupSpec:
    """Parse ``"Z1"``, ``"Z2"``, ``"Z3"``, ``"H3"`` or ``"F2"``."""
    t = text.strip().upper()
    if t == "H3":
        spec = GroupSpec(HEISENBERG, max_radius=max_radius)
    elif t == "F2":
        spec = GroupSpec(FREE, max_radius=max_radius)
    elif t.startswith("Z") and t[1:].isdigit() and int(t[1:]) >= 1:
        spec = GroupSpec(LATTICE, int(t[1:]), max_radius=max_radius)
    else:
        raise GroupError(f"unknown group {text!r}; expected Z<d>, H3 or F2")
    require_hypotheses(spec, allow_out_of_hypothesis)
    return spec


def require_hypotheses(spec: GroupSpec, allow_out_of_hypothesis: bool = False):
    """Reject groups without polynomial growth unless explicitly allowed."""
    if not spec.polynomial_growth and not allow_out_of_hypothesis:
        raise HypothesisViolation(
            f"{spec.name} is not amenable and has exponential growth; "
            "pass allow_out_of_hypothesis=True to run it anyway")


def Z(d: int, max_radius: int | None = None) -> GroupSpec:
    return GroupSpec(LATTICE, d, max_radius)


def H3(max_radius: int | None = None) -> GroupSpec:
    return GroupSpec(HEISENBERG, max_radius=max_radius)


def F2(max_radius: int | None = None) -> GroupSpec:
    return GroupSpec(FREE, max_radius=max_radius)
