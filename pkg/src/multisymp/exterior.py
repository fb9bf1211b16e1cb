"""Exterior algebra over R^n in coordinates.

p-vectors and p-covectors are stored on the basis of strictly increasing
multi-indices, enumerated lexicographically.  Coordinates given on permuted
index tuples are folded into this canonical form with the permutation sign,
so the antisymmetry relations hold by construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import UnsupportedDegreeError, ZeroSectionError

__all__ = [
    "MultiIndex",
    "KVector",
    "KCovector",
    "GrassmannPoint",
    "multi_indices",
    "index_position",
    "canonicalize_index",
    "wedge_vectors",
    "wedge_product",
    "pair",
    "volume_form",
    "plane_from_bivector",
    "is_decomposable",
    "grassmann_eq",
    "random_decomposable",
]


@dataclass(frozen=True)
class MultiIndex:
    """Strictly increasing tuple of axis labels in 1..n, one basis element of degree p."""

    axes: tuple[int, ...]
    n: int

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if any(a < 1 or a > self.n for a in axes):
            raise ValueError(f"axis labels {axes} out of range 1..{self.n}")
        if any(a >= b for a, b in zip(axes, axes[1:])):
            raise ValueError(f"axis labels {axes} must be strictly increasing")
        if len(axes) > self.n:
            raise ValueError(f"degree {len(axes)} exceeds ambient dimension {self.n}")

    @property
    def p(self) -> int:
        return len(self.axes)

    def label(self) -> str:
        return "".join(str(a) for a in self.axes)


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """All increasing index tuples for (n, p), in lexicographic order."""
    if not 0 < p <= n:
        raise ValueError(f"need 0 < p <= n, got p={p}, n={n}")
    return tuple(itertools.combinations(range(1, n + 1), p))


@lru_cache(maxsize=None)
def index_position(n: int, p: int) -> dict[tuple[int, ...], int]:
    """Map from increasing index tuple to its position in the coordinate array."""
    return {axes: k for k, axes in enumerate(multi_indices(n, p))}


def small_det(matrix: np.ndarray) -> float:
    """Determinant with exact cofactor formulas for orders up to three."""
    k = matrix.shape[0]
    if k == 1:
        return float(matrix[0, 0])
    if k == 2:
        return float(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
    if k == 3:
        return float(
            matrix[0, 0] * (matrix[1, 1] * matrix[2, 2] - matrix[1, 2] * matrix[2, 1])
            - matrix[0, 1] * (matrix[1, 0] * matrix[2, 2] - matrix[1, 2] * matrix[2, 0])
            + matrix[0, 2] * (matrix[1, 0] * matrix[2, 1] - matrix[1, 1] * matrix[2, 0])
        )
    return float(np.linalg.det(matrix))


def canonicalize_index(seq: Sequence[int], n: int) -> tuple[MultiIndex | None, int]:
    """Sort an index tuple and return the permutation sign.

    Returns (None, 0) when an axis repeats (the basis element vanishes).
    """
    axes = tuple(int(a) for a in seq)
    if any(a < 1 or a > n for a in axes):
        raise ValueError(f"axis labels {axes} out of range 1..{n}")
    if len(set(axes)) != len(axes):
        return None, 0
    sign = 1
    work = list(axes)
    # bubble sort; each adjacent swap flips the sign
    for i in range(len(work)):
        for j in range(len(work) - 1 - i):
            if work[j] > work[j + 1]:
                work[j], work[j + 1] = work[j + 1], work[j]
                sign = -sign
    return MultiIndex(tuple(work), n), sign


class _FiberElement:
    """Shared implementation of coordinate arrays over the increasing-index basis."""

    __slots__ = ("n", "p", "coords")

    def __init__(self, n: int, p: int, coords):
        arr = np.asarray(coords, dtype=float).copy()
        expected = math.comb(n, p)
        if arr.shape != (expected,):
            raise ValueError(f"expected {expected} coordinates for (n={n}, p={p}), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def zero(cls, n: int, p: int):
        return cls(n, p, np.zeros(math.comb(n, p)))

    @classmethod
    def from_components(cls, n: int, p: int, components: Mapping[Sequence[int], float]):
        """Build from {index tuple: value}; permuted tuples fold in with their sign."""
        coords = np.zeros(math.comb(n, p))
        pos = index_position(n, p)
        for seq, value in components.items():
            idx, sign = canonicalize_index(seq, n)
            if sign == 0:
                continue
            coords[pos[idx.axes]] += sign * value
        return cls(n, p, coords)

    @classmethod
    def basis(cls, n: int, p: int, axes: Sequence[int]):
        return cls.from_components(n, p, {tuple(axes): 1.0})

    def component(self, seq: Sequence[int]) -> float:
        """Signed coordinate on an arbitrary (possibly permuted) index tuple."""
        idx, sign = canonicalize_index(seq, self.n)
        if sign == 0:
            return 0.0
        return sign * float(self.coords[index_position(self.n, self.p)[idx.axes]])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def is_zero(self) -> bool:
        return bool(np.all(self.coords == 0.0))

    def scaled(self, factor: float):
        return type(self)(self.n, self.p, factor * self.coords)

    def __add__(self, other):
        self._check_compatible(other)
        return type(self)(self.n, self.p, self.coords + other.coords)

    def __sub__(self, other):
        self._check_compatible(other)
        return type(self)(self.n, self.p, self.coords - other.coords)

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, factor: float):
        return self.scaled(float(factor))

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if not isinstance(other, type(self)) or (other.n, other.p) != (self.n, self.p):
            raise ValueError(f"incompatible operands: {self!r} vs {other!r}")

    def __repr__(self):
        vals = ", ".join(f"{axes}:{v:g}" for axes, v in zip(multi_indices(self.n, self.p), self.coords))
        return f"{type(self).__name__}(n={self.n}, p={self.p}, [{vals}])"

    # display helpers for the classic ordered triple on (n, p) = (3, 2):
    # (12, 23, 31), where the 31-coordinate is minus the canonical 13-coordinate.
    def as_cyclic_triple(self) -> tuple[float, float, float]:
        if (self.n, self.p) != (3, 2):
            raise ValueError("cyclic triple display only defined for n=3, p=2")
        c = self.coords
        return float(c[0]), float(c[2]), float(-c[1])

    @classmethod
    def from_cyclic_triple(cls, c12: float, c23: float, c31: float):
        return cls.from_components(3, 2, {(1, 2): c12, (2, 3): c23, (3, 1): c31})


class KVector(_FiberElement):
    """Element of degree p of the exterior power of R^n (a p-vector)."""


class KCovector(_FiberElement):
    """Element of degree p of the exterior power of the dual of R^n (a p-covector)."""

    def __call__(self, vectors: Sequence[np.ndarray]) -> float:
        """Evaluate on p vectors of R^n."""
        return pair(self, wedge_vectors(vectors, n=self.n))


def wedge_vectors(vectors: Sequence[np.ndarray], n: int | None = None) -> KVector:
    """Wedge of p vectors of R^n: coordinates are the p x p minors by row set."""
    cols = [np.asarray(v, dtype=float) for v in vectors]
    if not cols:
        raise ValueError("need at least one vector")
    dim = cols[0].shape[0] if n is None else n
    if any(v.shape != (dim,) for v in cols):
        raise ValueError(f"all vectors must have shape ({dim},)")
    p = len(cols)
    if p > dim:
        raise ValueError(f"cannot wedge {p} vectors in dimension {dim}")
    matrix = np.column_stack(cols)
    coords = np.empty(math.comb(dim, p))
    for k, axes in enumerate(multi_indices(dim, p)):
        rows = [a - 1 for a in axes]
        coords[k] = small_det(matrix[rows, :])
    return KVector(dim, p, coords)


def wedge_product(a: _FiberElement, b: _FiberElement) -> _FiberElement:
    """Graded wedge of two elements of the same variance (degrees add)."""
    if type(a) is not type(b) or a.n != b.n:
        raise ValueError("operands must share type and ambient dimension")
    n = a.n
    p = a.p + b.p
    if p > n:
        raise ValueError(f"wedge degree {p} exceeds ambient dimension {n}")
    out = np.zeros(math.comb(n, p))
    pos = index_position(n, p)
    for axes_a, va in zip(multi_indices(n, a.p), a.coords):
        if va == 0.0:
            continue
        for axes_b, vb in zip(multi_indices(n, b.p), b.coords):
            if vb == 0.0:
                continue
            idx, sign = canonicalize_index(axes_a + axes_b, n)
            if sign != 0:
                out[pos[idx.axes]] += sign * va * vb
    return type(a)(n, p, out)


def pair(alpha: KCovector, u: KVector) -> float:
    """Duality pairing in the canonical bases: sum over increasing indices."""
    if (alpha.n, alpha.p) != (u.n, u.p):
        raise ValueError(f"shape mismatch: covector (n={alpha.n}, p={alpha.p}) vs vector (n={u.n}, p={u.p})")
    return float(alpha.coords @ u.coords)


def volume_form(n: int = 3, scale: float = 1.0) -> KCovector:
    """The top-degree form scale * dx^1 ^ ... ^ dx^n."""
    return KCovector(n, n, [scale])


def plane_from_bivector(u: KVector, omega: KCovector | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Spanning pair of the plane a nonzero bivector in R^3 represents.

    The plane is the kernel of the contraction of u into the volume form; the
    returned basis is oriented so its wedge is a positive multiple of u.
    """
    if (u.n, u.p) != (3, 2):
        raise ValueError("plane extraction is defined for bivectors in R^3")
    if u.is_zero():
        raise ZeroSectionError("zero bivector does not represent a plane")
    if omega is None:
        omega = volume_form(3)
    if (omega.n, omega.p) != (3, 3) or omega.coords[0] == 0.0:
        raise ValueError("omega must be a nonzero volume form on R^3")
    # contraction of u into c*dx1^dx2^dx3 is the 1-form with components
    # c*(y23, y31, y12); its kernel does not depend on c
    y12, y23, y31 = u.as_cyclic_triple()
    normal = np.array([y23, y31, y12])
    normal /= np.linalg.norm(normal)
    seed_axis = np.zeros(3)
    seed_axis[int(np.argmin(np.abs(normal)))] = 1.0
    v1 = seed_axis - (seed_axis @ normal) * normal
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(normal, v1)
    if pair(KCovector(3, 2, wedge_vectors([v1, v2]).coords), u) < 0.0:
        v1, v2 = v2, v1
    return v1, v2


def is_decomposable(u: KVector, tol: float = 1e-9) -> bool:
    """Whether u is (within tol, relative) the wedge of p vectors.

    Degrees 1, n-1 and n are always decomposable; degree 2 is tested through
    the vanishing of u ^ u.  Other degrees are not implemented.
    """
    if u.is_zero():
        raise ZeroSectionError("decomposability is undefined at the zero section")
    if u.p in (1, u.n - 1, u.n):
        return True
    if u.p == 2:
        square = wedge_product(u, u)
        return square.norm() <= tol * u.norm() ** 2
    raise UnsupportedDegreeError(f"decomposability test not implemented for p={u.p}, n={u.n}")


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """Oriented projective class [y] of a nonzero p-vector.

    Classes of decomposable p-vectors are oriented p-planes; ``check`` controls
    whether decomposability is validated at construction.
    """

    representative: KVector

    def __init__(self, representative: KVector, tol: float = 1e-9, check: bool = True):
        if representative.is_zero():
            raise ZeroSectionError("a Grassmann class needs a nonzero representative")
        if check:
            if not is_decomposable(representative, tol=tol):
                raise ValueError("representative is not decomposable within tolerance")
        object.__setattr__(self, "representative", representative)

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray], n: int | None = None) -> "GrassmannPoint":
        w = wedge_vectors(vectors, n=n)
        if w.is_zero():
            raise ZeroSectionError("vectors are linearly dependent")
        return cls(w, check=False)

    def unit_representative(self) -> KVector:
        return self.representative.scaled(1.0 / self.representative.norm())


def grassmann_eq(a: GrassmannPoint, b: GrassmannPoint, tol: float = 1e-9) -> bool:
    """Whether two oriented classes agree: representatives positively proportional."""
    ua = a.unit_representative().coords
    ub = b.unit_representative().coords
    if ua.shape != ub.shape:
        return False
    return bool(np.linalg.norm(ua - ub) <= tol)


def random_decomposable(
    rng: np.random.Generator,
    n: int,
    p: int,
    min_top_fraction: float | None = None,
    max_tries: int = 1000,
) -> KVector:
    """Wedge of p standard-normal vectors, optionally with a dominant positive top coordinate.

    With ``min_top_fraction`` set, resamples until the coordinate on axes
    (1..p) is at least that fraction of the norm, then orients it positive;
    used to stay inside the graph chart.
    """
    for _ in range(max_tries):
        w = wedge_vectors([rng.standard_normal(n) for _ in range(p)])
        norm = w.norm()
        if norm < 1e-9:
            continue
        if min_top_fraction is None:
            return w
        top = w.coords[0]
        if abs(top) >= min_top_fraction * norm:
            return w if top > 0 else -w
    raise RuntimeError("failed to sample a suitable decomposable p-vector")
