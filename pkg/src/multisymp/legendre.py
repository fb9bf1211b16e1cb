"""Fiberwise Legendre transform, its image hypersurface, and convexity checks.

For a degree-1 homogeneous Lagrangian the gradient map y -> dL/dy is
homogeneous of degree 0, so it factors through oriented classes and its image
is a codimension-1 set in the dual fiber.  This module maps to the image,
inverts on the unit level set {L = 1}, samples the image, checks the rank
splitting between the Hessians of L^2 and L, and certifies (by sampling)
that segments between image points stay inside the image of the unit ball.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import InversionError, NotInImageError, ZeroSectionError
from .exterior import GrassmannPoint, KCovector, KVector, multi_indices, pair
from .lagrangian import HomogeneousLagrangian

__all__ = [
    "LegendreImagePoint",
    "LevelSetSampler",
    "RankReport",
    "ConvexityCertificate",
    "legendre_map",
    "hamiltonian",
    "inverse_legendre",
    "sample_image",
    "rank_lemma_check",
    "convexity_certificate",
    "write_image_csv",
]


@dataclass(frozen=True)
class LegendreImagePoint:
    """Dual-fiber point (x, dL/dy(x, y)) together with the oriented source class."""

    x: np.ndarray
    p: KCovector
    source_class: GrassmannPoint


def legendre_map(L: HomogeneousLagrangian, x: np.ndarray, y: KVector) -> LegendreImagePoint:
    """Map (x, y) to (x, dL/dy(x, y)); invariant under positive rescaling of y."""
    x = np.asarray(x, dtype=float)
    grad = L.gradient(x, y)
    return LegendreImagePoint(x=x, p=grad, source_class=GrassmannPoint(y, check=False))


def hamiltonian(L: HomogeneousLagrangian, x: np.ndarray, p: KCovector, y: KVector) -> float:
    """<p, y> - L(x, y); vanishes when p is the gradient image of y."""
    return pair(p, y) - L.value(x, y)


def _normalize_to_level(L: HomogeneousLagrangian, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Rescale coordinates onto {L = 1}; the level value must be positive."""
    level = float(L.value_fn(x, c))
    if not level > 1e-12 * max(1.0, float(np.linalg.norm(c))):
        raise InversionError("iterate collapsed toward the zero section")
    return c / level


def inverse_legendre(
    L: HomogeneousLagrangian,
    x: np.ndarray,
    p: KCovector,
    tol: float = 1e-8,
    max_iter: int = 200,
    initial: KVector | None = None,
) -> GrassmannPoint:
    """Solve dL/dy(x, y) = p for the oriented class [y], normalized to L = 1.

    Projected descent on |dL/dy - p|^2 over the level set {L = 1},
    renormalizing after every step.  Each iteration first tries the
    Gauss-Newton direction of the gradient equation and falls back to the
    steepest-descent direction with a backtracking line search; plain
    gradient steps alone stall well above desk tolerances for anisotropic
    fibers.  Raises NotInImageError when the residual cannot be brought
    below tol, which is the no-solution signal for targets off the image.
    """
    x = np.asarray(x, dtype=float)
    if (p.n, p.p) != (L.n, L.p):
        raise ValueError("covector shape does not match the Lagrangian fiber")
    if initial is not None:
        c = _normalize_to_level(L, x, initial.coords.copy())
    else:
        guess = p.coords.copy()
        if not np.any(guess):
            raise ZeroSectionError("target covector is zero")
        c = _normalize_to_level(L, x, guess)

    def residual(cc: np.ndarray) -> np.ndarray:
        return np.asarray(L.gradient(x, KVector(L.n, L.p, cc)).coords) - p.coords

    def advance(cc: np.ndarray, direction: np.ndarray, f_now: float, required_drop: float):
        step = 1.0
        while step > 1e-14:
            try:
                candidate = _normalize_to_level(L, x, cc + step * direction)
                r_new = residual(candidate)
            except (InversionError, ValueError):
                step *= 0.5
                continue
            f_new = float(r_new @ r_new)
            if f_new <= f_now - step * required_drop:
                return candidate, r_new, f_new
            step *= 0.5
        return None

    r = residual(c)
    f = float(r @ r)
    for _ in range(max_iter):
        if np.sqrt(f) <= tol:
            return GrassmannPoint(KVector(L.n, L.p, c), check=False)
        H = L.hessian(x, KVector(L.n, L.p, c))
        moved = None
        # Gauss-Newton direction; H is singular along the ray, so least squares
        gn = np.linalg.lstsq(H, -r, rcond=1e-12)[0]
        if np.all(np.isfinite(gn)) and gn @ (H @ r) < 0.0:
            moved = advance(c, gn, f, 0.0)
        if moved is None:
            grad_f = 2.0 * (H @ r)  # orthogonal to c since H c = 0
            slope = float(grad_f @ grad_f)
            if slope == 0.0:
                break  # stationary away from the solution: target off the image
            moved = advance(c, -grad_f, f, 1e-4 * slope)
            if moved is None:
                break
        c, r, f = moved
    if np.sqrt(f) <= tol:
        return GrassmannPoint(KVector(L.n, L.p, c), check=False)
    raise NotInImageError(
        f"no preimage within tolerance: residual {np.sqrt(f):.3e} > {tol:.1e}"
    )


@dataclass(frozen=True)
class LevelSetSampler:
    """Draws fiber points on the unit level set {L = 1} or in the ball {L <= 1}."""

    L: HomogeneousLagrangian
    x: np.ndarray
    mode: str = "sphere"

    def __post_init__(self):
        if self.mode not in ("sphere", "ball"):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    def sample(self, count: int, seed: int | np.random.Generator = 0) -> list[KVector]:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        dim = self.L.fiber_dim
        out: list[KVector] = []
        while len(out) < count:
            direction = rng.standard_normal(dim)
            norm = np.linalg.norm(direction)
            if norm < 1e-12:
                continue
            level = float(self.L.value_fn(self.x, direction))
            if not level > 1e-9 * norm:
                continue
            c = direction / level
            if self.mode == "ball":
                c = c * rng.uniform() ** (1.0 / dim)
            out.append(KVector(self.L.n, self.L.p, c))
        return out


def sample_image(
    L: HomogeneousLagrangian, x: np.ndarray, count: int, seed: int = 0
) -> list[LegendreImagePoint]:
    """Image points of uniformly random unit-level directions; deterministic per seed."""
    x = np.asarray(x, dtype=float)
    sampler = LevelSetSampler(L, x, mode="sphere")
    return [legendre_map(L, x, y) for y in sampler.sample(count, np.random.default_rng(seed))]


@dataclass(frozen=True)
class RankReport:
    """Numerical ranks of the fiber Hessians of L^2 and L at one point."""

    rank_L2: int
    rank_L: int
    singular_values_L2: tuple[float, ...]
    singular_values_L: tuple[float, ...]
    threshold: float

    @property
    def splitting_holds(self) -> bool:
        return self.rank_L2 == 1 + self.rank_L


def _numerical_rank(matrix: np.ndarray, threshold: float) -> tuple[int, tuple[float, ...]]:
    svals = np.linalg.svd(matrix, compute_uv=False)
    top = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > threshold * top)) if top > 0.0 else 0
    return rank, tuple(float(s) for s in svals)


def rank_lemma_check(
    L: HomogeneousLagrangian, x: np.ndarray, y: KVector, threshold: float = 1e-8
) -> RankReport:
    """Rank of Hess(L^2) versus 1 + rank(Hess L), by singular values above threshold*sigma_max."""
    x = np.asarray(x, dtype=float)
    rank2, svals2 = _numerical_rank(L.square_hessian(x, y), threshold)
    rank1, svals1 = _numerical_rank(L.hessian(x, y), threshold)
    return RankReport(
        rank_L2=rank2,
        rank_L=rank1,
        singular_values_L2=svals2,
        singular_values_L=svals1,
        threshold=threshold,
    )


@dataclass(frozen=True)
class ConvexityCertificate:
    """Sampled evidence that segments between image points stay inside the image body.

    ``worst_violation`` is the largest radial excess of a segment point over
    the image surface along its own ray, in units of the surface radius;
    failed inversions are recorded separately and count as violations.
    """

    passed: bool
    num_segment_checks: int
    worst_violation: float
    sample_seed: int
    tolerance: float
    num_failures: int = 0


def _radial_excess(L: HomogeneousLagrangian, x: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Solve grad(L^2/2)(y) = target by damped Newton; return (L(y*), y*).

    L(y*) is the radial coordinate of the target relative to the image
    surface: below 1 means inside the image of the unit ball.
    """
    dim = target.size
    norm_t = float(np.linalg.norm(target))
    c = target.copy()
    level = float(L.value_fn(x, c))
    if not abs(level) > 1e-12 * max(1.0, norm_t):
        raise InversionError("cannot seed the radial solve from the target direction")
    c = c / abs(level)  # start on the unit level of |L|
    for _ in range(100):
        yk = KVector(L.n, L.p, c)
        g = L.gradient(x, yk).coords
        level = L.value(x, yk)
        F = level * g - target
        if np.linalg.norm(F) <= 1e-11 * max(1.0, norm_t):
            return level, c
        J = np.outer(g, g) + level * L.hessian(x, yk)
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise InversionError("singular Jacobian in the radial solve") from exc
        # damped update with a residual-decrease line search
        t = 1.0
        f0 = float(F @ F)
        while t > 1e-12:
            c_new = c + t * delta
            try:
                yk_new = KVector(L.n, L.p, c_new)
                g_new = L.gradient(x, yk_new).coords
                level_new = L.value(x, yk_new)
            except (ZeroSectionError, ValueError):
                t *= 0.5
                continue
            F_new = level_new * g_new - target
            if float(F_new @ F_new) < f0:
                c = c_new
                break
            t *= 0.5
        else:
            raise InversionError("radial solve stalled")
    raise InversionError("radial solve did not converge")


def convexity_certificate(
    L: HomogeneousLagrangian,
    x: np.ndarray,
    num_pairs: int = 100,
    t_steps: int = 5,
    seed: int = 0,
    tol: float = 1e-7,
) -> ConvexityCertificate:
    """Sample image-point pairs and check their segments against the image body.

    For each pair and each t on a uniform grid, the segment point is rescaled
    onto the image surface along its ray (confirmed through inverse_legendre)
    and the radial excess is recorded; a nondegenerate Lagrangian keeps every
    excess at numerical zero or below.
    """
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    sampler = LevelSetSampler(L, x, mode="sphere")
    ts = np.linspace(0.0, 1.0, t_steps)
    worst = -np.inf
    failures = 0
    checks = 0
    for _ in range(num_pairs):
        y0, y1 = sampler.sample(2, rng)
        p0 = L.gradient(x, y0).coords
        p1 = L.gradient(x, y1).coords
        for t in ts:
            checks += 1
            target = t * p0 + (1.0 - t) * p1
            if np.linalg.norm(target) < 1e-12:
                continue  # the origin is interior
            try:
                radius, c_star = _radial_excess(L, x, target)
                on_surface = KCovector(L.n, L.p, target / radius)
                inverse_legendre(L, x, on_surface, tol=1e-6, initial=KVector(L.n, L.p, c_star))
            except InversionError:
                failures += 1
                worst = max(worst, 1.0)
                continue
            worst = max(worst, radius - 1.0)
    if not np.isfinite(worst):
        worst = 0.0
    return ConvexityCertificate(
        passed=bool(worst <= tol),
        num_segment_checks=checks,
        worst_violation=float(worst),
        sample_seed=seed,
        tolerance=tol,
        num_failures=failures,
    )


def write_image_csv(
    points: Sequence[LegendreImagePoint], stream: IO[str], n: int | None = None, p: int | None = None
) -> None:
    """One row per image point: base coordinates, then dual coordinates in index order.

    Dimensions are inferred from the points; pass them explicitly to write a
    header-only file for an empty cloud.
    """
    if points:
        n, p = points[0].p.n, points[0].p.p
    elif n is None or p is None:
        raise ValueError("an empty cloud needs explicit dimensions for the header")
    writer = csv.writer(stream)
    header = [f"x{k}" for k in range(1, n + 1)]
    header += ["p" + "".join(map(str, axes)) for axes in multi_indices(n, p)]
    writer.writerow(header)
    for pt in points:
        writer.writerow([repr(float(v)) for v in pt.x] + [repr(float(v)) for v in pt.p.coords])
