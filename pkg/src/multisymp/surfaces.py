"""Discretized parametric p-surfaces in R^n and the three action integrals.

Surfaces are single-chart grids over an axis-aligned parameter rectangle.
Tangent frames live at cell centers and come from averaged corner
differences, which is second-order accurate and needs no boundary cases.
The three actions integrate, respectively, the Lagrangian on the tangent
p-vector, a graph density on the slopes, and the tautological form at the
gradient image; cell contributions are accumulated in a fixed order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateCellError, OrientationError
from .exterior import KVector, multi_indices
from .lagrangian import GraphDensity, HomogeneousLagrangian
from .multisymplectic import TotalSpaceChart, theta

__all__ = [
    "QuadratureConfig",
    "ParametricGrid",
    "GraphSurface",
    "ConvergenceRow",
    "tangent_pvector",
    "lagrangian_action",
    "graph_action",
    "multisymplectic_action",
    "convergence_study",
    "graph_function",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Cell rule for the parameter-domain integrals.

    ``midpoint`` evaluates at cell centers with frames from corner averages.
    ``gauss2`` uses the tensor two-point Gauss rule; it needs a callable
    surface map for off-node frames, differenced with step = cell size.
    """

    rule: str = "midpoint"

    def __post_init__(self):
        if self.rule not in ("midpoint", "gauss2"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")


def _normalize_domain(domain, p: int) -> tuple[tuple[float, float], ...]:
    dom = tuple((float(lo), float(hi)) for lo, hi in domain)
    if len(dom) != p:
        raise ValueError(f"domain needs {p} axis intervals")
    if any(hi <= lo for lo, hi in dom):
        raise ValueError("domain intervals must have positive length")
    return dom


def _normalize_resolution(resolution, p: int) -> tuple[int, ...]:
    if isinstance(resolution, int):
        res = (resolution,) * p
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != p or any(r < 2 for r in res):
        raise ValueError("resolution must give at least 2 cells per axis")
    return res


@dataclass(frozen=True)
class ParametricGrid:
    """Node values of a map from a parameter rectangle into R^n.

    ``values`` has shape (res_1+1, ..., res_p+1, n).  When the grid was built
    from a callable, the callable is kept so Gauss quadrature can re-sample.
    """

    p: int
    n: int
    domain: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]
    values: np.ndarray
    mapping: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "domain", _normalize_domain(self.domain, self.p))
        object.__setattr__(self, "resolution", _normalize_resolution(self.resolution, self.p))
        values = np.asarray(self.values, dtype=float)
        expected = tuple(r + 1 for r in self.resolution) + (self.n,)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match nodes {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("node values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_map(cls, fn, domain, resolution, p: int, n: int) -> "ParametricGrid":
        dom = _normalize_domain(domain, p)
        res = _normalize_resolution(resolution, p)
        axes = [np.linspace(lo, hi, r + 1) for (lo, hi), r in zip(dom, res)]
        mesh = np.meshgrid(*axes, indexing="ij")
        params = np.stack([m.ravel() for m in mesh], axis=-1)
        values = np.array([fn(s) for s in params], dtype=float)
        values = values.reshape(tuple(r + 1 for r in res) + (n,))
        return cls(p=p, n=n, domain=dom, resolution=res, values=values, mapping=fn)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / r for (lo, hi), r in zip(self.domain, self.resolution)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.resolution))

    def cell_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(k) for k in np.unravel_index(flat, self.resolution))


@dataclass(frozen=True)
class GraphSurface:
    """Graph of f: R^p -> R^(n-p) over a parameter rectangle."""

    f: Callable[[np.ndarray], np.ndarray]
    domain: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...] | int
    p: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "domain", _normalize_domain(self.domain, self.p))
        object.__setattr__(self, "resolution", _normalize_resolution(self.resolution, self.p))

    def map(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        vals = np.atleast_1d(np.asarray(self.f(s), dtype=float))
        if vals.shape != (self.n - self.p,):
            raise ValueError(f"graph map must produce {self.n - self.p} values, got shape {vals.shape}")
        return np.concatenate([s, vals])

    def to_grid(self) -> ParametricGrid:
        return ParametricGrid.from_map(self.map, self.domain, self.resolution, self.p, self.n)


_CORNERS_CACHE: dict[int, np.ndarray] = {}


def _corner_offsets(p: int) -> np.ndarray:
    if p not in _CORNERS_CACHE:
        _CORNERS_CACHE[p] = np.array(list(itertools.product((0, 1), repeat=p)), dtype=int)
    return _CORNERS_CACHE[p]


def _cell_frames(grid: ParametricGrid) -> tuple[np.ndarray, np.ndarray]:
    """Tangent frames and base points at every cell center.

    Returns (frames, bases) with frames of shape (num_cells, n, p) holding the
    averaged corner differences per axis, and bases of shape (num_cells, n).
    Cells are enumerated in row-major order of the cell multi-index.
    """
    p, n = grid.p, grid.n
    res = grid.resolution
    h = grid.spacing
    corners = _corner_offsets(p)
    num_cells = grid.num_cells
    frames = np.zeros((num_cells, n, p))
    bases = np.zeros((num_cells, n))
    for offset in corners:
        block = grid.values[tuple(slice(o, o + r) for o, r in zip(offset, res))]
        flat = block.reshape(num_cells, n)
        bases += flat
        for axis in range(p):
            sign = 1.0 if offset[axis] == 1 else -1.0
            frames[:, :, axis] += sign * flat
    bases /= len(corners)
    frames /= (len(corners) / 2.0) * h[None, None, :]
    return frames, bases


def _wedge_coords_batch(frames: np.ndarray, n: int, p: int) -> np.ndarray:
    """Increasing-index minors of every frame; shape (num_cells, C(n, p))."""
    combos = multi_indices(n, p)
    out = np.empty((frames.shape[0], len(combos)))
    for k, axes in enumerate(combos):
        rows = [a - 1 for a in axes]
        sub = frames[:, rows, :]
        if p == 1:
            out[:, k] = sub[:, 0, 0]
        elif p == 2:
            out[:, k] = sub[:, 0, 0] * sub[:, 1, 1] - sub[:, 0, 1] * sub[:, 1, 0]
        elif p == 3:
            out[:, k] = (
                sub[:, 0, 0] * (sub[:, 1, 1] * sub[:, 2, 2] - sub[:, 1, 2] * sub[:, 2, 1])
                - sub[:, 0, 1] * (sub[:, 1, 0] * sub[:, 2, 2] - sub[:, 1, 2] * sub[:, 2, 0])
                + sub[:, 0, 2] * (sub[:, 1, 0] * sub[:, 2, 1] - sub[:, 1, 1] * sub[:, 2, 0])
            )
        else:
            out[:, k] = np.linalg.det(sub)
    return out


def tangent_pvector(grid: ParametricGrid, cell: Sequence[int]) -> tuple[KVector, np.ndarray]:
    """Tangent p-vector and base point at the center of one cell."""
    cell = tuple(int(c) for c in cell)
    if len(cell) != grid.p or any(not 0 <= c < r for c, r in zip(cell, grid.resolution)):
        raise ValueError(f"cell {cell} outside the grid resolution {grid.resolution}")
    corners = _corner_offsets(grid.p)
    h = grid.spacing
    frame = np.zeros((grid.n, grid.p))
    base = np.zeros(grid.n)
    for offset in corners:
        value = grid.values[tuple(c + o for c, o in zip(cell, offset))]
        base += value
        for axis in range(grid.p):
            frame[:, axis] += (1.0 if offset[axis] == 1 else -1.0) * value
    base /= len(corners)
    frame /= (len(corners) / 2.0) * h[None, :]
    coords = _wedge_coords_batch(frame[None, :, :], grid.n, grid.p)[0]
    if not np.any(coords):
        raise DegenerateCellError(cell)
    return KVector(grid.n, grid.p, coords), base


def _quadrature_samples(grid: ParametricGrid, quad: QuadratureConfig):
    """Yield (frames, bases, weight-per-sample) blocks for the chosen rule."""
    if quad.rule == "midpoint":
        frames, bases = _cell_frames(grid)
        return [(frames, bases, grid.cell_volume)]
    if grid.mapping is None:
        raise ValueError("gauss2 quadrature needs a grid built from a callable map")
    # tensor two-point Gauss rule; frames by central differences of the map
    # with step equal to the cell size
    h = grid.spacing
    lows = np.array([lo for lo, _ in grid.domain])
    offsets = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])
    cells = np.array(list(itertools.product(*[range(r) for r in grid.resolution])))
    blocks = []
    for combo in itertools.product(offsets, repeat=grid.p):
        params = lows[None, :] + (cells + np.array(combo)[None, :]) * h[None, :]
        frames = np.empty((len(params), grid.n, grid.p))
        bases = np.empty((len(params), grid.n))
        for row, s in enumerate(params):
            bases[row] = grid.mapping(s)
            for axis in range(grid.p):
                step = np.zeros(grid.p)
                step[axis] = 0.5 * h[axis]
                frames[row, :, axis] = (grid.mapping(s + step) - grid.mapping(s - step)) / h[axis]
        blocks.append((frames, bases, grid.cell_volume / 2.0**grid.p))
    return blocks


def _check_degenerate(coords: np.ndarray, grid: ParametricGrid) -> None:
    dead = ~np.any(coords != 0.0, axis=1)
    if np.any(dead):
        raise DegenerateCellError(grid.cell_index(int(np.argmax(dead))))


def _reraise_orientation(exc: OrientationError, grid: ParametricGrid, coords: np.ndarray) -> None:
    top = coords[:, 0]
    bad = np.nonzero(top <= 0.0)[0]
    cell = grid.cell_index(int(bad[0])) if bad.size else None
    raise OrientationError(f"graph chart violated at cell {cell}: top coordinate {top[bad[0]] if bad.size else '?'}") from exc


def lagrangian_action(
    L: HomogeneousLagrangian, grid: ParametricGrid, quad: QuadratureConfig = QuadratureConfig()
) -> float:
    """Integral of L on the tangent p-vectors against the parameter measure.

    With tangent frames dual to the coframe in the integrand, this is the
    surface integral of the Lagrangian; by homogeneity the value does not
    depend on the (affine) parametrization.
    """
    if (grid.n, grid.p) != (L.n, L.p):
        raise ValueError("grid and Lagrangian dimensions do not match")
    contributions = []
    for frames, bases, weight in _quadrature_samples(grid, quad):
        coords = _wedge_coords_batch(frames, grid.n, grid.p)
        _check_degenerate(coords, grid)
        try:
            vals = L.value_many(bases, coords)
        except OrientationError as exc:
            _reraise_orientation(exc, grid, coords)
        contributions.extend((weight * vals).tolist())
    return math.fsum(contributions)


def graph_action(
    F: GraphDensity, surf: GraphSurface, quad: QuadratureConfig = QuadratureConfig()
) -> float:
    """Quadrature of F(base, values, slopes) over the parameter rectangle.

    Slopes come from central differences of the graph map with step equal to
    the cell size, matching the tangent-frame discretization.
    """
    if (surf.n, surf.p) != (F.n, F.p):
        raise ValueError("surface and density dimensions do not match")
    h = np.array([(hi - lo) / r for (lo, hi), r in zip(surf.domain, surf.resolution)])
    lows = np.array([lo for lo, _ in surf.domain])
    cells = np.array(list(itertools.product(*[range(r) for r in surf.resolution])))
    if quad.rule == "midpoint":
        sample_offsets = [np.full(surf.p, 0.5)]
        weight = float(np.prod(h))
    else:
        gauss = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))
        sample_offsets = [np.array(c) for c in itertools.product(gauss, repeat=surf.p)]
        weight = float(np.prod(h)) / 2.0**surf.p

    def slopes_at(s: np.ndarray) -> np.ndarray:
        q = np.empty((surf.p, surf.n - surf.p))
        for axis in range(surf.p):
            step = np.zeros(surf.p)
            step[axis] = 0.5 * h[axis]
            fp = np.atleast_1d(np.asarray(surf.f(s + step), dtype=float))
            fm = np.atleast_1d(np.asarray(surf.f(s - step), dtype=float))
            q[axis] = (fp - fm) / h[axis]
        return q

    contributions = []
    for offset in sample_offsets:
        params = lows[None, :] + (cells + offset[None, :]) * h[None, :]
        for s in params:
            values = np.atleast_1d(np.asarray(surf.f(s), dtype=float))
            contributions.append(weight * F.fn(s, values, slopes_at(s)))
    return math.fsum(contributions)


def multisymplectic_action(
    L: HomogeneousLagrangian, grid: ParametricGrid, quad: QuadratureConfig = QuadratureConfig()
) -> float:
    """Integral of the tautological form over the gradient image of the tangent lift.

    Per sample the dual coordinates are the fiber gradient at the tangent
    p-vector, and the tautological form is evaluated on the tangent frame,
    which reduces to pairing the dual coordinates with the frame minors.
    """
    if (grid.n, grid.p) != (L.n, L.p):
        raise ValueError("grid and Lagrangian dimensions do not match")
    contributions = []
    for frames, bases, weight in _quadrature_samples(grid, quad):
        coords = _wedge_coords_batch(frames, grid.n, grid.p)
        _check_degenerate(coords, grid)
        try:
            grads = L.gradient_many(bases, coords)
        except OrientationError as exc:
            _reraise_orientation(exc, grid, coords)
        vals = np.einsum("ij,ij->i", grads, coords)
        contributions.extend((weight * vals).tolist())
    return math.fsum(contributions)


def theta_cell_values(L: HomogeneousLagrangian, grid: ParametricGrid) -> np.ndarray:
    """Per-cell tautological-form values on the midpoint frames (before weighting).

    Routed through the chart form evaluator; used to cross-check the batched
    action path and the cellwise agreement with the Lagrangian integrand.
    """
    chart = TotalSpaceChart(grid.n, grid.p)
    form = theta(chart)
    frames, bases = _cell_frames(grid)
    coords = _wedge_coords_batch(frames, grid.n, grid.p)
    _check_degenerate(coords, grid)
    out = np.empty(len(coords))
    for k in range(len(coords)):
        grad = L.gradient(bases[k], KVector(grid.n, grid.p, coords[k]))
        point = chart.point(bases[k], grad.coords)
        lifted = [chart.lift(frames[k, :, axis]) for axis in range(grid.p)]
        out[k] = form(point, lifted)
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    resolution: int
    h: float
    value: float
    error: float | None
    observed_order: float | None


def convergence_study(
    action_kind: str,
    problem,
    surface: GraphSurface,
    resolutions: Sequence[int],
    reference: float | None = None,
    quad: QuadratureConfig = QuadratureConfig(),
) -> list[ConvergenceRow]:
    """Action values and observed orders across resolutions.

    ``action_kind`` selects lagrangian | graph | multisymplectic, ``problem``
    is the matching Lagrangian or density.  Errors are taken against the
    reference when given, else against the finest computed value (whose own
    row then carries no error).  Orders are ratios of successive errors;
    rows at machine level are reported without an order.
    """
    if len(resolutions) < 3:
        raise ValueError("need at least three resolutions")
    kinds = {
        "lagrangian": lambda res: lagrangian_action(problem, replace(surface, resolution=res).to_grid(), quad),
        "graph": lambda res: graph_action(problem, replace(surface, resolution=res), quad),
        "multisymplectic": lambda res: multisymplectic_action(problem, replace(surface, resolution=res).to_grid(), quad),
    }
    if action_kind not in kinds:
        raise ValueError(f"unknown action kind {action_kind!r}")
    res_sorted = sorted(int(r) for r in resolutions)
    values = {res: kinds[action_kind](res) for res in res_sorted}
    ref = reference if reference is not None else values[res_sorted[-1]]
    scale = max(1.0, abs(ref))

    widths = {res: max((hi - lo) / res for (lo, hi) in surface.domain) for res in res_sorted}
    rows: list[ConvergenceRow] = []
    prev_error: float | None = None
    prev_h: float | None = None
    for res in res_sorted:
        if reference is None and res == res_sorted[-1]:
            error = None
        else:
            error = abs(values[res] - ref)
        order = None
        if error is not None and prev_error is not None:
            if error > 1e-13 * scale and prev_error > 1e-13 * scale:
                order = math.log(prev_error / error) / math.log(prev_h / widths[res])
        rows.append(ConvergenceRow(resolution=res, h=widths[res], value=values[res],
                                   error=error, observed_order=order))
        if error is not None:
            prev_error, prev_h = error, widths[res]
    return rows


def graph_function(name: str, params: dict | None, p: int, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Named graph maps for configs: flat, plane, bilinear, polynomial."""
    params = dict(params or {})
    codim = n - p
    if name == "flat":
        return lambda s: np.zeros(codim)
    if name == "plane":
        coeffs = np.asarray(params.get("coefficients"), dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if coeffs.shape != (p, codim):
            raise ValueError(f"plane coefficients must have shape ({p}, {codim})")
        return lambda s: s @ coeffs
    if name == "bilinear":
        scale = float(params.get("scale", 1.0))
        if codim != 1:
            raise ValueError("bilinear graph is defined for codimension 1")
        return lambda s: np.array([scale * np.prod(s)])
    if name == "polynomial":
        terms = params.get("terms")
        if not terms:
            raise ValueError("polynomial graph needs a list of terms")
        parsed = []
        for term in terms:
            powers = np.asarray(term["powers"], dtype=float)
            if powers.shape != (p,):
                raise ValueError(f"term powers must have length {p}")
            component = int(term.get("component", 1)) - 1
            if not 0 <= component < codim:
                raise ValueError("term component out of range")
            parsed.append((float(term["coeff"]), powers, component))

        def poly(s: np.ndarray) -> np.ndarray:
            out = np.zeros(codim)
            for coeff, powers, component in parsed:
                out[component] += coeff * np.prod(s**powers)
            return out

        return poly
    raise ValueError(f"unknown graph function {name!r}")
