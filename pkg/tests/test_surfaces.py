"""Discretized surfaces: tangent frames, the three actions, convergence."""

import math

import numpy as np
import pytest

from multisymp import (
    DegenerateCellError,
    GraphSurface,
    OrientationError,
    ParametricGrid,
    QuadratureConfig,
    area_lagrangian,
    convergence_study,
    graph_action,
    graph_area_density,
    graph_function,
    lagrangian_action,
    minimal_surface_density,
    multisymplectic_action,
    tangent_pvector,
    wedge_vectors,
)
from multisymp.surfaces import _cell_frames, _wedge_coords_batch, theta_cell_values

# midpoint rule at 2048^2 for the area of the graph of x1*x2 over the unit
# square, i.e. the integral of sqrt(1 + x1^2 + x2^2); adaptive quadrature
# agrees to the rule's own discretization error (1.3e-8)
BILINEAR_AREA_ORACLE = 1.2807892621906034

SQRT14 = math.sqrt(14.0)
SQRT17 = math.sqrt(17.0)  # Gram area of the graph of (2x1+x2, x1-x2) over the unit square


def plane_surface(res):
    return GraphSurface(f=lambda s: np.array([2.0 * s[0] + 3.0 * s[1]]),
                        domain=[(0, 1), (0, 1)], resolution=res, p=2, n=3)


def bilinear_surface(res):
    return GraphSurface(f=lambda s: np.array([s[0] * s[1]]),
                        domain=[(0, 1), (0, 1)], resolution=res, p=2, n=3)


def flat_surface(res):
    return GraphSurface(f=lambda s: np.zeros(1), domain=[(0, 1), (0, 1)], resolution=res, p=2, n=3)


class TestTangentPVector:
    def test_plane_graph_everywhere(self):
        grid = plane_surface(8).to_grid()
        for cell in ((0, 0), (3, 5), (7, 7)):
            y, base = tangent_pvector(grid, cell)
            assert y.as_cyclic_triple() == pytest.approx((1.0, -2.0, -3.0), abs=1e-12)

    def test_flat_graph(self):
        y, base = tangent_pvector(flat_surface(4).to_grid(), (1, 2))
        assert y.as_cyclic_triple() == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)

    def test_bilinear_center(self):
        # cell (2, 2) of a 5-cell grid is centered at (0.5, 0.5); the corner
        # scheme is exact for bilinear maps
        y, base = tangent_pvector(bilinear_surface(5).to_grid(), (2, 2))
        assert y.as_cyclic_triple() == pytest.approx((1.0, -0.5, -0.5), abs=1e-12)
        assert base == pytest.approx([0.5, 0.5, 0.25], abs=1e-12)

    def test_cell_bounds(self):
        grid = flat_surface(4).to_grid()
        with pytest.raises(ValueError):
            tangent_pvector(grid, (4, 0))

    def test_degenerate_cell(self):
        grid = ParametricGrid.from_map(lambda s: np.array([s[0], 0.0, 0.0]),
                                       [(0, 1), (0, 1)], 4, p=2, n=3)
        with pytest.raises(DegenerateCellError):
            tangent_pvector(grid, (0, 0))


class TestLagrangianAction:
    def test_flat_unit_square(self, area3):
        assert lagrangian_action(area3, flat_surface(8).to_grid()) == pytest.approx(1.0, abs=1e-14)

    def test_plane_sqrt14(self, area3):
        action = lagrangian_action(area3, plane_surface(64).to_grid())
        assert abs(action - SQRT14) <= 1e-8

    def test_bilinear_against_midpoint_oracle(self, area3):
        action = lagrangian_action(area3, bilinear_surface(256).to_grid())
        assert abs(action - BILINEAR_AREA_ORACLE) <= 1e-6

    def test_reparametrization_invariance(self, area3):
        def phi(s):
            return np.array([s[0], s[1], math.sin(s[0]) * s[1]])

        def phi_stretched(t):
            return phi(np.array([(t[0] - 1.0) / 2.0, (t[1] + 3.0) * 2.0]))

        g1 = ParametricGrid.from_map(phi, [(0, 1), (0, 1)], 32, p=2, n=3)
        g2 = ParametricGrid.from_map(phi_stretched, [(1, 3), (-3, -2.5)], 32, p=2, n=3)
        a1, a2 = lagrangian_action(area3, g1), lagrangian_action(area3, g2)
        assert abs(a1 - a2) <= 1e-9

    def test_orientation_error_reports_cell(self, minimal_lift3):
        grid = ParametricGrid.from_map(lambda s: np.array([-s[0], s[1], 0.0]),
                                       [(0, 1), (0, 1)], 4, p=2, n=3)
        with pytest.raises(OrientationError) as excinfo:
            lagrangian_action(minimal_lift3, grid)
        assert "cell" in str(excinfo.value)

    def test_axis_reversal_flips_tangents_but_area_unchanged(self, area3, minimal_lift3):
        fwd = bilinear_surface(8).to_grid()
        rev = ParametricGrid.from_map(lambda s: np.array([1.0 - s[0], s[1], (1.0 - s[0]) * s[1]]),
                                      [(0, 1), (0, 1)], 8, p=2, n=3)
        yf, _ = tangent_pvector(fwd, (0, 0))
        yr, _ = tangent_pvector(rev, (7, 0))
        assert np.allclose(yr.coords, -yf.coords, atol=1e-12)
        assert lagrangian_action(area3, rev) == pytest.approx(lagrangian_action(area3, fwd), abs=1e-12)
        with pytest.raises(OrientationError):
            lagrangian_action(minimal_lift3, rev)


class TestGraphAction:
    def test_constant_density(self):
        from multisymp import constant_density
        assert graph_action(constant_density(3, 2), flat_surface(8)) == pytest.approx(1.0, abs=1e-14)

    def test_plane_sqrt14(self):
        action = graph_action(minimal_surface_density(3, 2), plane_surface(64))
        assert abs(action - SQRT14) <= 1e-8

    def test_bilinear_matches_lifted_lagrangian(self, minimal_lift3):
        surf = bilinear_surface(256)
        ga = graph_action(minimal_surface_density(3, 2), surf)
        la = lagrangian_action(minimal_lift3, surf.to_grid())
        assert abs(ga - la) <= 1e-6


class TestMultisymplecticAction:
    def test_flat_unit_square(self, area3):
        assert multisymplectic_action(area3, flat_surface(8).to_grid()) == pytest.approx(1.0, abs=1e-14)

    def test_plane_sqrt14(self, area3):
        action = multisymplectic_action(area3, plane_surface(64).to_grid())
        assert abs(action - SQRT14) <= 1e-8

    def test_cellwise_equality_with_lagrangian(self, minimal_lift3):
        # the dual-side integrand equals the Lagrangian one cell by cell
        grid = bilinear_surface(256).to_grid()
        frames, bases = _cell_frames(grid)
        coords = _wedge_coords_batch(frames, 3, 2)
        lvals = minimal_lift3.value_many(bases, coords)
        tvals = np.einsum("ij,ij->i", minimal_lift3.gradient_many(bases, coords), coords)
        assert np.max(np.abs(tvals - lvals)) <= 1e-10
        la = lagrangian_action(minimal_lift3, grid)
        ma = multisymplectic_action(minimal_lift3, grid)
        assert abs(ma - la) <= 1e-10 * abs(la)

    def test_batched_path_matches_form_evaluator(self, area3):
        grid = bilinear_surface(8).to_grid()
        via_form = theta_cell_values(area3, grid)
        frames, bases = _cell_frames(grid)
        coords = _wedge_coords_batch(frames, 3, 2)
        batched = np.einsum("ij,ij->i", area3.gradient_many(bases, coords), coords)
        assert np.allclose(via_form, batched, atol=1e-13)


class TestGeneralP:
    def test_slope_coordinate_law_p2_n4(self):
        A = np.array([[2.0, 1.0], [1.0, -1.0]])  # A[i, j] = slope of f_j along x_i
        surf = GraphSurface(f=lambda s: np.array([2 * s[0] + s[1], s[0] - s[1]]),
                            domain=[(0, 1), (0, 1)], resolution=4, p=2, n=4)
        grid = surf.to_grid()
        y, _ = tangent_pvector(grid, (1, 2))
        p = 2
        for i in range(1, p + 1):
            kept = tuple(k for k in range(1, p + 1) if k != i)
            for j in range(1, 3):
                expected = (-1.0) ** (p - i) * A[i - 1, j - 1]
                assert y.component(kept + (p + j,)) == pytest.approx(expected, abs=1e-8)
        # cross-check every coordinate against wedged analytic tangents
        u1 = np.array([1.0, 0.0, A[0, 0], A[0, 1]])
        u2 = np.array([0.0, 1.0, A[1, 0], A[1, 1]])
        assert np.allclose(y.coords, wedge_vectors([u1, u2]).coords, atol=1e-8)

    def test_slope_coordinate_law_p3_n4(self):
        a = np.array([0.7, -1.3, 0.4])
        surf = GraphSurface(f=lambda s: np.array([float(a @ s)]),
                            domain=[(0, 1)] * 3, resolution=3, p=3, n=4)
        y, _ = tangent_pvector(surf.to_grid(), (1, 0, 2))
        p = 3
        assert y.component((1, 2, 3)) == pytest.approx(1.0, abs=1e-12)
        for i in range(1, p + 1):
            kept = tuple(k for k in range(1, p + 1) if k != i)
            expected = (-1.0) ** (p - i) * a[i - 1]
            assert y.component(kept + (4,)) == pytest.approx(expected, abs=1e-8)
        frame = [np.concatenate([row, [a[k]]]) for k, row in enumerate(np.eye(3))]
        assert np.allclose(y.coords, wedge_vectors(frame).coords, atol=1e-8)

    def test_plane_graph_action_equals_gram_area(self):
        # constant integrand: exact at every resolution
        L = area_lagrangian(4, 2)
        for res in (8, 16, 32):
            surf = GraphSurface(f=lambda s: np.array([2 * s[0] + s[1], s[0] - s[1]]),
                                domain=[(0, 1), (0, 1)], resolution=res, p=2, n=4)
            for action in (lagrangian_action(L, surf.to_grid()),
                           multisymplectic_action(L, surf.to_grid()),
                           graph_action(graph_area_density(4, 2), surf)):
                assert abs(action - SQRT17) <= 1e-8

    def test_p1_curve_length(self):
        # degree-1 machinery is not hardwired to surfaces: quarter circle of
        # radius 2 has length pi
        L = area_lagrangian(3, 1)
        grid = ParametricGrid.from_map(
            lambda s: np.array([2 * math.cos(s[0]), 2 * math.sin(s[0]), 0.0]),
            [(0.0, math.pi / 2)], 200, p=1, n=3)
        assert lagrangian_action(L, grid) == pytest.approx(math.pi, abs=1e-4)
        assert multisymplectic_action(L, grid) == pytest.approx(lagrangian_action(L, grid), abs=1e-12)

    def test_p3_n4_triple(self):
        L = area_lagrangian(4, 3)
        F = minimal_surface_density(4, 3)
        surf = GraphSurface(f=lambda s: np.array([0.3 * s[0] - 0.7 * s[1] + 0.2 * s[2]]),
                            domain=[(0, 1)] * 3, resolution=6, p=3, n=4)
        exact = math.sqrt(1.0 + 0.09 + 0.49 + 0.04)
        assert lagrangian_action(L, surf.to_grid()) == pytest.approx(exact, abs=1e-10)
        assert graph_action(F, surf) == pytest.approx(exact, abs=1e-10)
        assert multisymplectic_action(L, surf.to_grid()) == pytest.approx(exact, abs=1e-10)


class TestConvergenceStudy:
    def test_plane_constant_integrand(self, area3):
        rows = convergence_study("lagrangian", area3, plane_surface(4), [8, 16, 32],
                                 reference=SQRT14)
        for row in rows:
            assert row.error <= 1e-12
            assert row.observed_order is None  # machine level, not rated

    def test_bilinear_second_order(self, area3):
        rows = convergence_study("lagrangian", area3, bilinear_surface(4), [16, 32, 64, 128],
                                 reference=BILINEAR_AREA_ORACLE)
        orders = [row.observed_order for row in rows if row.observed_order is not None]
        assert len(orders) == 3
        assert all(abs(o - 2.0) <= 0.3 for o in orders)

    def test_graph_kind(self):
        rows = convergence_study("graph", minimal_surface_density(3, 2), bilinear_surface(4),
                                 [16, 32, 64], reference=BILINEAR_AREA_ORACLE)
        orders = [row.observed_order for row in rows if row.observed_order is not None]
        assert all(abs(o - 2.0) <= 0.3 for o in orders)

    def test_without_reference_uses_finest(self, area3):
        rows = convergence_study("lagrangian", area3, bilinear_surface(4), [16, 32, 64])
        assert rows[-1].error is None
        assert rows[1].error is not None

    def test_needs_three_resolutions(self, area3):
        with pytest.raises(ValueError):
            convergence_study("lagrangian", area3, bilinear_surface(4), [16, 32])

    def test_unknown_kind(self, area3):
        with pytest.raises(ValueError):
            convergence_study("dual", area3, bilinear_surface(4), [16, 32, 64])


class TestQuadrature:
    def test_gauss2_close_to_oracle(self, area3):
        action = lagrangian_action(area3, bilinear_surface(16).to_grid(), QuadratureConfig("gauss2"))
        assert abs(action - BILINEAR_AREA_ORACLE) <= 5e-7

    def test_gauss2_needs_callable(self, area3):
        grid = bilinear_surface(8).to_grid()
        data_only = ParametricGrid(p=2, n=3, domain=grid.domain, resolution=grid.resolution,
                                   values=grid.values)
        with pytest.raises(ValueError):
            lagrangian_action(area3, data_only, QuadratureConfig("gauss2"))

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            QuadratureConfig("simpson")

    def test_weights_sum_to_cell_volume(self):
        # tensor-Gauss weights per cell add up to the cell volume
        surf = bilinear_surface(4)
        from multisymp.surfaces import _quadrature_samples
        blocks = _quadrature_samples(surf.to_grid(), QuadratureConfig("gauss2"))
        total = sum(w for _, _, w in blocks)
        assert total * surf.to_grid().num_cells == pytest.approx(1.0)


class TestGridValidation:
    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            GraphSurface(f=lambda s: np.zeros(1), domain=[(0, 1), (0, 1)], resolution=1, p=2, n=3)

    def test_domain_length(self):
        with pytest.raises(ValueError):
            GraphSurface(f=lambda s: np.zeros(1), domain=[(0, 1)], resolution=4, p=2, n=3)

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            GraphSurface(f=lambda s: np.zeros(1), domain=[(0, 1), (1, 1)], resolution=4, p=2, n=3)

    def test_values_shape(self):
        with pytest.raises(ValueError):
            ParametricGrid(p=2, n=3, domain=[(0, 1), (0, 1)], resolution=4, values=np.zeros((4, 5, 3)))

    def test_nonfinite_values(self):
        values = np.zeros((5, 5, 3))
        values[0, 0, 0] = np.inf
        with pytest.raises(ValueError):
            ParametricGrid(p=2, n=3, domain=[(0, 1), (0, 1)], resolution=4, values=values)


class TestGraphFunctionRegistry:
    def test_flat_plane_bilinear(self):
        flat = graph_function("flat", None, 2, 3)
        assert flat(np.array([0.3, 0.4])).tolist() == [0.0]
        plane = graph_function("plane", {"coefficients": [2.0, 3.0]}, 2, 3)
        assert plane(np.array([1.0, 1.0])).tolist() == [5.0]
        bil = graph_function("bilinear", None, 2, 3)
        assert bil(np.array([0.5, 0.4]))[0] == pytest.approx(0.2)

    def test_polynomial(self):
        fn = graph_function("polynomial", {"terms": [
            {"coeff": 2.0, "powers": [1, 1], "component": 1},
            {"coeff": -1.0, "powers": [2, 0], "component": 2},
        ]}, 2, 4)
        out = fn(np.array([2.0, 3.0]))
        assert out.tolist() == [12.0, -4.0]

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            graph_function("sphere", None, 2, 3)
