"""Exterior algebra: canonicalization, wedges, pairing, planes, decomposability."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisymp import (
    GrassmannPoint,
    KCovector,
    KVector,
    MultiIndex,
    UnsupportedDegreeError,
    ZeroSectionError,
    canonicalize_index,
    grassmann_eq,
    is_decomposable,
    multi_indices,
    pair,
    plane_from_bivector,
    volume_form,
    wedge_product,
    wedge_vectors,
)


def inversion_sign(seq):
    """Independent parity oracle: count pairwise inversions."""
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def brute_minors(vectors, n, p):
    """Independent minor oracle: dets of all row selections, via permutation expansion."""
    matrix = np.column_stack(vectors)
    out = {}
    for axes in itertools.combinations(range(1, n + 1), p):
        rows = [a - 1 for a in axes]
        det = 0.0
        for perm in itertools.permutations(range(p)):
            term = inversion_sign(perm)
            for r, c in zip(rows, perm):
                term *= matrix[r, c]
            det += term
        out[axes] = det
    return out


class TestCanonicalize:
    def test_single_transposition(self):
        idx, sign = canonicalize_index((2, 1), 3)
        assert idx.axes == (1, 2)
        assert sign == -1

    def test_repeated_index_vanishes(self):
        idx, sign = canonicalize_index((1, 2, 2), 3)
        assert idx is None
        assert sign == 0

    def test_three_cycle(self):
        assert inversion_sign((3, 1, 2)) == 1
        idx, sign = canonicalize_index((3, 1, 2), 3)
        assert idx.axes == (1, 2, 3)
        assert sign == 1

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            canonicalize_index((0, 1), 3)
        with pytest.raises(ValueError):
            canonicalize_index((1, 4), 3)

    @given(st.permutations(list(range(1, 6))))
    def test_sign_matches_inversion_count(self, perm):
        idx, sign = canonicalize_index(tuple(perm), 5)
        assert idx.axes == tuple(sorted(perm))
        assert sign == inversion_sign(perm)


class TestMultiIndex:
    def test_enumeration_is_lexicographic(self):
        assert multi_indices(4, 2) == ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))

    def test_validation(self):
        with pytest.raises(ValueError):
            MultiIndex((2, 1), 3)
        with pytest.raises(ValueError):
            MultiIndex((1, 5), 3)


class TestWedgeVectors:
    def test_plane_graph_triple(self):
        # tangents of the graph of f with slopes (2, 3)
        w = wedge_vectors([np.array([1.0, 0.0, 2.0]), np.array([0.0, 1.0, 3.0])])
        assert w.as_cyclic_triple() == (1.0, -2.0, -3.0)

    def test_coordinate_basis(self):
        w = wedge_vectors([np.eye(3)[0], np.eye(3)[1]])
        assert w.coords.tolist() == [1.0, 0.0, 0.0]

    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
    def test_minors_against_oracle_n4(self, vals):
        a, c, b, d = vals
        u1 = np.array([1.0, 0.0, a, c])
        u2 = np.array([0.0, 1.0, b, d])
        w = wedge_vectors([u1, u2])
        oracle = brute_minors([u1, u2], 4, 2)
        for axes, expected in oracle.items():
            assert w.component(axes) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_antisymmetry(self, seed):
        rng = np.random.default_rng(seed)
        u1, u2 = rng.standard_normal(3), rng.standard_normal(3)
        w12 = wedge_vectors([u1, u2])
        w21 = wedge_vectors([u2, u1])
        assert np.allclose(w12.coords, -w21.coords, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            wedge_vectors([np.ones(3), np.ones(4)])
        with pytest.raises(ValueError):
            wedge_vectors([np.ones(2)] * 3)


class TestPair:
    def test_dual_basis(self):
        alpha = KCovector.basis(3, 2, (1, 2))
        assert pair(alpha, KVector.basis(3, 2, (1, 2))) == 1.0

    def test_antisymmetry_of_arguments(self):
        alpha = KCovector.basis(3, 2, (1, 2))
        u = KVector.from_components(3, 2, {(2, 1): 1.0})
        assert pair(alpha, u) == -1.0

    def test_wedge_pairing_definition(self):
        # alpha(u1) beta(u2) - alpha(u2) beta(u1) for alpha=dx1, beta=dx3
        u1 = np.array([1.0, 0.0, 2.0])
        u2 = np.array([0.0, 1.0, 3.0])
        direct = u1[0] * u2[2] - u2[0] * u1[2]
        assert direct == 3.0
        assert pair(KCovector.basis(3, 2, (1, 3)), wedge_vectors([u1, u2])) == pytest.approx(3.0)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_wedge_pairing_definition_random(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        u1, u2 = rng.standard_normal(4), rng.standard_normal(4)
        direct = (a @ u1) * (b @ u2) - (a @ u2) * (b @ u1)
        alpha = KCovector(4, 2, wedge_vectors([a, b]).coords)
        assert pair(alpha, wedge_vectors([u1, u2])) == pytest.approx(direct, abs=1e-9, rel=1e-9)

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_bilinearity(self, seed):
        rng = np.random.default_rng(seed)
        alpha = KCovector(3, 2, rng.standard_normal(3))
        u = KVector(3, 2, rng.standard_normal(3))
        v = KVector(3, 2, rng.standard_normal(3))
        s = float(rng.standard_normal())
        assert pair(alpha, u + v.scaled(s)) == pytest.approx(pair(alpha, u) + s * pair(alpha, v), abs=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            pair(KCovector.zero(4, 2), KVector.basis(3, 2, (1, 2)))


class TestPlaneFromBivector:
    def test_coordinate_plane(self):
        v1, v2 = plane_from_bivector(KVector.basis(3, 2, (1, 2)))
        span = np.column_stack([v1, v2])
        assert np.linalg.matrix_rank(np.column_stack([span, np.eye(3)[:, :2]])) == 2
        assert pair(KCovector(3, 2, wedge_vectors([v1, v2]).coords), KVector.basis(3, 2, (1, 2))) > 0

    def test_roundtrip_example(self):
        u = KVector.from_cyclic_triple(1.0, -2.0, -3.0)
        v1, v2 = plane_from_bivector(u)
        recovered = GrassmannPoint.from_vectors([v1, v2])
        assert grassmann_eq(recovered, GrassmannPoint(u), tol=1e-9)

    def test_roundtrip_random_planes(self, rng):
        for _ in range(100):
            basis = [rng.standard_normal(3), rng.standard_normal(3)]
            u = wedge_vectors(basis)
            if u.norm() < 1e-6:
                continue
            v1, v2 = plane_from_bivector(u, omega=volume_form(3, scale=2.5))
            assert grassmann_eq(GrassmannPoint.from_vectors([v1, v2]), GrassmannPoint(u), tol=1e-9)

    def test_zero_input(self):
        with pytest.raises(ZeroSectionError):
            plane_from_bivector(KVector.zero(3, 2))


class TestDecomposability:
    def test_bivectors_in_r3(self, rng):
        for _ in range(20):
            u = KVector(3, 2, rng.standard_normal(3))
            assert is_decomposable(u)

    def test_nondecomposable_in_r4(self):
        u = KVector.from_components(4, 2, {(1, 2): 1.0, (3, 4): 1.0})
        # direct wedge oracle: u ^ u = 2 on the top basis element
        square = wedge_product(u, u)
        assert square.coords.tolist() == [2.0]
        assert not is_decomposable(u)

    def test_wedges_in_r4_are_decomposable(self, rng):
        for _ in range(50):
            u = wedge_vectors([rng.standard_normal(4), rng.standard_normal(4)])
            if u.norm() < 1e-9:
                continue
            assert is_decomposable(u)

    def test_pluecker_relation_on_wedges(self, rng):
        for _ in range(50):
            u = wedge_vectors([rng.standard_normal(4), rng.standard_normal(4)])
            c = u.component
            rel = c((1, 2)) * c((3, 4)) - c((1, 3)) * c((2, 4)) + c((1, 4)) * c((2, 3))
            assert abs(rel) <= 1e-12 * max(1.0, u.norm() ** 2)

    def test_unsupported_degree(self):
        u = KVector.basis(6, 3, (1, 2, 3))
        with pytest.raises(UnsupportedDegreeError):
            is_decomposable(u)

    def test_zero_rejected(self):
        with pytest.raises(ZeroSectionError):
            is_decomposable(KVector.zero(3, 2))


class TestGrassmannPoint:
    def test_positive_scaling_is_same_class(self):
        y = KVector.from_cyclic_triple(1.0, 2.0, 3.0)
        assert grassmann_eq(GrassmannPoint(y), GrassmannPoint(y.scaled(2.0)))

    def test_orientation_distinguishes(self):
        y = KVector.from_cyclic_triple(1.0, 2.0, 3.0)
        assert not grassmann_eq(GrassmannPoint(y), GrassmannPoint(-y))

    def test_distinct_directions(self):
        a = GrassmannPoint(KVector(3, 2, [1.0, 0.0, 0.0]))
        b = GrassmannPoint(KVector(3, 2, [1.0, 1e-3, 0.0]))
        assert not grassmann_eq(a, b, tol=1e-6)

    def test_zero_rejected(self):
        with pytest.raises(ZeroSectionError):
            GrassmannPoint(KVector.zero(3, 2))

    def test_nondecomposable_rejected_when_checked(self):
        u = KVector.from_components(4, 2, {(1, 2): 1.0, (3, 4): 1.0})
        with pytest.raises(ValueError):
            GrassmannPoint(u)
        GrassmannPoint(u, check=False)  # oriented ray still representable


class TestFiberElements:
    def test_from_components_folds_signs(self):
        u = KVector.from_components(3, 2, {(3, 1): -3.0})
        assert u.component((1, 3)) == 3.0
        assert u.component((3, 1)) == -3.0
        assert u.component((1, 1)) == 0.0

    def test_cyclic_triple_roundtrip(self):
        u = KVector.from_cyclic_triple(1.0, -2.0, -3.0)
        assert u.as_cyclic_triple() == (1.0, -2.0, -3.0)
        assert u.coords.tolist() == [1.0, 3.0, -2.0]

    def test_immutability(self):
        u = KVector.basis(3, 2, (1, 2))
        with pytest.raises((AttributeError, ValueError)):
            u.coords[0] = 5.0
        with pytest.raises(AttributeError):
            u.n = 4

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            KVector(3, 2, [np.nan, 0.0, 0.0])
