"""Folding layer: projections, twisted classification, folded residual."""
from fractions import Fraction

import numpy as np
import pytest

from affinetoda.connection import higgs_residual
from affinetoda.grids import DomainGrid, HFieldGrid, QDifferential, random_trig_field
from affinetoda.restriction import (
    gcm_permutation_equivalent,
    project,
    restrict,
    restricted_null_vectors,
    restricted_toda_residual,
    symmetry_defect,
)
from affinetoda.rootdata import coxeter_number, diagram_automorphism

TABLE = [
    ("A2", "A2(2)"),
    ("A4", "A4(2)"),
    ("A6", "A6(2)"),
    ("A8", "A8(2)"),
    ("A3", "C2(1)"),
    ("A5", "C3(1)"),
    ("A7", "C4(1)"),
    ("D3", "C2(1)"),
    ("D5", "B4(1)"),
    ("D7", "B6(1)"),
    ("E6", "F4(1)"),
]

TRIVIAL = ["A1", "B2", "B3", "C3", "D4", "D6", "E7", "E8", "F4", "G2"]


@pytest.mark.parametrize("name,label", TABLE)
def test_twisted_table(name, label, algebra):
    rs, _, _, _ = algebra(name)
    rest = restrict(rs, diagram_automorphism(rs))
    assert rest.label == label


@pytest.mark.parametrize("name", TRIVIAL)
def test_trivial_symmetry_extends(name, algebra):
    rs, _, _, _ = algebra(name)
    rest = restrict(rs, diagram_automorphism(rs))
    assert rest.label == f"{name}(1)"
    assert rest.restricted_roots == tuple(
        tuple(Fraction(c) for c in rs.simple_root(i)) for i in range(rs.rank)
    )


def test_a3_collapses_to_two_nodes(algebra):
    rs, _, _, _ = algebra("A3")
    rest = restrict(rs, diagram_automorphism(rs))
    assert len(rest.restricted_roots) == 2
    assert rest.orbits == ((0, 2), (1,))


def test_delta_is_fixed_and_projection_idempotent(algebra):
    for name in ["A3", "A4", "D5", "E6"]:
        rs, _, _, _ = algebra(name)
        nu = diagram_automorphism(rs)
        delta = tuple(Fraction(c) for c in rs.highest_root)
        assert project(rs, nu, delta) == delta
        for beta in restrict(rs, nu).restricted_roots:
            assert project(rs, nu, beta) == beta


@pytest.mark.parametrize("name", [n for n, _ in TABLE])
def test_projected_matrix_is_affine(name, algebra):
    rs, _, _, _ = algebra(name)
    rest = restrict(rs, diagram_automorphism(rs))
    marks, comarks = restricted_null_vectors(rest)
    n = len(rest.gcm)
    assert all(sum(rest.gcm[i][j] * marks[j] for j in range(n)) == 0 for i in range(n))
    assert all(sum(comarks[i] * rest.gcm[i][j] for i in range(n)) == 0 for j in range(n))


def test_a2_explicit_gcm(algebra):
    rs, _, _, _ = algebra("A2")
    rest = restrict(rs, diagram_automorphism(rs))
    assert rest.gcm == ((2, -1), (-4, 2)) or rest.gcm == ((2, -4), (-1, 2))


def test_permutation_matcher():
    a = ((2, -1, 0), (-2, 2, -2), (0, -1, 2))
    b = ((2, 0, -1), (0, 2, -1), (-2, -2, 2))  # node order (2, 0, 1)
    assert gcm_permutation_equivalent(a, b)
    c = ((2, -1, 0), (-1, 2, -2), (0, -1, 2))
    assert not gcm_permutation_equivalent(a, c)
    assert not gcm_permutation_equivalent(a, ((2, -1), (-4, 2)))


def test_bad_permutation_rejected(algebra):
    rs, _, _, _ = algebra("A3")
    from affinetoda.rootdata import DiagramAutomorphism

    bad = DiagramAutomorphism(perm=(1, 0, 2), order=2)
    with pytest.raises(ValueError):
        restrict(rs, bad)


class TestFoldedResidual:
    def make_symmetric_field(self, rs, nu, n=12, seed=6, amplitude=0.2):
        grid = DomainGrid.make("torus", n, n)
        field = random_trig_field(rs.rank, seed=seed, amplitude=amplitude)
        return field.symmetrized(nu.perm).sample(grid)

    @pytest.mark.parametrize("name", ["A2", "A3", "A4", "D5", "E6"])
    def test_matches_unfolded_residual(self, name, algebra):
        rs, alg, sl2, _ = algebra(name)
        nu = diagram_automorphism(rs)
        rest = restrict(rs, nu)
        omega = self.make_symmetric_field(rs, nu)
        q = QDifferential.constant(0.7 + 0.4j, coxeter_number(rs))
        folded = restricted_toda_residual(omega, q, rest)
        full = higgs_residual(omega, q, alg, sl2, check_bracket=False)
        assert np.abs(folded - full).max() < 1e-12

    def test_trivial_symmetry_identical(self, algebra):
        rs, alg, sl2, _ = algebra("B2")
        nu = diagram_automorphism(rs)
        rest = restrict(rs, nu)
        omega = self.make_symmetric_field(rs, nu)
        q = QDifferential.constant(1.0, coxeter_number(rs))
        folded = restricted_toda_residual(omega, q, rest)
        full = higgs_residual(omega, q, alg, sl2, check_bracket=False)
        assert np.abs(folded - full).max() < 1e-13

    def test_constant_oracle_is_flat(self, algebra):
        from affinetoda.grids import constant_field
        from affinetoda.todasolver import constant_solution

        rs, alg, sl2, _ = algebra("A2")
        rest = restrict(rs, diagram_automorphism(rs))
        om0, _ = constant_solution(rs, 1.0)
        grid = DomainGrid.make("torus", 8, 8)
        omega = constant_field(grid, om0)
        q = QDifferential.constant(1.0, coxeter_number(rs))
        assert np.abs(restricted_toda_residual(omega, q, rest)).max() < 1e-13

    def test_asymmetric_field_rejected(self, algebra):
        rs, _, _, _ = algebra("A3")
        nu = diagram_automorphism(rs)
        rest = restrict(rs, nu)
        grid = DomainGrid.make("torus", 8, 8)
        vals = np.zeros((8, 8, 3))
        vals[..., 0] = 0.3  # breaks the 1<->3 symmetry
        omega = HFieldGrid(grid, vals)
        assert symmetry_defect(rest, omega) > 1e-12
        q = QDifferential.constant(1.0, coxeter_number(rs))
        with pytest.raises(ValueError):
            restricted_toda_residual(omega, q, rest)
