"""Block-triangular machinery: L-series, projection assembly, dimension
balance, obstruction tests, and the invertible-coefficient variants."""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.dichotomy import ProjectionFamily, verify_dichotomy
from dichoseq.errors import BlockNotInvertible, TriangularNotDichotomic
from dichoseq.gallery import shift_counterexample
from dichoseq.operators import Dense
from dichoseq.systems import (
    BlockTriangularSystem,
    CoefficientSequence,
    LinearSystem,
    Z,
    ZMINUS,
    ZPLUS,
)
from dichoseq.triangular import (
    bounded_solution_block_substitution,
    build_L_operator,
    dimension_balance_test,
    dimension_balance_test_zminus,
    invertible_subspace_tests,
    s2prime_membership,
    tconv1_test,
    triangular_projection_from_diagonal,
    upper_triangular_projection,
)


def _tri_2_half(domain=ZPLUS):
    b11 = LinearSystem.autonomous(domain, Dense(np.array([[2.0]])))
    b22 = LinearSystem.autonomous(domain, Dense(np.array([[0.5]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    return BlockTriangularSystem(b11, coup, b22)


def _diag_certs(tri):
    c11 = verify_dichotomy(tri.blocks11,
                           ProjectionFamily.constant(np.zeros((1, 1)),
                                                     tri.domain))
    c22 = verify_dichotomy(tri.blocks22,
                           ProjectionFamily.constant(np.eye(1), tri.domain))
    assert c11.ok and c22.ok
    return c11, c22


def test_L_series_scalar_oracle():
    # A11 = 2, A22 = 1/2, A12 = 1: the geometric series sums to -2/3
    tri = _tri_2_half()
    c11, c22 = _diag_certs(tri)
    L = build_L_operator(c11, c22, tri.coupler12, truncation_tol=1e-5)
    assert L.tail_bound <= 1e-5
    assert L.k0 <= 10
    assert abs(L.matrix[0, 0] + 2.0 / 3.0) <= 1e-5 + L.tail_bound


def test_triangular_projection_assembly():
    tri = _tri_2_half()
    c11, c22 = _diag_certs(tri)
    L = build_L_operator(c11, c22, tri.coupler12, truncation_tol=1e-8)
    fam = triangular_projection_from_diagonal(L, c11, c22, horizon=40)
    assert np.allclose(fam.at(0), [[0.0, -2.0 / 3.0], [0.0, 1.0]],
                       atol=1e-8)
    cert = verify_dichotomy(tri.assembled, fam, horizon=40)
    assert cert.ok, cert.items


def test_upper_triangular_projection_window_route():
    tri = _tri_2_half()
    fam = upper_triangular_projection(tri, horizon=40)
    assert np.allclose(fam.at(0), [[0.0, -2.0 / 3.0], [0.0, 1.0]],
                       atol=1e-6)
    assert verify_dichotomy(tri.assembled, fam, horizon=40).ok


def test_upper_triangular_projection_zminus_via_duality():
    tri = _tri_2_half(ZMINUS)
    fam = upper_triangular_projection(tri, horizon=40)
    P0 = fam.at(0)
    # lower-triangular projection on the reflected side
    assert abs(P0[0, 1]) < 1e-8
    assert verify_dichotomy(tri.assembled, fam, horizon=40).ok


def test_s2prime_membership_scalar():
    tri = _tri_2_half()
    assert s2prime_membership(np.array([1.0]), tri) is True


def test_dimension_balance_balanced():
    rep = dimension_balance_test(_tri_2_half(), horizon=40)
    assert rep.balanced and (rep.d, rep.d1, rep.d2) == (1, 1, 0)


def test_dimension_balance_unbalanced():
    # rank-deficient first step feeds block 2 into block 1, creating an
    # unstable direction invisible to either block
    b11 = LinearSystem.from_table(
        ZPLUS, {0: Dense(np.array([[0.0]])), 1: Dense(np.array([[2.0]]))},
        extension="constant")
    b22 = LinearSystem.from_table(
        ZPLUS, {0: Dense(np.array([[0.0]])), 1: Dense(np.array([[0.5]]))},
        extension="constant")
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    rep = dimension_balance_test(BlockTriangularSystem(b11, coup, b22),
                                 horizon=40)
    assert (rep.d, rep.d1, rep.d2) == (1, 0, 0)
    assert not rep.balanced


def test_dimension_balance_zminus():
    rep = dimension_balance_test_zminus(_tri_2_half(ZMINUS), horizon=40)
    assert rep.balanced and rep.d == 1


def test_tconv1_clean_case():
    rep = tconv1_test(_tri_2_half(Z), horizon=40)
    assert rep["triangular_ed"] and rep["diagonal_ed"]
    assert rep["obstruction_dim"] == 0


def test_tconv1_obstructed_case():
    # block 2 switches 2 -> 1/2 at zero, so it carries a bounded complete
    # orbit; with zero coupler the triangular system still splits
    sw22 = LinearSystem.from_table(
        Z, {-1: Dense(np.array([[2.0]])), 0: Dense(np.array([[0.5]]))},
        extension="constant")
    sw11 = LinearSystem.from_table(
        Z, {0: Dense(np.array([[3.0]]))}, extension="constant")
    tri = BlockTriangularSystem(
        sw11, CoefficientSequence.autonomous(Dense(np.array([[0.0]]))), sw22)
    rep = tconv1_test(tri, horizon=40)
    assert not rep["diagonal_ed"]
    assert rep["obstruction_dim"] == 1


def test_tconv1_gallery_symbolic():
    inst = shift_counterexample(Fraction(3, 2))
    rep = tconv1_test(inst.system)
    assert rep["triangular_ed"] and not rep["diagonal_ed"]
    assert rep["obstruction_dim"] == 1 and rep["exact"]


def test_block_substitution_solver():
    tri = _tri_2_half()
    sol = bounded_solution_block_substitution(tri, {5: np.array([1.0, 1.0])},
                                              (0, 20))
    assert sol.residual < 1e-6


def test_invertible_subspace_tests_both_domains():
    inv = invertible_subspace_tests(_tri_2_half(), horizon=40)
    assert inv["triangular_ed"] and inv["diagonal_ed"]
    assert inv["S2"].dim == 1
    invz = invertible_subspace_tests(_tri_2_half(ZMINUS), horizon=40)
    assert invz["diagonal_ed"]
    assert invz["U2"].dim == 0


def test_invertible_tests_reject_symbolic():
    inst = shift_counterexample(Fraction(3, 2))
    with pytest.raises(BlockNotInvertible):
        invertible_subspace_tests(inst.system)


def test_balance_raises_without_triangular_ed():
    b11 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[1.0]])))
    b22 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[1.0]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[0.0]])))
    with pytest.raises(TriangularNotDichotomic):
        dimension_balance_test(BlockTriangularSystem(b11, coup, b22),
                               horizon=40)
