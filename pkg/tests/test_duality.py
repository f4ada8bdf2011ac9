"""Adjoint time reversal, projection transport, inverse adjoints."""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.dichotomy import (
    ProjectionFamily,
    fit_projection_family,
    verify_dichotomy,
)
from dichoseq.duality import (
    adjoint_time_reversal,
    inverse_adjoint,
    transport_projections,
)
from dichoseq.errors import BlockNotInvertible
from dichoseq.gallery import shift_counterexample
from dichoseq.operators import Dense
from dichoseq.systems import LinearSystem, Z, ZMINUS, ZPLUS


def test_dual_coefficient_indexing():
    table = {n: Dense(np.array([[float(n + 10), 1.0], [0.0, 0.5]]))
             for n in range(-5, 5)}
    sys = LinearSystem.from_table(Z, table, extension="constant")
    pair = adjoint_time_reversal(sys)
    # B(0) = A(-1)*
    assert np.allclose(pair.dual.matrix(0), np.conj(table[-1].matrix).T)
    assert np.allclose(pair.dual.matrix(-3), np.conj(table[2].matrix).T)


def test_transport_recertifies_diagonal():
    sys = LinearSystem.autonomous(Z, Dense(np.diag([0.5, 2.0])))
    fam = ProjectionFamily.constant(np.diag([1.0, 0.0]), Z)
    cert = verify_dichotomy(sys, fam)
    pair = adjoint_time_reversal(sys)
    dual_cert = verify_dichotomy(pair.dual, transport_projections(fam))
    assert dual_cert.ok
    assert abs(dual_cert.alpha - cert.alpha) < 1e-9
    assert dual_cert.K <= cert.K * 1.05 and cert.K <= dual_cert.K * 1.05


def test_transport_zplus_to_zminus():
    sys = LinearSystem.autonomous(ZPLUS,
                                  Dense(np.array([[2.0, 1.0], [0.0, 0.5]])))
    fam = fit_projection_family(sys)
    cert = verify_dichotomy(sys, fam)
    assert cert.ok
    pair = adjoint_time_reversal(sys)
    assert pair.dual.domain == ZMINUS
    tf = transport_projections(fam)
    dual_cert = verify_dichotomy(pair.dual, tf)
    assert dual_cert.ok, dual_cert.items
    # kernel dimension is preserved: P~(0) = P(0)*
    P0 = np.asarray(fam.at(0))
    Q0 = np.asarray(tf.at(0))
    assert np.linalg.matrix_rank(Q0, tol=1e-8) == \
        np.linalg.matrix_rank(P0, tol=1e-8)


def test_inverse_adjoint_block_structure():
    # [[2,1],[0,1/2]] -> (A*)^-1 = [[1/2,0],[-1,2]]: zero upper right,
    # diagonal entries are the inverse adjoints of the diagonal blocks
    sys = LinearSystem.autonomous(ZPLUS,
                                  Dense(np.array([[2.0, 1.0], [0.0, 0.5]])))
    pair = inverse_adjoint(sys)
    B = np.asarray(pair.dual.matrix(0), dtype=complex)
    assert np.allclose(B, [[0.5, 0.0], [-1.0, 2.0]], atol=1e-12)
    assert B[0, 1] == 0.0


def test_inverse_adjoint_rejects_singular_and_symbolic():
    sing = LinearSystem.autonomous(Z, Dense(np.array([[0.0]])))
    pair = inverse_adjoint(sing)
    with pytest.raises(BlockNotInvertible):
        pair.dual.matrix(0)
    inst = shift_counterexample(Fraction(3, 2))
    with pytest.raises(BlockNotInvertible):
        inverse_adjoint(inst.system.blocks11)
