"""Operator algebra: dense/sparse application, adjoints, block assembly,
JSON round trips."""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.errors import DimensionMismatch, SpecParseError
from dichoseq.operators import (
    AdjointShift,
    BlockUpperTri,
    Compose,
    CoordProjection,
    Dense,
    Identity,
    Scale,
    Shift,
    Sum,
    Vector,
    Zero,
    op_from_json,
    op_to_json,
    to_dense,
)
from dichoseq.scalars import RationalComplex


def test_dense_apply_and_adjoint():
    A = Dense(np.array([[1.0, 2.0], [3.0, 4.0]]))
    v = Vector.dense(np.array([1.0, -1.0]))
    out = A.apply(v)
    assert np.allclose(np.asarray(out.data, dtype=complex), [-1.0, -1.0])
    At = A.adjoint()
    assert np.allclose(to_dense(At, 2), [[1.0, 3.0], [2.0, 4.0]])


def test_shift_is_isometry_adjoint_left_inverse():
    U = Shift()
    Us = AdjointShift()
    v = Vector.sparse({0: 1.0, 3: -2.0})
    shifted = U.apply(v)
    assert shifted.data == {1: 1.0, 4: -2.0}
    back = Us.apply(shifted)
    assert back.data == v.data
    # U* U = Id but U U* kills coordinate 0
    assert Us.apply(U.apply(v)).data == v.data
    w = U.apply(Us.apply(Vector.sparse({0: 5.0})))
    assert w.data == {}


def test_scale_sum_compose_dense_rendering():
    A = Scale(2.0, Identity())
    B = Sum(A, Dense(np.eye(2)))
    assert np.allclose(to_dense(B, 2), 3.0 * np.eye(2))
    C = Compose(Dense(np.array([[0.0, 1.0], [0.0, 0.0]])), B)
    assert np.allclose(to_dense(C, 2), [[0.0, 3.0], [0.0, 0.0]])


def test_block_upper_tri_respects_child_shapes():
    op = BlockUpperTri(Dense(np.array([[2.0]])),
                       Dense(np.array([[1.0]])),
                       Dense(np.array([[0.5]])))
    M = to_dense(op, 2)
    assert M.shape == (2, 2)
    assert np.allclose(M, [[2.0, 1.0], [0.0, 0.5]])


def test_block_upper_tri_rectangular_coupler():
    op = BlockUpperTri(Dense(np.eye(2)),
                       Dense(np.ones((2, 2))),
                       Dense(np.array([[3.0]])))
    M = to_dense(op, 3)
    assert M.shape == (3, 3)
    assert np.allclose(M[:2, 2], [1.0, 1.0])
    assert np.allclose(M[2, :2], 0.0)
    assert M[2, 2] == 3.0


def test_exact_scalar_arithmetic_survives_composition():
    s = RationalComplex(Fraction(3, 2))
    op = Scale(s, AdjointShift())
    v = Vector.sparse({1: RationalComplex(Fraction(2, 3))})
    out = op.apply(v)
    assert out.data[0] == RationalComplex(Fraction(1, 1))


def test_dimension_mismatch_raises():
    A = Dense(np.eye(2))
    with pytest.raises(DimensionMismatch):
        A.apply(Vector.dense(np.zeros(3)))


def test_op_json_roundtrip_dense_and_symbolic():
    for op in (Dense(np.array([[0.5, 1.0], [0.0, 2.0]])),
               Scale(RationalComplex(Fraction(3, 2)), Shift()),
               Zero(), Identity(), CoordProjection(0)):
        back = op_from_json(op_to_json(op), "op")
        assert op_to_json(back) == op_to_json(op)


def test_op_from_json_rejects_garbage():
    with pytest.raises(SpecParseError):
        op_from_json({"kind": "nonsense"}, "op")
