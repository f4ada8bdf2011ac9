"""Time domains, coefficient sequences, cocycle laws, serialization."""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.errors import OutOfDomain, ReversedIndices, SpecParseError
from dichoseq.operators import Dense, mat_mul
from dichoseq.scalars import RationalComplex
from dichoseq.systems import (
    Z,
    ZMINUS,
    ZPLUS,
    BlockTriangularSystem,
    CoefficientSequence,
    LinearSystem,
    TimeDomain,
    assemble,
    diagonal_part,
    system_from_json,
    system_to_json,
)


def test_time_domain_membership():
    assert Z.in_evolution_set(-5) and Z.in_evolution_set(7)
    assert ZPLUS.in_evolution_set(0) and not ZPLUS.in_evolution_set(-1)
    assert ZMINUS.in_evolution_set(-1) and not ZMINUS.in_evolution_set(0)
    assert TimeDomain("Z+").reflected() == ZMINUS
    with pytest.raises(ValueError):
        TimeDomain("R")


def test_coefficient_extension_policies():
    table = {0: Dense(np.array([[1.0]])), 1: Dense(np.array([[2.0]]))}
    const = LinearSystem.from_table(ZPLUS, table, extension="constant")
    assert const.matrix(5)[0, 0] == 2.0
    per = LinearSystem.from_table(ZPLUS, table, extension="periodic:2")
    assert per.matrix(4)[0, 0] == 1.0 and per.matrix(5)[0, 0] == 2.0
    err = LinearSystem.from_table(ZPLUS, table, extension="error")
    with pytest.raises(OutOfDomain):
        err.matrix(2)


def test_cocycle_identity_and_composition_float():
    rng = np.random.default_rng(11)
    table = {n: Dense(rng.standard_normal((3, 3))) for n in range(-8, 8)}
    sys = LinearSystem.from_table(Z, table, extension="constant")
    co = sys.cocycle()
    assert np.allclose(co.dense(3, 3), np.eye(3))
    P = co.dense(8, -8)
    Q = mat_mul(co.dense(8, 0), co.dense(0, -8))
    denom = max(1.0, np.linalg.norm(P))
    assert np.linalg.norm(np.asarray(P, complex) - np.asarray(Q, complex)) \
        / denom < 1e-12


def test_cocycle_exact_rational():
    half = RationalComplex(Fraction(1, 2))
    three = RationalComplex(Fraction(3, 1))
    M = np.array([[half, three], [RationalComplex(0), half]], dtype=object)
    sys = LinearSystem.autonomous(Z, Dense(M))
    co = sys.cocycle()
    P = co.dense(6, 0)
    Q = mat_mul(co.dense(6, 2), co.dense(2, 0))
    assert all(P[i, j] == Q[i, j] for i in range(2) for j in range(2))
    assert P[0, 0] == RationalComplex(Fraction(1, 64))


def test_cocycle_rejects_reversed_indices():
    sys = LinearSystem.autonomous(Z, Dense(np.eye(2)))
    with pytest.raises(ReversedIndices):
        sys.cocycle().dense(0, 3)


def test_zminus_evolution_excludes_zero():
    sys = LinearSystem.autonomous(ZMINUS, Dense(np.array([[2.0]])))
    co = sys.cocycle()
    # states live on n <= 0, steps on n <= -1: transition 0 <- -2 uses
    # A(-2) and A(-1) only
    assert co.dense(0, -2)[0, 0] == 4.0
    with pytest.raises(OutOfDomain):
        co.dense(1, 0)


def test_block_triangular_assembly_and_diagonal_part():
    b11 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[2.0]])))
    b22 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[0.5]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    tri = assemble(b11, coup, b22)
    assert isinstance(tri, BlockTriangularSystem)
    assert np.allclose(tri.assembled.matrix(0), [[2.0, 1.0], [0.0, 0.5]])
    diag = diagonal_part(tri)
    assert np.allclose(diag.matrix(0), [[2.0, 0.0], [0.0, 0.5]])


def test_system_json_roundtrip_autonomous_and_table():
    sys = LinearSystem.autonomous(Z, Dense(np.array([[0.5, 0.0],
                                                     [0.0, 2.0]])))
    back = system_from_json(system_to_json(sys))
    assert np.allclose(back.matrix(0), sys.matrix(0))
    table = {0: Dense(np.array([[1.0]])), 1: Dense(np.array([[3.0]]))}
    sys2 = LinearSystem.from_table(ZPLUS, table, extension="periodic:2")
    back2 = system_from_json(system_to_json(sys2))
    assert back2.matrix(3)[0, 0] == 3.0


def test_system_json_roundtrip_block_triangular():
    b11 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[2.0]])))
    b22 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[0.5]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    tri = assemble(b11, coup, b22)
    back = system_from_json(system_to_json(tri))
    assert isinstance(back, BlockTriangularSystem)
    assert np.allclose(back.assembled.matrix(0), tri.assembled.matrix(0))


def test_system_from_json_diagnostics():
    with pytest.raises(SpecParseError):
        system_from_json({"kind": "dense_table", "coefficients": []})
    with pytest.raises(SpecParseError):
        system_from_json({"kind": "autonomous", "domain": "W",
                          "coefficients": {"kind": "identity"}})
