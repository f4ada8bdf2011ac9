"""Exact shift-operator instance on square-summable sequences."""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.dichotomy import ProjectionFamily, verify_dichotomy
from dichoseq.gallery import (
    bounded_complete_orbit_obstruction,
    exact_green_solution,
    exact_perron,
    gallery_preimage,
    gallery_preimage_check,
    shift_counterexample,
    verify_unitary_growth,
)
from dichoseq.operators import Vector
from dichoseq.systems import Z


def test_growth_is_exact():
    inst = shift_counterexample(Fraction(3, 2))
    rep = verify_unitary_growth(inst, n_max=40)
    assert rep["ok"] and not rep["failures"]
    assert rep["K"] == 1.0
    assert abs(rep["alpha"] - np.log(1.5)) < 1e-15


def test_trivial_splitting_certifies_dichotomy():
    inst = shift_counterexample(Fraction(3, 2))
    cert = verify_dichotomy(inst.system.assembled, ProjectionFamily.zero(Z))
    assert cert.ok and cert.exact
    assert abs(cert.alpha - np.log(1.5)) < 1e-12


def test_scaled_adjoint_shift_alone_fails():
    inst = shift_counterexample(Fraction(3, 2))
    from dichoseq.systems import LinearSystem
    b22 = LinearSystem.autonomous(Z, inst.system.blocks22.coefficient(0))
    assert not verify_dichotomy(b22, ProjectionFamily.zero(Z)).ok


def test_bounded_complete_orbit_obstruction():
    inst = shift_counterexample(Fraction(3, 2))
    rep = bounded_complete_orbit_obstruction(inst, depth=64)
    assert rep["ok"] and rep["exact"] and rep["depth"] == 64
    assert rep["sup_norm"] == 1.0


def test_exact_green_solution_formula():
    # x(n+1) = lam U* x(n) + y(n) with impulse y(0) = e0: the summation
    # formula gives x(0) = -(2/3) e1 and then x(1) = lam U* x(0) + e0 = 0
    from dichoseq.scalars import RationalComplex
    sol = exact_green_solution(Fraction(3, 2), {0: Vector.basis(0,
                                                                exact=True)})
    assert sol[0].data == {1: RationalComplex(Fraction(-2, 3))}
    assert sol[1].data == {}


def test_gallery_preimage_roundtrip():
    inst = shift_counterexample(Fraction(3, 2))
    A = inst.system.assembled.coefficient(0)
    assert gallery_preimage_check(A) is True
    v = Vector.block(Vector.basis(2, exact=True), Vector.basis(0, exact=True))
    w = gallery_preimage(A, v)
    assert A.apply(w) == v


def test_exact_perron_verdicts():
    inst = shift_counterexample(Fraction(3, 2))
    coupled = exact_perron(inst.system.assembled)
    assert coupled.solvable and coupled.predicts_dichotomy
    b1 = exact_perron(inst.system.blocks11)
    assert not b1.solvable
    b2 = exact_perron(inst.system.blocks22)
    assert b2.solvable and not b2.predicts_dichotomy


def test_lambda_must_exceed_one():
    from dichoseq.errors import LambdaNotGreaterThanOne
    with pytest.raises(LambdaNotGreaterThanOne):
        shift_counterexample(Fraction(1, 2))
