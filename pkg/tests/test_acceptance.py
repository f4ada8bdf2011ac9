"""Acceptance gate: nine end-to-end criteria, one pass/fail line each.

Each test prints "PASS criterion N: ..." on success; pytest -v plus the
printed lines give the full scorecard.  Tolerances are stated inline.
"""

import numpy as np
import pytest
from fractions import Fraction

from dichoseq.admissibility import gamma_projection, perron_test
from dichoseq.corpus import (
    search_unbalanced_instance,
    seeded_random_system,
    seeded_rational_system,
    seeded_triangular_system,
)
from dichoseq.dichotomy import (
    ProjectionFamily,
    autonomous_projection,
    fit_projection_family,
    verify_dichotomy,
)
from dichoseq.duality import (
    adjoint_time_reversal,
    inverse_adjoint,
    transport_projections,
)
from dichoseq.gallery import (
    bounded_complete_orbit_obstruction,
    shift_counterexample,
    verify_unitary_growth,
)
from dichoseq.operators import Dense, Vector, mat_mul
from dichoseq.subspaces import SubspaceBasis, max_principal_angle, orth, \
    orthogonal_complement
from dichoseq.systems import (
    BlockTriangularSystem,
    CoefficientSequence,
    LinearSystem,
    Z,
    ZPLUS,
    diagonal_part,
)
from dichoseq.triangular import (
    build_L_operator,
    dimension_balance_test,
    invertible_subspace_tests,
    tconv1_test,
    triangular_projection_from_diagonal,
)


def test_criterion_1_cocycle_laws():
    """Phi(m,k)Phi(k,n) = Phi(m,n) and Phi(n,n) = Id: exact for 25
    rational systems, relative error <= 1e-12 for 25 floating systems,
    horizon 40."""
    checked = 0
    for seed in range(25):
        dim = 1 + seed % 3
        rs = seeded_rational_system(seed, dim)
        co = rs.cocycle()
        Idm = co.dense(0, 0)
        assert all(Idm[i, j] == (1 if i == j else 0)
                   for i in range(dim) for j in range(dim))
        P = co.dense(20, -20)
        for k in (-7, 0, 13):
            Q = mat_mul(co.dense(20, k), co.dense(k, -20))
            assert all(P[i, j] == Q[i, j]
                       for i in range(dim) for j in range(dim)), seed
        checked += 1
    for seed in range(25):
        sys = seeded_random_system(seed, 3, "hyperbolic_conjugated", Z)
        co = sys.cocycle()
        assert np.allclose(np.asarray(co.dense(5, 5), complex), np.eye(3),
                           atol=1e-14)
        P = np.asarray(co.dense(20, -20), complex)
        for k in (-11, 2, 9):
            Q = np.asarray(mat_mul(co.dense(20, k), co.dense(k, -20)),
                           complex)
            rel = np.linalg.norm(P - Q) / max(1.0, np.linalg.norm(P))
            assert rel <= 1e-12, (seed, k, rel)
        checked += 1
    assert checked == 50
    print("PASS criterion 1: cocycle laws exact (rational) / <=1e-12 "
          "(float) on 50 seeded systems, horizon 40")


def test_criterion_2_spectral_certificates():
    """Spectral projections for diag(1/2,2) and [[2,1],[0,1/2]]:
    residuals <= 1e-10, fitted alpha within 1e-6 of ln 2."""
    for A in (np.diag([0.5, 2.0]), np.array([[2.0, 1.0], [0.0, 0.5]])):
        fam = autonomous_projection(A)
        sys = LinearSystem.autonomous(Z, Dense(A))
        cert = verify_dichotomy(sys, fam)
        assert cert.ok, cert.items
        assert cert.residuals["idempotency"] <= 1e-10
        assert cert.residuals["conjugation"] <= 1e-10
        assert abs(cert.alpha - np.log(2.0)) <= 1e-6, cert.alpha
    print("PASS criterion 2: spectral certificates, residuals <=1e-10, "
          "alpha within 1e-6 of ln 2")


def test_criterion_3_L_series():
    """For A11 = 2, A22 = 1/2, A12 = 1: L = -2/3 within the reported tail
    bound (<= 1e-5 at k0 <= 10); assembled projection range matches
    span{(2,-3)} within principal angle 1e-8."""
    b11 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[2.0]])))
    b22 = LinearSystem.autonomous(ZPLUS, Dense(np.array([[0.5]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    c11 = verify_dichotomy(b11, ProjectionFamily.constant(np.zeros((1, 1)),
                                                          ZPLUS))
    c22 = verify_dichotomy(b22, ProjectionFamily.constant(np.eye(1), ZPLUS))
    assert c11.ok and c22.ok
    L = build_L_operator(c11, c22, coup, truncation_tol=1e-5)
    assert L.k0 <= 10 and L.tail_bound <= 1e-5
    assert abs(L.matrix[0, 0] + 2.0 / 3.0) <= L.tail_bound
    Lp = build_L_operator(c11, c22, coup, truncation_tol=1e-10)
    fam = triangular_projection_from_diagonal(Lp, c11, c22, horizon=40)
    rng_basis = orth(np.asarray(fam.at(0)))
    target = orth(np.array([[2.0], [-3.0]]))
    assert max_principal_angle(rng_basis, target) <= 1e-8
    print("PASS criterion 3: L = -2/3 within tail bound (k0 <= 10), "
          "projection range matches span{(2,-3)} within 1e-8")


def test_criterion_4_perron_equivalence():
    """perron_test verdict matches verify_dichotomy ground truth on 100
    seeded hyperbolic_conjugated 4x4 systems on Z at horizon 60."""
    matches = 0
    for seed in range(100):
        sys = seeded_random_system(seed, 4, "hyperbolic_conjugated", Z)
        fam = fit_projection_family(sys, horizon=60)
        truth = fam is not None and verify_dichotomy(sys, fam,
                                                     horizon=60).ok
        verdict = perron_test(sys, horizon=60).predicts_dichotomy
        matches += int(truth == verdict)
    assert matches == 100, f"{matches}/100"
    print("PASS criterion 4: perron verdict matches dichotomy ground "
          "truth 100/100 on seeded 4x4 systems")


def test_criterion_5_dimension_balance():
    """d = d1 + d2 whenever the diagonal system has a verified dichotomy;
    the searched unbalanced instance fails balance and its diagonal part
    fails the direct perron test."""
    balanced_checked = 0
    for seed in (1, 2, 3, 4):
        tri = seeded_triangular_system(seed, 2, 2)
        diag = diagonal_part(tri)
        fam = fit_projection_family(diag, horizon=50)
        if fam is None or not verify_dichotomy(diag, fam, horizon=50).ok:
            continue
        rep = dimension_balance_test(tri, horizon=50)
        assert rep.balanced and rep.d == rep.d1 + rep.d2, (seed, rep)
        balanced_checked += 1
    assert balanced_checked >= 3
    cand, rep = search_unbalanced_instance(0)
    assert not rep.balanced
    diag = diagonal_part(cand)
    assert not perron_test(diag, horizon=40).predicts_dichotomy
    print(f"PASS criterion 5: balance d = d1 + d2 on {balanced_checked} "
          "diagonal-dichotomy systems; searched unbalanced instance fails "
          "balance and diagonal perron")


def test_criterion_6_duality_transport():
    """Transported projections recertify the dual with identical alpha and
    K within 5%; kernel dimension at 0 preserved exactly."""
    systems = [LinearSystem.autonomous(Z, Dense(np.diag([0.5, 2.0]))),
               LinearSystem.autonomous(Z, Dense(np.array([[2.0, 1.0],
                                                          [0.0, 0.5]])))]
    for seed in range(4):
        systems.append(seeded_random_system(seed, 3,
                                            "hyperbolic_conjugated", Z))
    for sys in systems:
        fam = fit_projection_family(sys, horizon=60)
        cert = verify_dichotomy(sys, fam, horizon=60)
        assert cert.ok
        pair = adjoint_time_reversal(sys)
        tf = transport_projections(fam)
        dual_cert = verify_dichotomy(pair.dual, tf, horizon=60)
        assert dual_cert.ok, dual_cert.items
        assert abs(dual_cert.alpha - cert.alpha) <= 1e-9
        assert dual_cert.K <= cert.K * 1.05
        assert cert.K <= dual_cert.K * 1.05
        P0 = np.asarray(fam.at(0))
        Q0 = np.asarray(tf.at(0))
        d = P0.shape[0]
        ker = d - np.linalg.matrix_rank(P0, tol=1e-8)
        ker_dual = d - np.linalg.matrix_rank(Q0, tol=1e-8)
        assert ker == ker_dual
    print(f"PASS criterion 6: duality transport recertifies "
          f"{len(systems)} systems, alpha identical, K within 5%, kernel "
          "dims preserved")


def test_criterion_7_gallery_exactness():
    """lambda = 3/2: ||A^n v||^2 = (9/4)^n ||v||^2 exactly for n <= 40
    over 10 sparse vectors; obstruction orbit exact to depth 64; tconv1
    reports no diagonal splitting on the gallery and a diagonal splitting
    on [[2,1],[0,1/2]]."""
    inst = shift_counterexample(Fraction(3, 2))
    vectors = [Vector.block(Vector.basis(k, exact=True),
                            Vector.basis((k + 3) % 10, exact=True))
               for k in range(10)]
    growth = verify_unitary_growth(inst, test_vectors=vectors, n_max=40)
    assert growth["ok"] and not growth["failures"]
    assert growth["checks"] >= 10 * 40
    obs = bounded_complete_orbit_obstruction(inst, depth=64)
    assert obs["ok"] and obs["exact"]
    rep = tconv1_test(inst.system)
    assert rep["triangular_ed"] and not rep["diagonal_ed"]
    b11 = LinearSystem.autonomous(Z, Dense(np.array([[2.0]])))
    b22 = LinearSystem.autonomous(Z, Dense(np.array([[0.5]])))
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    clean = tconv1_test(BlockTriangularSystem(b11, coup, b22), horizon=40)
    assert clean["diagonal_ed"]
    print("PASS criterion 7: gallery growth exact to n = 40 (10 vectors), "
          "obstruction exact to depth 64, tconv1 verdicts correct")


def test_criterion_8_gamma_projection_bound():
    """Constructed projection satisfies P^2 = P (<= 1e-10) and
    ||P|| <= (1 + ||Gamma|| ||A(0)||) * 1.01 on 20 corpus systems on
    Z+."""
    count = 0
    for seed in range(20):
        sys = seeded_random_system(seed, 3, "hyperbolic_conjugated", ZPLUS)
        from dichoseq.dichotomy import bounded_subspace
        S, cls = bounded_subspace(sys, "forward", 60)
        assert not cls.indeterminate, seed
        comp = orthogonal_complement(S)
        P, bound = gamma_projection(sys, comp, horizon=60)
        assert np.linalg.norm(P @ P - P, 2) <= 1e-10, seed
        assert np.linalg.norm(P, 2) <= bound * 1.01, \
            (seed, np.linalg.norm(P, 2), bound)
        count += 1
    assert count == 20
    print("PASS criterion 8: gamma projection idempotent (<=1e-10) and "
          "norm-bounded by (1 + ||Gamma|| ||A(0)||) * 1.01 on 20 Z+ "
          "systems")


def test_criterion_9_invertible_subspace_tests():
    """invertible_subspace_tests verdict matches direct diagonal
    verification on invertible corpus systems; inverse-adjoint block
    structure (zero upper-right, diagonal (A_ii*)^-1) exact."""
    matches = 0
    total = 0
    for seed in range(8):
        tri = seeded_triangular_system(seed, 2, 1)
        diag = diagonal_part(tri)
        fam = fit_projection_family(diag, horizon=50)
        direct = fam is not None and verify_dichotomy(diag, fam,
                                                      horizon=50).ok
        inv = invertible_subspace_tests(tri, horizon=50)
        total += 1
        matches += int(bool(inv["diagonal_ed"]) == direct)
    assert matches == total, f"{matches}/{total}"
    sys = LinearSystem.autonomous(ZPLUS,
                                  Dense(np.array([[2.0, 1.0], [0.0, 0.5]])))
    B = np.asarray(inverse_adjoint(sys).dual.matrix(0), complex)
    assert B[0, 1] == 0.0
    assert B[0, 0] == 0.5 and B[1, 1] == 2.0
    assert np.allclose(B, [[0.5, 0.0], [-1.0, 2.0]], atol=1e-15)
    print(f"PASS criterion 9: invertible-coefficient verdicts match "
          f"direct diagonal verification {matches}/{total}; "
          "inverse-adjoint block structure exact")
