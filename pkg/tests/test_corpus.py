"""Seeded corpus generators: determinism and advertised properties."""

import numpy as np
import pytest

from dichoseq.admissibility import perron_test
from dichoseq.corpus import (
    search_unbalanced_instance,
    seeded_random_system,
    seeded_rational_system,
    seeded_triangular_system,
    unbalanced_instance,
)
from dichoseq.dichotomy import (
    bounded_subspace,
    fit_projection_family,
    verify_dichotomy,
)
from dichoseq.systems import Z, ZPLUS
from dichoseq.triangular import dimension_balance_test


def test_determinism():
    a = seeded_random_system(7, 3)
    b = seeded_random_system(7, 3)
    for n in (-3, 0, 5):
        assert np.array_equal(a.matrix(n), b.matrix(n))


def test_dim_precondition():
    with pytest.raises(ValueError):
        seeded_random_system(1, 0)


def test_hyperbolic_conjugated_has_dichotomy():
    for seed in (0, 1, 2):
        sys = seeded_random_system(seed, 4, "hyperbolic_conjugated", Z)
        fam = fit_projection_family(sys, horizon=60)
        assert fam is not None, seed
        cert = verify_dichotomy(sys, fam, horizon=60)
        assert cert.ok, (seed, cert.items)
        assert perron_test(sys, horizon=60).predicts_dichotomy


def test_switching_has_no_dichotomy():
    sw = seeded_random_system(2, 1, "switching", Z)
    assert fit_projection_family(sw, horizon=60) is None
    assert not perron_test(sw, horizon=60).predicts_dichotomy


def test_near_critical_is_indeterminate():
    nc = seeded_random_system(3, 3, "near_critical", Z)
    _, cls = bounded_subspace(nc, "forward", 60)
    assert cls.indeterminate


def test_rational_system_is_exact():
    rs = seeded_rational_system(7, 3)
    M = rs.matrix(0)
    assert M.dtype == object
    co = rs.cocycle()
    from dichoseq.operators import mat_mul
    P = co.dense(10, 0)
    Q = mat_mul(co.dense(10, 4), co.dense(4, 0))
    assert all(P[i, j] == Q[i, j] for i in range(3) for j in range(3))


def test_triangular_corpus_balanced():
    tri = seeded_triangular_system(1, 2, 2)
    assert tri.domain == ZPLUS
    rep = dimension_balance_test(tri, horizon=50)
    assert rep.balanced and rep.d == rep.d1 + rep.d2


def test_unbalanced_instances():
    rep = dimension_balance_test(unbalanced_instance(), horizon=40)
    assert not rep.balanced
    cand, rep2 = search_unbalanced_instance(0)
    assert not rep2.balanced and rep2.d == 1
