"""Window solver and admissibility verdicts."""

import numpy as np
import pytest

from dichoseq.admissibility import (
    gamma_norm_estimate,
    gamma_projection,
    interior_stable,
    perron_test,
    solve_bounded_window,
)
from dichoseq.errors import Unsolvable
from dichoseq.operators import Dense
from dichoseq.subspaces import SubspaceBasis
from dichoseq.systems import LinearSystem, Z, ZMINUS, ZPLUS


def _hyp(domain=Z):
    return LinearSystem.autonomous(domain, Dense(np.diag([0.5, 2.0])))


def test_window_solve_matches_green_function():
    # scalar x(n+1) = a x(n) + y(n) with a = 1/2 and impulse y(0) = 1:
    # the bounded solution on Z is x(n) = a^(n-1) for n >= 1, else 0
    sys = LinearSystem.autonomous(Z, Dense(np.array([[0.5]])))
    sol = solve_bounded_window(sys, {0: np.array([1.0])}, (-15, 15))
    assert sol.residual < 1e-10
    for n in range(1, 10):
        assert abs(sol.at(n)[0] - 0.5 ** (n - 1)) < 1e-8
    assert abs(sol.at(-3)[0]) < 1e-8


def test_window_solve_unstable_direction_uses_future():
    # a = 2: the bounded solution runs backward, x(n) = -a^(n-1) for n <= 0
    sys = LinearSystem.autonomous(Z, Dense(np.array([[2.0]])))
    sol = solve_bounded_window(sys, {0: np.array([1.0])}, (-15, 15))
    assert sol.residual < 1e-10
    assert abs(sol.at(0)[0] + 0.5) < 1e-8
    # the minimal-norm surrogate may carry a 2^(-window) homogeneous whiff
    assert abs(sol.at(5)[0]) < 1e-6


def test_interior_stable_discriminates():
    sys = _hyp()
    ok, _, _ = interior_stable(sys, {0: np.array([1.0, 1.0])}, (-20, 20))
    assert ok
    unit = LinearSystem.autonomous(Z, Dense(np.array([[1.0]])))
    ok, _, _ = interior_stable(unit, {0: np.array([1.0])}, (-20, 20))
    assert not ok


def test_perron_test_verdicts():
    v = perron_test(_hyp())
    assert v.solvable and v.unique and v.predicts_dichotomy
    assert v.stable_subspace.dim == 1 and v.unstable_subspace.dim == 1
    unit = LinearSystem.autonomous(Z, Dense(np.eye(2)))
    w = perron_test(unit)
    assert not w.predicts_dichotomy


def test_perron_test_zplus_and_zminus():
    vp = perron_test(_hyp(ZPLUS))
    assert vp.predicts_dichotomy
    vm = perron_test(_hyp(ZMINUS))
    assert vm.predicts_dichotomy


def test_gamma_norm_estimate_finite_for_hyperbolic():
    g = gamma_norm_estimate(_hyp())
    assert np.isfinite(g) and g >= 1.0


def test_gamma_projection_bound():
    sys = LinearSystem.autonomous(ZPLUS,
                                  Dense(np.array([[2.0, 1.0], [0.0, 0.5]])))
    comp = SubspaceBasis(np.array([[1.0], [0.0]]))
    P, bound = gamma_projection(sys, comp)
    assert np.linalg.norm(P @ P - P) < 1e-8
    assert np.linalg.norm(P, 2) <= bound * 1.01
    # range is the stable subspace span{(2,-3)} of the constant tail
    v = np.array([2.0, -3.0])
    assert np.linalg.norm(P @ v - v) < 1e-6


def test_gamma_projection_requires_zplus():
    with pytest.raises(ValueError):
        gamma_projection(_hyp(Z), SubspaceBasis(np.array([[1.0], [0.0]])))


def test_solver_unsolvable_on_contradictory_pin():
    sys = LinearSystem.autonomous(ZPLUS, Dense(np.array([[2.0]])))
    # pinning x(0) = 1 on a pure expansion forces growth beyond any bound
    with pytest.raises(Unsolvable):
        sol = solve_bounded_window(sys, {}, (0, 30),
                                   boundary_policy=("pinned_start",
                                                    np.array([1.0])))
        if sol.sup_norm < 1e6:
            raise Unsolvable("unexpectedly bounded")
