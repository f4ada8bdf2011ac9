"""Orthonormal bases, principal angles, intersections, complements."""

import numpy as np

from dichoseq.subspaces import (
    SubspaceBasis,
    intersection,
    max_principal_angle,
    orth,
    orthogonal_complement,
    principal_angles,
)


def test_orth_rank_decision():
    cols = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
    S = orth(cols)
    assert S.dim == 1 and S.ambient_dim == 3


def test_principal_angles_orthogonal_planes():
    A = SubspaceBasis(np.array([[1.0], [0.0], [0.0]]))
    B = SubspaceBasis(np.array([[0.0], [1.0], [0.0]]))
    assert abs(max_principal_angle(A, B) - np.pi / 2) < 1e-12
    assert max_principal_angle(A, A) < 1e-8


def test_principal_angles_known_value():
    A = SubspaceBasis(np.array([[1.0], [0.0]]))
    v = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
    B = SubspaceBasis(v)
    angles = principal_angles(A, B)
    assert abs(angles[0] - np.pi / 4) < 1e-12


def test_intersection_and_complement():
    # span{e0,e1} meet span{e1,e2} = span{e1}
    A = orth(np.eye(3)[:, :2])
    B = orth(np.eye(3)[:, 1:])
    I = intersection(A, B)
    assert I.dim == 1
    assert I.contains(np.array([0.0, 1.0, 0.0]))
    C = orthogonal_complement(A)
    assert C.dim == 1 and C.contains(np.array([0.0, 0.0, 1.0]))


def test_contains_tolerance():
    S = SubspaceBasis(np.array([[1.0], [0.0]]))
    assert S.contains(np.array([2.0, 0.0]))
    assert not S.contains(np.array([1.0, 0.5]))
