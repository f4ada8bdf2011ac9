"""Orthonormal subspace bases, principal angles, intersections, and
complements for the finite-dimensional computations."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch

__all__ = [
    "SubspaceBasis",
    "orth",
    "principal_angles",
    "max_principal_angle",
    "intersection",
    "orthogonal_complement",
]


class SubspaceBasis:
    """Columns form an orthonormal basis; rank decided at ``tol``."""

    def __init__(self, basis: np.ndarray, tol: float = 1e-10):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2:
            basis = basis.reshape(len(basis), -1)
        self.basis = basis
        self.tol = tol

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def codim(self) -> int:
        return self.ambient_dim - self.dim

    def contains(self, v: np.ndarray, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=complex).ravel()
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        r = v - self.basis @ (self.basis.conj().T @ v)
        return np.linalg.norm(r) <= tol * nv

    def project(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex).ravel()
        return self.basis @ (self.basis.conj().T @ v)

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


def orth(columns: np.ndarray, tol: float = 1e-10) -> SubspaceBasis:
    """Orthonormalize the column span (SVD-based rank decision)."""
    a = np.asarray(columns, dtype=complex)
    if a.ndim != 2:
        a = a.reshape(len(a), -1)
    if a.shape[1] == 0:
        return SubspaceBasis(np.zeros((a.shape[0], 0)), tol)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    r = int(np.sum(s > cutoff))
    return SubspaceBasis(u[:, :r], tol)


def principal_angles(a: SubspaceBasis, b: SubspaceBasis) -> np.ndarray:
    """Principal angles (radians, ascending) between the two spans."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(a.basis, b.basis))


def max_principal_angle(a: SubspaceBasis, b: SubspaceBasis) -> float:
    """Largest principal angle; pi/2 when dimensions differ (spans cannot
    coincide)."""
    if a.dim != b.dim:
        return float(np.pi / 2) if (a.dim or b.dim) else 0.0
    ang = principal_angles(a, b)
    return float(ang[-1]) if ang.size else 0.0


def intersection(a: SubspaceBasis, b: SubspaceBasis,
                 tol: float = 1e-8) -> SubspaceBasis:
    """Basis of the intersection: directions with cos(angle) within tol of 1."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return SubspaceBasis(np.zeros((a.ambient_dim, 0)))
    u, s, _ = np.linalg.svd(a.basis.conj().T @ b.basis)
    r = int(np.sum(s >= 1.0 - tol))
    return SubspaceBasis(a.basis @ u[:, :r])


def orthogonal_complement(a: SubspaceBasis) -> SubspaceBasis:
    """Orthogonal complement within the ambient space."""
    n, k = a.ambient_dim, a.dim
    if k == 0:
        return SubspaceBasis(np.eye(n, dtype=complex))
    q, _ = np.linalg.qr(np.hstack([a.basis, np.eye(n, dtype=complex)]))
    comp = q[:, k:n]
    # guard against rank issues in the padded QR
    resid = comp - a.basis @ (a.basis.conj().T @ comp)
    return orth(resid)
