"""Duality transforms: adjoint time reversal B(n) = A(-n-1)* with
projection transport P~(n) = P(-n)*, and the coefficientwise
inverse-adjoint system for invertible coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlockNotInvertible
from .operators import Dense, mat_conj_t, mat_to_complex
from .dichotomy import DEFAULT_TOLERANCES, ProjectionFamily
from .systems import BlockTriangularSystem, LinearSystem, _CallableSeq

__all__ = [
    "DualSystemPair",
    "adjoint_time_reversal",
    "transport_projections",
    "inverse_adjoint",
]


@dataclass
class DualSystemPair:
    original: object
    dual: LinearSystem
    transform: str


def _plain(sys):
    return sys.assembled if isinstance(sys, BlockTriangularSystem) else sys


def adjoint_time_reversal(sys) -> DualSystemPair:
    """Dual system B(n) = A(-n-1)* on the reflected domain.

    Upper-triangular coefficients become lower-triangular with the coupler
    moved to the (2,1) block.  An index audit worth remembering: B(0) is
    the adjoint of A(-1).
    """
    plain = _plain(sys)

    def coef(n, _orig=plain):
        return _orig.coefficient(-n - 1).adjoint()

    dual = LinearSystem(plain.domain.reflected(), _CallableSeq(coef),
                        plain.dim)
    return DualSystemPair(original=sys, dual=dual,
                          transform="adjoint_reversal")


def transport_projections(proj: ProjectionFamily) -> ProjectionFamily:
    """Transported family P~(n) = P(-n)* on the reflected domain."""

    def rule(n, _p=proj):
        return mat_conj_t(np.asarray(_p.at(-n)))

    return ProjectionFamily(rule, proj.domain.reflected(), proj.dim)


def inverse_adjoint(sys, eps_inv: float = None) -> DualSystemPair:
    """Coefficientwise (A(n)*)^-1 on the same domain.

    Upper-triangular input yields lower-triangular output with diagonal
    blocks (A_ii(n)*)^-1.  Raises BlockNotInvertible lazily when a
    coefficient in use falls below the invertibility threshold.
    """
    eps = DEFAULT_TOLERANCES["eps_inv"] if eps_inv is None else eps_inv
    plain = _plain(sys)
    if plain.is_symbolic():
        raise BlockNotInvertible(
            "symbolic coefficient has no certified inverse-adjoint "
            "(the unilateral shift is not invertible)"
        )

    def coef(n, _orig=plain, _eps=eps):
        M = mat_conj_t(mat_to_complex(_orig.matrix(n)))
        sv = np.linalg.svd(M, compute_uv=False)
        if sv.size == 0 or sv[-1] < _eps:
            raise BlockNotInvertible(
                f"coefficient at time {n} has smallest singular value "
                f"{0.0 if sv.size == 0 else sv[-1]:.3e} < {_eps:.1e}"
            )
        return Dense(np.linalg.inv(M))

    dual = LinearSystem(plain.domain, _CallableSeq(coef), plain.dim)
    return DualSystemPair(original=sys, dual=dual,
                          transform="inverse_adjoint")
