"""Deterministic seeded test-system generators.

Kinds: hyperbolic_conjugated (orthogonally conjugated hyperbolic diagonal,
always carries a dichotomy), switching (rates alternating at exponentially
growing times, no dichotomy), near_critical (moduli inside the tolerance
band around the unit circle, indeterminate at default gap_tol).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg

from .operators import Dense
from .scalars import RationalComplex
from .systems import (
    BlockTriangularSystem,
    CoefficientSequence,
    LinearSystem,
    Z,
    ZPLUS,
    TimeDomain,
    _CallableSeq,
)

__all__ = [
    "seeded_random_system",
    "seeded_rational_system",
    "seeded_triangular_system",
    "unbalanced_instance",
    "search_unbalanced_instance",
]

_STABLE = (1.0 / 3.0, 2.0 / 3.0)
_UNSTABLE = (1.5, 3.0)


def _hyperbolic_diagonal(rng, dim):
    n_stable = int(rng.integers(0, dim + 1))
    rates = np.concatenate([
        rng.uniform(*_STABLE, size=n_stable),
        rng.uniform(*_UNSTABLE, size=dim - n_stable),
    ])
    signs = rng.choice([-1.0, 1.0], size=dim)
    return np.diag(rates * signs)


def _skew(rng, dim):
    M = rng.standard_normal((dim, dim))
    return (M - M.T) / 2.0


def seeded_random_system(seed: int, dim: int,
                         kind: str = "hyperbolic_conjugated",
                         domain: TimeDomain = Z) -> LinearSystem:
    """Deterministic generator of dense test systems.

    hyperbolic_conjugated: A(n) = Q(n+1) D Q(n)^T with D a hyperbolic
    diagonal (moduli in [1/3,2/3] or [3/2,3]) and Q(n) = exp(W sin(0.7 n))
    orthogonal, so the cocycle telescopes to Q(m) D^(m-n) Q(n)^T and the
    conjugation stays uniformly bounded.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    if kind == "hyperbolic_conjugated":
        D = _hyperbolic_diagonal(rng, dim)
        W = _skew(rng, dim)
        cache = {}

        def Q(n):
            if n not in cache:
                cache[n] = scipy.linalg.expm(W * np.sin(0.7 * n))
            return cache[n]

        def coef(n):
            return Dense(Q(n + 1) @ D @ Q(n).T)

        return LinearSystem(domain, _CallableSeq(coef), dim)
    if kind == "switching":
        # moduli alternate between expanding and contracting on blocks
        # whose lengths double, so windowed growth rates never settle
        lam = float(rng.uniform(1.6, 2.4))
        phase = int(rng.integers(0, 2))

        def block_index(n):
            k = 0
            t = abs(int(n))
            edge = 2
            while t >= edge:
                k += 1
                edge *= 2
            return k + (1 if n < 0 else 0)

        def coef(n):
            up = (block_index(n) + phase) % 2 == 0
            r = lam if up else 1.0 / lam
            return Dense(np.eye(dim) * r)

        return LinearSystem(domain, _CallableSeq(coef), dim)
    if kind == "near_critical":
        moduli = rng.uniform(0.985, 1.015, size=dim)
        signs = rng.choice([-1.0, 1.0], size=dim)
        W = _skew(rng, dim)
        R = scipy.linalg.expm(W)
        A = R @ np.diag(moduli * signs) @ R.T
        return LinearSystem.autonomous(domain, Dense(A))
    raise ValueError(f"unknown corpus kind {kind!r}")


def seeded_rational_system(seed: int, dim: int,
                           domain: TimeDomain = Z,
                           period: int = 3) -> LinearSystem:
    """Periodic system with exact rational entries (object-dtype dense
    matrices), for exact cocycle-law checks."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    table = {}
    for n in range(period):
        M = np.empty((dim, dim), dtype=object)
        for i in range(dim):
            for j in range(dim):
                num = int(rng.integers(-4, 5))
                den = int(rng.integers(1, 5))
                M[i, j] = RationalComplex(Fraction(num, den))
        table[n] = Dense(M)
    return LinearSystem.from_table(domain, table,
                                   extension=f"periodic:{period}")


def seeded_triangular_system(seed: int, d1: int, d2: int,
                             domain: TimeDomain = ZPLUS,
                             invertible: bool = True
                             ) -> BlockTriangularSystem:
    """Block upper-triangular corpus system with hyperbolic conjugated
    diagonal blocks and a bounded random coupler."""
    rng = np.random.default_rng(seed)
    b11 = seeded_random_system(int(rng.integers(1 << 30)), d1,
                               "hyperbolic_conjugated", domain)
    b22 = seeded_random_system(int(rng.integers(1 << 30)), d2,
                               "hyperbolic_conjugated", domain)
    C = rng.uniform(-1.0, 1.0, size=(d1, d2))
    coup = CoefficientSequence.autonomous(Dense(C))
    return BlockTriangularSystem(b11, coup, b22)


def unbalanced_instance() -> BlockTriangularSystem:
    """Triangular Z+ system with a dichotomy whose unstable dimension is
    not the sum of the block codimensions: the rank-deficient first step
    A(0) = [[0,1],[0,0]] feeds every block-2 state into block 1, after
    which the constant tail [[2,1],[0,1/2]] takes over (d = 1 but
    d1 = d2 = 0)."""
    b11 = LinearSystem.from_table(
        ZPLUS, {0: Dense(np.array([[0.0]])), 1: Dense(np.array([[2.0]]))},
        extension="constant")
    b22 = LinearSystem.from_table(
        ZPLUS, {0: Dense(np.array([[0.0]])), 1: Dense(np.array([[0.5]]))},
        extension="constant")
    coup = CoefficientSequence.autonomous(Dense(np.array([[1.0]])))
    return BlockTriangularSystem(b11, coup, b22)


def search_unbalanced_instance(seed: int = 0, tries: int = 40,
                               horizon: int = 40):
    """Randomized search over rank-deficient-first-step families for an
    instance where the triangular system has a dichotomy but the block
    codimensions do not add up to the unstable dimension.

    Samples A(0) = [[0, c], [0, 0]] with a hyperbolic constant tail
    [[a, b], [0, 1/a]] and keeps the first candidate whose balance test
    fails while the triangular certificate holds.  Returns (system,
    DimensionReport)."""
    from .errors import TriangularNotDichotomic
    from .triangular import dimension_balance_test

    rng = np.random.default_rng(seed)
    for _ in range(tries):
        c = float(rng.uniform(0.5, 2.0))
        a = float(rng.uniform(1.6, 2.8))
        b = float(rng.uniform(-1.0, 1.0))
        b11 = LinearSystem.from_table(
            ZPLUS, {0: Dense(np.array([[0.0]])),
                    1: Dense(np.array([[a]]))}, extension="constant")
        b22 = LinearSystem.from_table(
            ZPLUS, {0: Dense(np.array([[0.0]])),
                    1: Dense(np.array([[1.0 / a]]))}, extension="constant")
        coup = CoefficientSequence(
            {0: Dense(np.array([[c]])), 1: Dense(np.array([[b]]))},
            extension="constant")
        cand = BlockTriangularSystem(b11, coup, b22)
        try:
            rep = dimension_balance_test(cand, horizon=horizon)
        except TriangularNotDichotomic:
            continue
        if not rep.balanced:
            return cand, rep
    raise RuntimeError(f"no unbalanced instance found in {tries} tries")
