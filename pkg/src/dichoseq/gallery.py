"""Exact shift-operator constructions on the one-sided square-summable
sequence space.

The instance couples an expanded unilateral shift with an expanded
backward shift through the rank-one coordinate projection:
A = [[lam U, lam C], [0, lam U*]] with lam > 1 rational.  The assembled
coefficient scales the product norm exactly by lam (the cross terms are
orthogonal), so the coupled system has a dichotomy with trivial stable
part, while neither diagonal block does: lam U* carries a nonzero bounded
complete orbit and lam U is expanding but not surjective.  All checks here
run in exact rational arithmetic with zero tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import LambdaNotGreaterThanOne, RepresentationMismatch
from .operators import (
    AdjointShift,
    CoordProjection,
    Scale,
    Shift,
    BlockUpperTri,
    Vector,
)
from .scalars import RationalComplex
from .systems import BlockTriangularSystem, CoefficientSequence, LinearSystem, Z

__all__ = [
    "GalleryInstance",
    "shift_counterexample",
    "verify_unitary_growth",
    "bounded_complete_orbit_obstruction",
    "exact_green_solution",
    "gallery_preimage",
    "gallery_preimage_check",
    "exact_perron",
]


def _as_lambda(lam) -> Fraction:
    if isinstance(lam, RationalComplex):
        if lam.im != 0:
            raise LambdaNotGreaterThanOne("lambda must be a real rational")
        lam = lam.re
    lam = Fraction(lam)
    if lam <= 1:
        raise LambdaNotGreaterThanOne(f"lambda = {lam} must exceed 1")
    return lam


@dataclass
class GalleryInstance:
    lam: Fraction
    system: BlockTriangularSystem
    mode: str = "exact"

    @property
    def coefficient(self):
        return self.system.coefficient(0)


def shift_counterexample(lam, domain=Z) -> GalleryInstance:
    """The coupled-shift instance with rational lam > 1.

    The triangular system has a dichotomy (trivial stable part, K = 1,
    alpha = log lam) although neither diagonal block admits one.
    """
    lam = _as_lambda(lam)
    s = RationalComplex(lam)
    b11 = LinearSystem.autonomous(domain, Scale(s, Shift()))
    b22 = LinearSystem.autonomous(domain, Scale(s, AdjointShift()))
    coupler = CoefficientSequence.autonomous(Scale(s, CoordProjection(0)))
    return GalleryInstance(lam=lam,
                           system=BlockTriangularSystem(b11, coupler, b22))


def default_test_vectors(count: int = 10):
    """Finitely supported exact block vectors used by the growth check."""
    out = []
    for k in range(count):
        x = Vector.sparse({k: RationalComplex(1), k + 2: RationalComplex(1, 1)})
        y = Vector.sparse({(k * 3) % 7: RationalComplex(Fraction(2, 3))})
        if k % 3 == 0:
            y = Vector.zero_sparse()
        if k % 4 == 3:
            x = Vector.zero_sparse()
        out.append(Vector.block(x, y))
    return out


def verify_unitary_growth(instance: GalleryInstance, test_vectors=None,
                          n_max: int = 40) -> dict:
    """Exact check that ||A^n v||^2 = lam^(2n) ||v||^2 for n <= n_max.

    Any nonzero residual is a failure; on success the report certifies the
    dichotomy constants K = 1, alpha = log lam for the trivial stable
    splitting."""
    if test_vectors is None:
        test_vectors = default_test_vectors()
    A = instance.coefficient
    lam_sq = instance.lam ** 2
    failures = []
    checks = 0
    for i, v in enumerate(test_vectors):
        base = v.norm_sq()
        w = v
        factor = Fraction(1)
        for n in range(1, n_max + 1):
            w = A.apply(w)
            factor *= lam_sq
            checks += 1
            if w.norm_sq() != factor * base:
                failures.append({"vector": i, "n": n,
                                 "got": float(w.norm_sq()),
                                 "want": float(factor * base)})
                break
    return {
        "ok": not failures,
        "checks": checks,
        "failures": failures,
        "K": 1.0,
        "alpha": math.log(instance.lam),
        "lambda": str(instance.lam),
    }


def bounded_complete_orbit_obstruction(instance: GalleryInstance,
                                       depth: int = 64) -> dict:
    """The nonzero bounded complete orbit of the backward-shift block, plus
    the orbit witnessing uniqueness failure at zero.

    Orbit 1: x(0) = e0, x(-n) = lam^(-n) e_n, x(n) = 0 for n >= 1; every
    step x(n+1) = lam U* x(n) holds exactly and sup ||x(n)|| = 1.
    Orbit 2: x(0) = 0, x(-n) = lam^(-n) e_(n-1) for n >= 1.
    """
    lam = instance.lam
    A22 = Scale(RationalComplex(lam), AdjointShift())
    inv = Fraction(1, 1)
    orbit = {0: Vector.basis(0, exact=True), 1: Vector.zero_sparse()}
    orbit2 = {0: Vector.zero_sparse()}
    for n in range(1, depth + 1):
        inv = inv / lam
        orbit[-n] = Vector.sparse({n: RationalComplex(inv)})
        orbit2[-n] = Vector.sparse({n - 1: RationalComplex(inv)})
    steps_ok = all(
        A22.apply(orbit[n]) == orbit[n + 1]
        for n in range(-depth, 1)
    )
    steps2_ok = all(
        A22.apply(orbit2[n]) == orbit2[n + 1]
        for n in range(-depth, 0)
    )
    sup_sq = max(float(v.norm_sq()) for v in orbit.values())
    return {
        "ok": steps_ok and steps2_ok and sup_sq == 1.0,
        "depth": depth,
        "orbit": orbit,
        "sup_norm": math.sqrt(sup_sq),
        "uniqueness_failure_orbit": orbit2,
        "exact": True,
    }


def exact_green_solution(lam, y: dict, tail: int = 0) -> dict:
    """Exact bounded solution of x(n+1) = lam U* x(n) + y(n) on Z for
    finitely time-supported input y: x(n) = -sum_{j>=1} lam^(-j) U^j
    y(n+j-1).  Returns the solution on the support window (zero outside to
    the right)."""
    lam = _as_lambda(lam)
    if not y:
        return {}
    times = sorted(y)
    lo, hi = times[0], times[-1]
    U = Shift()
    sol = {}
    for n in range(lo - tail, hi + 2):
        acc = Vector.zero_sparse()
        coeff = Fraction(1)
        for j in range(1, hi - n + 2):
            coeff = coeff / lam
            yk = y.get(n + j - 1)
            if yk is not None:
                term = yk
                for _ in range(j):
                    term = U.apply(term)
                acc = acc - term.scale(RationalComplex(coeff))
        sol[n] = acc
    return sol


def _gallery_pattern(A):
    """Returns lam (Fraction) when A is the coupled-shift coefficient."""
    if not isinstance(A, BlockUpperTri):
        return None
    ops = (A.op11, A.op12, A.op22)
    kinds = (Shift, CoordProjection, AdjointShift)
    lams = []
    for op, kind in zip(ops, kinds):
        if not (isinstance(op, Scale) and isinstance(op.child, kind)):
            return None
        s = op.scalar
        if not isinstance(s, RationalComplex) or s.im != 0:
            return None
        lams.append(s.re)
    if isinstance(A.op12.child, CoordProjection) and A.op12.child.k != 0:
        return None
    if len(set(lams)) != 1 or lams[0] <= 1:
        return None
    return lams[0]


def gallery_preimage(A, v: Vector) -> Vector:
    """Exact preimage under the coupled-shift coefficient: for (a, b) the
    vector (U*((a - a0 e0)/lam), U(b/lam) + (a0/lam) e0)."""
    lam = _gallery_pattern(A)
    if lam is None:
        raise RepresentationMismatch("not a coupled-shift coefficient")
    if v.kind != "block":
        raise RepresentationMismatch("preimage needs a block vector")
    a, b = v.data
    inv = RationalComplex(Fraction(1, 1) / lam)
    a0 = a.data.get(0, RationalComplex(0))
    a_rest = Vector.sparse({k: x for k, x in a.data.items() if k != 0})
    x = AdjointShift().apply(a_rest.scale(inv))
    yv = Shift().apply(b.scale(inv))
    t = inv * a0
    if t:
        yv = yv + Vector.sparse({0: t})
    return Vector.block(x, yv)


def gallery_preimage_check(A, samples: int = 6):
    """True when A is the coupled-shift coefficient and explicit preimages
    reproduce sample vectors exactly; None when the pattern is unknown."""
    if _gallery_pattern(A) is None:
        return None
    for k in range(samples):
        v = Vector.block(Vector.basis(k, exact=True),
                         Vector.basis((k + 1) % samples, exact=True))
        if A.apply(gallery_preimage(A, v)) != v:
            return False
    return True


def exact_perron(sys: LinearSystem):
    """Exact admissibility verdicts for the symbolic gallery coefficients.

    lam U*: solvable (explicit summation formula) but bounded complete
    orbits are nonunique.  lam U: not solvable (the impulse at coordinate 0
    forces growth) though complete bounded orbits are trivial.  The coupled
    triangular coefficient: solvable and unique (it is an invertible
    uniform expansion)."""
    from .admissibility import AdmissibilityVerdict

    A = sys.coefficient(0 if sys.domain.kind != "Z-" else -1)
    kind = sys.domain.kind
    details = {"exact": True}
    lam_tri = _gallery_pattern(A)
    if lam_tri is not None:
        details["witness"] = "invertible uniform expansion by lambda"
        return AdmissibilityVerdict(domain=kind, solvable=True, unique=True,
                                    gamma_norm_estimate=float(
                                        1 / (lam_tri - 1)),
                                    details=details)
    if isinstance(A, Scale) and isinstance(A.scalar, RationalComplex) \
            and A.scalar.im == 0 and A.scalar.re > 1:
        lam = A.scalar.re
        if isinstance(A.child, AdjointShift):
            details["witness"] = ("nonzero bounded complete orbit "
                                  "x(-n) = lam^-n e_n")
            return AdmissibilityVerdict(
                domain=kind, solvable=True, unique=False,
                unique_at_zero=False,
                gamma_norm_estimate=float(1 / (lam - 1)),
                details=details)
        if isinstance(A.child, Shift):
            details["witness"] = ("impulse e0 at time 0 admits no bounded "
                                  "solution: the 0th coordinate cannot be "
                                  "cancelled inside the shift range")
            return AdmissibilityVerdict(domain=kind, solvable=False,
                                        unique=True,
                                        gamma_norm_estimate=math.inf,
                                        details=details)
    raise RepresentationMismatch(
        "no exact admissibility rule for this symbolic coefficient"
    )
