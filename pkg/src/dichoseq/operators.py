"""Operator expressions and vectors.

Vectors come in three representations: dense coordinate arrays of fixed
dimension, sparse finitely-supported maps over nonnegative indices (the
one-sided square-summable sequence space), and two-component block vectors
for product spaces.

Operator expressions form a small algebra: dense matrices, the unilateral
shift and its adjoint, coordinate projections, identity/zero, scaling,
sums, compositions, adjoints, and 2x2 block upper-triangular /
block-diagonal combinations.  Symbolic nodes act exactly on sparse vectors
(exact when the scalars are rational); ``to_dense`` provides finite
sections for numerics.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, RepresentationMismatch, SpecParseError
from .scalars import (
    RationalComplex,
    abs_sq,
    conj,
    is_exact,
    parse_scalar,
    scalar_to_json,
)

__all__ = [
    "Vector",
    "OperatorExpr",
    "Dense",
    "Shift",
    "AdjointShift",
    "CoordProjection",
    "Identity",
    "Zero",
    "Scale",
    "Sum",
    "Compose",
    "AdjointOp",
    "BlockUpperTri",
    "BlockDiag",
    "apply",
    "adjoint",
    "operator_norm_bound",
    "to_dense",
    "dense",
    "op_to_json",
    "op_from_json",
]


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------

class Vector:
    """Immutable vector in dense, sparse, or block representation."""

    __slots__ = ("kind", "data")

    def __init__(self, kind, data):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Vector is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def dense(coords) -> "Vector":
        arr = np.asarray(coords)
        if arr.dtype != object and not np.iscomplexobj(arr):
            arr = arr.astype(complex)
        return Vector("dense", arr)

    @staticmethod
    def sparse(entries: dict) -> "Vector":
        pruned = {int(k): v for k, v in entries.items() if v}
        if any(k < 0 for k in pruned):
            raise ValueError("sparse indices must be nonnegative")
        return Vector("sparse", pruned)

    @staticmethod
    def basis(k: int, exact: bool = False) -> "Vector":
        one = RationalComplex(1) if exact else complex(1.0)
        return Vector.sparse({k: one})

    @staticmethod
    def block(v1: "Vector", v2: "Vector") -> "Vector":
        return Vector("block", (v1, v2))

    @staticmethod
    def zero_sparse() -> "Vector":
        return Vector("sparse", {})

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "Vector") -> "Vector":
        if self.kind != other.kind:
            raise RepresentationMismatch("cannot add vectors of different kinds")
        if self.kind == "dense":
            return Vector("dense", self.data + other.data)
        if self.kind == "sparse":
            out = dict(self.data)
            for k, v in other.data.items():
                s = out.get(k, 0) + v
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
            return Vector("sparse", out)
        return Vector.block(self.data[0] + other.data[0], self.data[1] + other.data[1])

    def __sub__(self, other: "Vector") -> "Vector":
        return self + other.scale(-1)

    def scale(self, s) -> "Vector":
        if not s:
            if self.kind == "dense":
                return Vector("dense", self.data * 0)
            if self.kind == "sparse":
                return Vector.zero_sparse()
            return Vector.block(self.data[0].scale(0), self.data[1].scale(0))
        if self.kind == "dense":
            if isinstance(s, RationalComplex) and self.data.dtype != object:
                s = complex(s)
            return Vector("dense", self.data * s)
        if self.kind == "sparse":
            return Vector("sparse", {k: s * v for k, v in self.data.items()})
        return Vector.block(self.data[0].scale(s), self.data[1].scale(s))

    def inner(self, other: "Vector"):
        """Hermitian inner product <self, other>, conjugate-linear in other."""
        if self.kind != other.kind:
            raise RepresentationMismatch("inner product needs matching kinds")
        if self.kind == "dense":
            return np.sum(self.data * np.array([conj(x) for x in other.data.ravel()]))
        if self.kind == "sparse":
            total = 0
            for k, v in self.data.items():
                w = other.data.get(k)
                if w is not None:
                    total = total + v * conj(w)
            return total
        return self.data[0].inner(other.data[0]) + self.data[1].inner(other.data[1])

    def norm_sq(self):
        """Squared Euclidean norm; a Fraction in exact mode."""
        if self.kind == "dense":
            total = 0
            for x in self.data.ravel():
                total = total + abs_sq(x)
            return total
        if self.kind == "sparse":
            total = Fraction(0) if self.is_exact() else 0.0
            for v in self.data.values():
                total = total + abs_sq(v)
            return total
        return self.data[0].norm_sq() + self.data[1].norm_sq()

    def norm(self) -> float:
        return math.sqrt(float(self.norm_sq()))

    def is_exact(self) -> bool:
        if self.kind == "dense":
            return self.data.dtype == object
        if self.kind == "sparse":
            return all(is_exact(v) for v in self.data.values())
        return self.data[0].is_exact() and self.data[1].is_exact()

    def is_zero(self) -> bool:
        if self.kind == "dense":
            return not any(bool(x) for x in self.data.ravel())
        if self.kind == "sparse":
            return not self.data
        return self.data[0].is_zero() and self.data[1].is_zero()

    def __eq__(self, other):
        if not isinstance(other, Vector) or self.kind != other.kind:
            return NotImplemented
        if self.kind == "dense":
            return self.data.shape == other.data.shape and all(
                a == b for a, b in zip(self.data.ravel(), other.data.ravel())
            )
        if self.kind == "sparse":
            return self.data == other.data
        return self.data == other.data

    def __repr__(self):
        if self.kind == "sparse":
            return f"Vector.sparse({self.data!r})"
        if self.kind == "dense":
            return f"Vector.dense({self.data!r})"
        return f"Vector.block({self.data[0]!r}, {self.data[1]!r})"


# ---------------------------------------------------------------------------
# matrix helpers (dense path shared with the rest of the package)
# ---------------------------------------------------------------------------

def dense(rows) -> np.ndarray:
    """Build a dense matrix; object dtype iff any entry is exact."""
    flat = [x for row in rows for x in (row if np.ndim(row) else [row])]
    if any(is_exact(x) for x in flat):
        arr = np.empty((len(rows), len(rows[0])), dtype=object)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                arr[i, j] = x if is_exact(x) else x
        return arr
    return np.asarray(rows, dtype=complex)


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.dot (not matmul) so object-dtype exact matrices work
    return np.dot(a, b)


def mat_conj_t(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        out = np.empty((a.shape[1], a.shape[0]), dtype=object)
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                out[j, i] = conj(a[i, j])
        return out
    return a.conj().T

def mat_to_complex(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return np.array([[complex(x) for x in row] for row in a], dtype=complex)
    return a


def spectral_norm(a: np.ndarray) -> float:
    m = mat_to_complex(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


# ---------------------------------------------------------------------------
# operator expressions
# ---------------------------------------------------------------------------

class OperatorExpr:
    """Base class; immutable expression tree node."""

    # (rows, cols): ints for finite-dimensional actions, None for the
    # sequence-space (infinite) side, "any" when polymorphic (Identity).
    def shape(self):
        raise NotImplementedError

    def apply(self, v: Vector) -> Vector:
        raise NotImplementedError

    def apply_adjoint(self, v: Vector) -> Vector:
        """Action of the Hermitian adjoint, used by AdjointOp wrappers."""
        raise NotImplementedError

    def adjoint(self) -> "OperatorExpr":
        """Structural adjoint, normalized (adjoint of adjoint is self)."""
        raise NotImplementedError

    def norm_bound(self) -> float:
        raise NotImplementedError

    def to_dense(self, dim: int) -> np.ndarray:
        """Compression to the span of the first ``dim`` coordinates (per
        factor space for block nodes)."""
        raise NotImplementedError

    def is_symbolic(self) -> bool:
        """True if the expression involves sequence-space nodes."""
        return False

    def children(self):
        return ()

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def _key(self):
        return ()


def _check_dense(v: Vector, what: str):
    if v.kind != "dense":
        raise RepresentationMismatch(
            f"{what} requires a dense vector; got {v.kind} "
            "(truncate with to_dense for finite sections)"
        )


def _check_sparse(v: Vector, what: str):
    if v.kind != "sparse":
        raise RepresentationMismatch(f"{what} acts on sparse sequence vectors; got {v.kind}")


class Dense(OperatorExpr):
    def __init__(self, matrix):
        self.matrix = matrix if isinstance(matrix, np.ndarray) else dense(matrix)

    def shape(self):
        return self.matrix.shape

    def apply(self, v):
        _check_dense(v, "dense matrix")
        if v.data.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatch(
                f"matrix is {self.matrix.shape}, vector has dim {v.data.shape[0]}"
            )
        if self.matrix.dtype == object or v.data.dtype == object:
            return Vector("dense", np.dot(self.matrix, v.data))
        return Vector("dense", self.matrix @ v.data)

    def apply_adjoint(self, v):
        _check_dense(v, "dense matrix")
        return Dense(mat_conj_t(self.matrix)).apply(v)

    def adjoint(self):
        return Dense(mat_conj_t(self.matrix))

    def norm_bound(self):
        return spectral_norm(self.matrix)

    def to_dense(self, dim):
        r, c = self.matrix.shape
        if r == c == dim:
            return self.matrix
        out = np.zeros((dim, dim), dtype=self.matrix.dtype)
        out[: min(r, dim), : min(c, dim)] = self.matrix[: min(r, dim), : min(c, dim)]
        return out

    def _key(self):
        return (self.matrix.shape, tuple(self.matrix.ravel()))

    def __repr__(self):
        return f"Dense({self.matrix.tolist()!r})"


class Shift(OperatorExpr):
    """Unilateral shift: (z0, z1, ...) -> (0, z0, z1, ...).  Isometry."""

    def shape(self):
        return (None, None)

    def apply(self, v):
        _check_sparse(v, "shift")
        return Vector("sparse", {k + 1: x for k, x in v.data.items()})

    def apply_adjoint(self, v):
        _check_sparse(v, "adjoint shift")
        return Vector("sparse", {k - 1: x for k, x in v.data.items() if k >= 1})

    def adjoint(self):
        return AdjointShift()

    def norm_bound(self):
        return 1.0

    def to_dense(self, dim):
        out = np.zeros((dim, dim), dtype=complex)
        for i in range(dim - 1):
            out[i + 1, i] = 1.0
        return out

    def is_symbolic(self):
        return True

    def __repr__(self):
        return "Shift()"


class AdjointShift(OperatorExpr):
    """Backward shift: (z0, z1, ...) -> (z1, z2, ...)."""

    def shape(self):
        return (None, None)

    def apply(self, v):
        return Shift().apply_adjoint(v)

    def apply_adjoint(self, v):
        return Shift().apply(v)

    def adjoint(self):
        return Shift()

    def norm_bound(self):
        return 1.0

    def to_dense(self, dim):
        return Shift().to_dense(dim).T

    def is_symbolic(self):
        return True

    def __repr__(self):
        return "AdjointShift()"


class CoordProjection(OperatorExpr):
    """Rank-one projection keeping coordinate k."""

    def __init__(self, k: int):
        self.k = int(k)

    def shape(self):
        return (None, None)

    def apply(self, v):
        _check_sparse(v, "coordinate projection")
        x = v.data.get(self.k)
        return Vector("sparse", {self.k: x} if x else {})

    apply_adjoint = apply

    def adjoint(self):
        return self

    def norm_bound(self):
        return 1.0

    def to_dense(self, dim):
        out = np.zeros((dim, dim), dtype=complex)
        if self.k < dim:
            out[self.k, self.k] = 1.0
        return out

    def is_symbolic(self):
        return True

    def _key(self):
        return (self.k,)

    def __repr__(self):
        return f"CoordProjection({self.k})"


class Identity(OperatorExpr):
    def __init__(self, dim=None):
        self.dim = dim

    def shape(self):
        return (self.dim, self.dim)

    def apply(self, v):
        return v

    apply_adjoint = apply

    def adjoint(self):
        return self

    def norm_bound(self):
        return 1.0

    def to_dense(self, dim):
        return np.eye(self.dim or dim, dtype=complex)

    def _key(self):
        return (self.dim,)

    def __repr__(self):
        return f"Identity({self.dim!r})"


class Zero(OperatorExpr):
    def __init__(self, rows=None, cols=None):
        self.rows, self.cols = rows, cols

    def shape(self):
        return (self.rows, self.cols)

    def apply(self, v):
        return v.scale(0)

    apply_adjoint = apply

    def adjoint(self):
        return Zero(self.cols, self.rows)

    def norm_bound(self):
        return 0.0

    def to_dense(self, dim):
        return np.zeros((self.rows or dim, self.cols or dim), dtype=complex)

    def _key(self):
        return (self.rows, self.cols)

    def __repr__(self):
        return f"Zero({self.rows!r}, {self.cols!r})"


class Scale(OperatorExpr):
    def __init__(self, scalar, child: OperatorExpr):
        self.scalar, self.child = scalar, child

    def shape(self):
        return self.child.shape()

    def apply(self, v):
        return self.child.apply(v).scale(self.scalar)

    def apply_adjoint(self, v):
        return self.child.apply_adjoint(v).scale(conj(self.scalar))

    def adjoint(self):
        return Scale(conj(self.scalar), self.child.adjoint())

    def norm_bound(self):
        return math.sqrt(float(abs_sq(self.scalar))) * self.child.norm_bound()

    def to_dense(self, dim):
        m = self.child.to_dense(dim)
        s = self.scalar
        if is_exact(s):
            if m.dtype != object:
                m = m.astype(object)
            return np.array(
                [[s * x for x in row] for row in m], dtype=object
            )
        return m * complex(s)

    def is_symbolic(self):
        return self.child.is_symbolic()

    def children(self):
        return (self.child,)

    def _key(self):
        return (self.scalar, self.child)

    def __repr__(self):
        return f"Scale({self.scalar!r}, {self.child!r})"


class Sum(OperatorExpr):
    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        if not children:
            raise ValueError("Sum needs at least one term")
        self.terms = tuple(children)

    def shape(self):
        return self.terms[0].shape()

    def apply(self, v):
        out = self.terms[0].apply(v)
        for t in self.terms[1:]:
            out = out + t.apply(v)
        return out

    def apply_adjoint(self, v):
        out = self.terms[0].apply_adjoint(v)
        for t in self.terms[1:]:
            out = out + t.apply_adjoint(v)
        return out

    def adjoint(self):
        return Sum(*[t.adjoint() for t in self.terms])

    def norm_bound(self):
        return sum(t.norm_bound() for t in self.terms)

    def to_dense(self, dim):
        out = self.terms[0].to_dense(dim)
        for t in self.terms[1:]:
            out = out + t.to_dense(dim)
        return out

    def is_symbolic(self):
        return any(t.is_symbolic() for t in self.terms)

    def children(self):
        return self.terms

    def _key(self):
        return self.terms

    def __repr__(self):
        return f"Sum{self.terms!r}"


class Compose(OperatorExpr):
    """Compose(A, B) acts as A after B."""

    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        if not children:
            raise ValueError("Compose needs at least one factor")
        self.factors = tuple(children)

    def shape(self):
        return (self.factors[0].shape()[0], self.factors[-1].shape()[1])

    def apply(self, v):
        for f in reversed(self.factors):
            v = f.apply(v)
        return v

    def apply_adjoint(self, v):
        for f in self.factors:
            v = f.apply_adjoint(v)
        return v

    def adjoint(self):
        return Compose(*[f.adjoint() for f in reversed(self.factors)])

    def norm_bound(self):
        out = 1.0
        for f in self.factors:
            out *= f.norm_bound()
        return out

    def to_dense(self, dim):
        out = self.factors[-1].to_dense(dim)
        for f in reversed(self.factors[:-1]):
            out = mat_mul(f.to_dense(dim), out)
        return out

    def is_symbolic(self):
        return any(f.is_symbolic() for f in self.factors)

    def children(self):
        return self.factors

    def _key(self):
        return self.factors

    def __repr__(self):
        return f"Compose{self.factors!r}"


class AdjointOp(OperatorExpr):
    """Adjoint wrapper for nodes without a structural adjoint of their own
    kind (block upper-triangular operators have lower-triangular adjoints)."""

    def __init__(self, child: OperatorExpr):
        self.child = child

    def shape(self):
        r, c = self.child.shape()
        return (c, r)

    def apply(self, v):
        return self.child.apply_adjoint(v)

    def apply_adjoint(self, v):
        return self.child.apply(v)

    def adjoint(self):
        return self.child

    def norm_bound(self):
        return self.child.norm_bound()

    def to_dense(self, dim):
        return mat_conj_t(self.child.to_dense(dim))

    def is_symbolic(self):
        return self.child.is_symbolic()

    def children(self):
        return (self.child,)

    def _key(self):
        return (self.child,)

    def __repr__(self):
        return f"AdjointOp({self.child!r})"


def _split_dense(v: Vector, op11: OperatorExpr, op22: OperatorExpr):
    d1 = op11.shape()[1]
    d2 = op22.shape()[1]
    if d1 is None or d2 is None:
        raise RepresentationMismatch(
            "block operator with symbolic blocks needs a block vector"
        )
    if v.data.shape[0] != d1 + d2:
        raise DimensionMismatch(
            f"block operator expects dim {d1}+{d2}, vector has {v.data.shape[0]}"
        )
    return Vector("dense", v.data[:d1]), Vector("dense", v.data[d1:])


def _join_dense(v1: Vector, v2: Vector) -> Vector:
    return Vector("dense", np.concatenate([v1.data, v2.data]))


class BlockUpperTri(OperatorExpr):
    """[[op11, op12], [0, op22]] on a product space."""

    def __init__(self, op11, op12, op22):
        self.op11, self.op12, self.op22 = op11, op12, op22

    def shape(self):
        r1, c1 = self.op11.shape()
        r2, c2 = self.op22.shape()
        if r1 is None or r2 is None:
            return (None, None)
        return (r1 + r2, (c1 or 0) + (c2 or 0))

    def _parts(self, v):
        if v.kind == "block":
            return v.data
        _check_dense(v, "block operator")
        return _split_dense(v, self.op11, self.op22)

    def apply(self, v):
        v1, v2 = self._parts(v)
        w1 = self.op11.apply(v1) + self.op12.apply(v2)
        w2 = self.op22.apply(v2)
        if v.kind == "block":
            return Vector.block(w1, w2)
        return _join_dense(w1, w2)

    def apply_adjoint(self, v):
        # adjoint is lower triangular: (A11* v1, A12* v1 + A22* v2)
        v1, v2 = self._parts(v)
        w1 = self.op11.apply_adjoint(v1)
        w2 = self.op12.apply_adjoint(v1) + self.op22.apply_adjoint(v2)
        if v.kind == "block":
            return Vector.block(w1, w2)
        return _join_dense(w1, w2)

    def adjoint(self):
        return AdjointOp(self)

    def norm_bound(self):
        return math.sqrt(
            self.op11.norm_bound() ** 2
            + self.op12.norm_bound() ** 2
            + self.op22.norm_bound() ** 2
        )

    def to_dense(self, dim):
        r1 = self.op11.shape()[0]
        r2 = self.op22.shape()[0]
        d1 = r1 if r1 is not None else dim // 2
        d2 = r2 if r2 is not None else dim - d1
        a = self.op11.to_dense(d1)
        c = self.op22.to_dense(d2)
        braw = self.op12.to_dense(max(d1, d2))
        exact = any(m.dtype == object for m in (a, braw, c))
        dt = object if exact else complex
        b = np.zeros((d1, d2), dtype=dt)
        rb = min(d1, braw.shape[0])
        cb = min(d2, braw.shape[1])
        b[:rb, :cb] = braw[:rb, :cb]
        out = np.zeros((d1 + d2, d1 + d2), dtype=dt)
        out[:d1, :d1] = a
        out[:d1, d1:] = b
        out[d1:, d1:] = c
        return out

    def is_symbolic(self):
        return any(o.is_symbolic() for o in (self.op11, self.op12, self.op22))

    def children(self):
        return (self.op11, self.op12, self.op22)

    def _key(self):
        return (self.op11, self.op12, self.op22)

    def __repr__(self):
        return f"BlockUpperTri({self.op11!r}, {self.op12!r}, {self.op22!r})"


class BlockDiag(OperatorExpr):
    def __init__(self, op11, op22):
        self.op11, self.op22 = op11, op22

    def shape(self):
        return BlockUpperTri(self.op11, Zero(), self.op22).shape()

    def _parts(self, v):
        if v.kind == "block":
            return v.data
        _check_dense(v, "block operator")
        return _split_dense(v, self.op11, self.op22)

    def apply(self, v):
        v1, v2 = self._parts(v)
        w1, w2 = self.op11.apply(v1), self.op22.apply(v2)
        if v.kind == "block":
            return Vector.block(w1, w2)
        return _join_dense(w1, w2)

    def apply_adjoint(self, v):
        v1, v2 = self._parts(v)
        w1, w2 = self.op11.apply_adjoint(v1), self.op22.apply_adjoint(v2)
        if v.kind == "block":
            return Vector.block(w1, w2)
        return _join_dense(w1, w2)

    def adjoint(self):
        return BlockDiag(self.op11.adjoint(), self.op22.adjoint())

    def norm_bound(self):
        return max(self.op11.norm_bound(), self.op22.norm_bound())

    def to_dense(self, dim):
        return BlockUpperTri(self.op11, Zero(), self.op22).to_dense(dim)

    def is_symbolic(self):
        return self.op11.is_symbolic() or self.op22.is_symbolic()

    def children(self):
        return (self.op11, self.op22)

    def _key(self):
        return (self.op11, self.op22)

    def __repr__(self):
        return f"BlockDiag({self.op11!r}, {self.op22!r})"


# ---------------------------------------------------------------------------
# functional entry points (spec operation names)
# ---------------------------------------------------------------------------

def apply(op: OperatorExpr, v: Vector) -> Vector:
    return op.apply(v)


def adjoint(op: OperatorExpr) -> OperatorExpr:
    return op.adjoint()


def operator_norm_bound(op: OperatorExpr) -> float:
    return op.norm_bound()


def to_dense(op: OperatorExpr, dim: int) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return op.to_dense(dim)


# ---------------------------------------------------------------------------
# JSON expression trees
# ---------------------------------------------------------------------------

_TAGS = {
    "dense": Dense,
    "shift": Shift,
    "adjoint_shift": AdjointShift,
    "coord_projection": CoordProjection,
    "identity": Identity,
    "zero": Zero,
    "scale": Scale,
    "sum": Sum,
    "compose": Compose,
    "adjoint": AdjointOp,
    "block_upper_tri": BlockUpperTri,
    "block_diag": BlockDiag,
}


def op_to_json(op: OperatorExpr):
    if isinstance(op, Dense):
        return {
            "kind": "dense",
            "matrix": [[scalar_to_json(x) for x in row] for row in op.matrix],
        }
    if isinstance(op, Shift):
        return {"kind": "shift"}
    if isinstance(op, AdjointShift):
        return {"kind": "adjoint_shift"}
    if isinstance(op, CoordProjection):
        return {"kind": "coord_projection", "index": op.k}
    if isinstance(op, Identity):
        return {"kind": "identity", "dim": op.dim}
    if isinstance(op, Zero):
        return {"kind": "zero", "rows": op.rows, "cols": op.cols}
    if isinstance(op, Scale):
        return {"kind": "scale", "scalar": scalar_to_json(op.scalar),
                "child": op_to_json(op.child)}
    if isinstance(op, Sum):
        return {"kind": "sum", "children": [op_to_json(t) for t in op.terms]}
    if isinstance(op, Compose):
        return {"kind": "compose", "children": [op_to_json(f) for f in op.factors]}
    if isinstance(op, AdjointOp):
        return {"kind": "adjoint", "child": op_to_json(op.child)}
    if isinstance(op, BlockUpperTri):
        return {"kind": "block_upper_tri", "op11": op_to_json(op.op11),
                "op12": op_to_json(op.op12), "op22": op_to_json(op.op22)}
    if isinstance(op, BlockDiag):
        return {"kind": "block_diag", "op11": op_to_json(op.op11),
                "op22": op_to_json(op.op22)}
    raise SpecParseError(f"cannot serialize operator {op!r}")


def op_from_json(obj, where="operator") -> OperatorExpr:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecParseError(f"{where}: expected object with 'kind'")
    kind = obj["kind"]
    if kind not in _TAGS:
        raise SpecParseError(f"{where}: unknown operator kind {kind!r}")
    if kind == "dense":
        rows = obj.get("matrix")
        if not isinstance(rows, list) or not rows:
            raise SpecParseError(f"{where}.matrix: expected nonempty list of rows")
        parsed = [
            [parse_scalar(x, f"{where}.matrix[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(rows)
        ]
        return Dense(dense(parsed))
    if kind == "shift":
        return Shift()
    if kind == "adjoint_shift":
        return AdjointShift()
    if kind == "coord_projection":
        return CoordProjection(obj.get("index", 0))
    if kind == "identity":
        return Identity(obj.get("dim"))
    if kind == "zero":
        return Zero(obj.get("rows"), obj.get("cols"))
    if kind == "scale":
        return Scale(parse_scalar(obj.get("scalar", 1), f"{where}.scalar"),
                     op_from_json(obj["child"], f"{where}.child"))
    if kind == "sum":
        return Sum(*[op_from_json(c, f"{where}.children[{i}]")
                     for i, c in enumerate(obj.get("children", []))])
    if kind == "compose":
        return Compose(*[op_from_json(c, f"{where}.children[{i}]")
                         for i, c in enumerate(obj.get("children", []))])
    if kind == "adjoint":
        return AdjointOp(op_from_json(obj["child"], f"{where}.child"))
    if kind == "block_upper_tri":
        return BlockUpperTri(op_from_json(obj["op11"], f"{where}.op11"),
                             op_from_json(obj["op12"], f"{where}.op12"),
                             op_from_json(obj["op22"], f"{where}.op22"))
    return BlockDiag(op_from_json(obj["op11"], f"{where}.op11"),
                     op_from_json(obj["op22"], f"{where}.op22"))
