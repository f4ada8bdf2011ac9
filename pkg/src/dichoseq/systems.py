"""Time domains, coefficient sequences, cocycles, and block-triangular
system assembly for nonautonomous linear difference systems
x(n+1) = A(n) x(n)."""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainMismatch,
    OutOfDomain,
    ReversedIndices,
    RepresentationMismatch,
    SpecParseError,
)
from .operators import (
    BlockDiag,
    BlockUpperTri,
    Dense,
    Identity,
    OperatorExpr,
    Zero,
    mat_mul,
    op_from_json,
    op_to_json,
)

__all__ = [
    "TimeDomain",
    "Z",
    "ZPLUS",
    "ZMINUS",
    "CoefficientSequence",
    "LinearSystem",
    "BlockTriangularSystem",
    "Cocycle",
    "cocycle_eval",
    "assemble",
    "diagonal_part",
    "system_from_json",
    "system_to_json",
]


class TimeDomain:
    """One of Z, Z+ (n >= 0), Z- (n <= 0).

    States x(n) live on J; the transition x(n+1) = A(n) x(n) applies for n
    in the evolution index set J', which equals J except that for Z- the
    time n = 0 is excluded (there is no state at n = 1).
    """

    __slots__ = ("kind",)
    _KINDS = ("Z", "Z+", "Z-")

    def __init__(self, kind: str):
        if kind not in self._KINDS:
            raise ValueError(f"unknown time domain {kind!r}")
        object.__setattr__(self, "kind", kind)

    def __setattr__(self, name, value):
        raise AttributeError("TimeDomain is immutable")

    def contains(self, n: int) -> bool:
        if self.kind == "Z+":
            return n >= 0
        if self.kind == "Z-":
            return n <= 0
        return True

    def in_evolution_set(self, n: int) -> bool:
        """n in J': A(n) is defined and maps x(n) to x(n+1)."""
        if self.kind == "Z-":
            return n <= -1
        return self.contains(n)

    def reflected(self) -> "TimeDomain":
        if self.kind == "Z+":
            return ZMINUS
        if self.kind == "Z-":
            return ZPLUS
        return Z

    def __eq__(self, other):
        return isinstance(other, TimeDomain) and self.kind == other.kind

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return f"TimeDomain({self.kind!r})"


Z = TimeDomain("Z")
ZPLUS = TimeDomain("Z+")
ZMINUS = TimeDomain("Z-")


def _parse_extension(extension):
    """Returns (mode, period). Accepted: 'constant', 'periodic:p', 'error'."""
    if extension in (None, "error"):
        return ("error", None)
    if extension == "constant":
        return ("constant", None)
    if isinstance(extension, str) and extension.startswith("periodic:"):
        p = int(extension.split(":", 1)[1])
        if p < 1:
            raise ValueError("period must be >= 1")
        return ("periodic", p)
    raise ValueError(f"unknown extension policy {extension!r}")


class CoefficientSequence:
    """Finite table n -> OperatorExpr plus an extension policy.

    Policies: 'error' (lookups outside the table raise OutOfDomain),
    'constant' (nearest stored endpoint extends), 'periodic:p'.
    """

    def __init__(self, table: dict, extension="error"):
        if not table:
            raise ValueError("coefficient table is empty")
        self.table = {int(n): op for n, op in table.items()}
        self.extension = extension
        self.mode, self.period = _parse_extension(extension)
        self.lo = min(self.table)
        self.hi = max(self.table)
        if self.mode == "periodic" and self.hi - self.lo + 1 < self.period:
            raise ValueError("periodic table must cover one full period")

    @staticmethod
    def autonomous(op: OperatorExpr) -> "CoefficientSequence":
        return CoefficientSequence({0: op}, extension="constant")

    def __call__(self, n: int) -> OperatorExpr:
        if n in self.table:
            return self.table[n]
        if self.mode == "constant":
            return self.table[self.lo if n < self.lo else self.hi]
        if self.mode == "periodic":
            k = self.lo + (n - self.lo) % self.period
            if k not in self.table:
                raise OutOfDomain(f"periodic table missing index {k}")
            return self.table[k]
        raise OutOfDomain(
            f"coefficient A({n}) outside stored window [{self.lo}, {self.hi}] "
            "with extension policy 'error'"
        )

    def map(self, f) -> "CoefficientSequence":
        return CoefficientSequence(
            {n: f(op) for n, op in self.table.items()}, self.extension
        )


class LinearSystem:
    """x(n+1) = A(n) x(n) on a time domain.

    ``dim`` is the state dimension for dense systems, None for symbolic
    sequence-space systems.
    """

    def __init__(self, domain: TimeDomain, coefficients: CoefficientSequence,
                 dim=None):
        self.domain = domain
        self.coefficients = coefficients
        self.dim = dim
        self._cocycle = None

    @staticmethod
    def autonomous(domain: TimeDomain, op: OperatorExpr) -> "LinearSystem":
        d = op.shape()[0]
        return LinearSystem(domain, CoefficientSequence.autonomous(op), d)

    @staticmethod
    def from_table(domain: TimeDomain, table: dict, extension="error"):
        seq = CoefficientSequence(table, extension)
        dims = {op.shape()[0] for op in seq.table.values()}
        d = dims.pop() if len(dims) == 1 else None
        return LinearSystem(domain, seq, d)

    def coefficient(self, n: int) -> OperatorExpr:
        if not self.domain.in_evolution_set(n):
            raise OutOfDomain(f"time {n} not in the evolution index set of "
                              f"{self.domain.kind}")
        return self.coefficients(n)

    def matrix(self, n: int) -> np.ndarray:
        """Dense coefficient matrix at time n (finite-dimensional systems)."""
        op = self.coefficient(n)
        if self.dim is None:
            raise RepresentationMismatch(
                "symbolic sequence-space system has no finite coefficient matrix"
            )
        return op.to_dense(self.dim)

    def is_symbolic(self) -> bool:
        return self.dim is None

    def cocycle(self) -> "Cocycle":
        if self._cocycle is None:
            self._cocycle = Cocycle(self)
        return self._cocycle


class BlockTriangularSystem:
    """Coefficients [[A11(n), A12(n)], [0, A22(n)]] on a shared domain."""

    def __init__(self, blocks11: LinearSystem, coupler12: CoefficientSequence,
                 blocks22: LinearSystem):
        if blocks11.domain != blocks22.domain:
            raise DomainMismatch(
                f"block domains differ: {blocks11.domain.kind} vs "
                f"{blocks22.domain.kind}"
            )
        self.blocks11 = blocks11
        self.blocks22 = blocks22
        self.coupler12 = coupler12
        self.domain = blocks11.domain
        d1, d2 = blocks11.dim, blocks22.dim
        self.dims = (d1, d2)
        full_dim = d1 + d2 if (d1 is not None and d2 is not None) else None

        def coef(n, _self=self):
            return BlockUpperTri(_self.blocks11.coefficient(n),
                                 _self.coupler12(n),
                                 _self.blocks22.coefficient(n))

        self.assembled = LinearSystem(self.domain, _CallableSeq(coef), full_dim)

    def coefficient(self, n: int) -> OperatorExpr:
        return self.assembled.coefficient(n)


class _CallableSeq:
    """Adapter letting LinearSystem wrap an on-the-fly coefficient rule."""

    def __init__(self, fn):
        self.fn = fn
        self.extension = "derived"

    def __call__(self, n):
        return self.fn(n)


def assemble(blocks11: LinearSystem, coupler12, blocks22: LinearSystem
             ) -> BlockTriangularSystem:
    """Build the triangular system; coupler12 may be a CoefficientSequence
    or a single OperatorExpr (constant in n)."""
    if isinstance(coupler12, OperatorExpr):
        coupler12 = CoefficientSequence.autonomous(coupler12)
    d1, d2 = blocks11.dim, blocks22.dim
    if d1 is not None and d2 is not None:
        for op in getattr(coupler12, "table", {}).values():
            r, c = op.shape()
            if r not in (None, d1) and not isinstance(op, (Identity, Zero)):
                raise DimensionMismatch(
                    f"coupler rows {r} incompatible with block-1 dim {d1}"
                )
            if c not in (None, d2) and not isinstance(op, (Identity, Zero)):
                raise DimensionMismatch(
                    f"coupler cols {c} incompatible with block-2 dim {d2}"
                )
    return BlockTriangularSystem(blocks11, coupler12, blocks22)


def diagonal_part(sys: BlockTriangularSystem) -> LinearSystem:
    """Same blocks and domain with the coupler zeroed."""
    d1, d2 = sys.dims

    def coef(n, _sys=sys, _d1=d1, _d2=d2):
        return BlockDiag(_sys.blocks11.coefficient(n),
                         _sys.blocks22.coefficient(n))

    full_dim = d1 + d2 if (d1 is not None and d2 is not None) else None
    return LinearSystem(sys.domain, _CallableSeq(coef), full_dim)


class Cocycle:
    """Cached evaluator of Phi(m, n) = A(m-1) ... A(n), Phi(n, n) = Id.

    Dense systems cache ndarray products chained from the nearest anchor
    with the same base time n; symbolic systems return composition
    expressions without caching dense data.
    """

    def __init__(self, sys: LinearSystem):
        self.sys = sys
        self._cache = {}

    def dense(self, m: int, n: int) -> np.ndarray:
        if self.sys.dim is None:
            raise RepresentationMismatch("symbolic system: use expr()")
        if m < n:
            raise ReversedIndices(
                f"Phi({m},{n}) with m < n: backward evaluation needs "
                "invertibility and is a separate operation"
            )
        for t in (m, n):
            if not self.sys.domain.contains(t):
                raise OutOfDomain(f"time {t} outside {self.sys.domain.kind}")
        if m == n:
            return np.eye(self.sys.dim, dtype=complex)
        key = (m, n)
        if key in self._cache:
            return self._cache[key]
        # chain from the highest cached anchor (k, n) with n <= k < m
        k = m - 1
        while k > n and (k, n) not in self._cache:
            k -= 1
        acc = self._cache.get((k, n))
        if acc is None:
            acc = self.sys.matrix(n)
            k = n + 1
            self._cache[(k, n)] = acc
        while k < m:
            acc = mat_mul(self.sys.matrix(k), acc)
            k += 1
            self._cache[(k, n)] = acc
        return self._cache[key]

    def expr(self, m: int, n: int) -> OperatorExpr:
        if m < n:
            raise ReversedIndices(f"Phi({m},{n}) with m < n")
        for t in (m, n):
            if not self.sys.domain.contains(t):
                raise OutOfDomain(f"time {t} outside {self.sys.domain.kind}")
        if m == n:
            return Identity(self.sys.dim)
        from .operators import Compose
        return Compose(*[self.sys.coefficient(k) for k in range(m - 1, n - 1, -1)])


def cocycle_eval(sys: LinearSystem, m: int, n: int) -> OperatorExpr:
    """Phi(m, n) as an operator expression (dense matrix node when the
    system is finite-dimensional)."""
    if sys.dim is not None:
        return Dense(sys.cocycle().dense(m, n))
    return sys.cocycle().expr(m, n)


# ---------------------------------------------------------------------------
# JSON system specs
# ---------------------------------------------------------------------------
#
# { "domain": "Z|Z+|Z-",
#   "kind": "autonomous|dense_table|symbolic|block_triangular",
#   "coefficients": ... , "extension": "constant|periodic:p|error" }
#
# autonomous/symbolic: "coefficients" is one operator object.
# dense_table: "coefficients" is a list of {"n": int, "op": {...}}.
# block_triangular: "blocks11"/"blocks22" are system specs, "coupler12"
# follows the same shape as "coefficients".

def _domain_from_json(s, where):
    try:
        return TimeDomain(s)
    except ValueError as exc:
        raise SpecParseError(f"{where}.domain: {exc}") from exc


def _table_from_json(entries, where):
    if not isinstance(entries, list) or not entries:
        raise SpecParseError(f"{where}: expected nonempty list of "
                             '{"n": int, "op": {...}}')
    table = {}
    for i, e in enumerate(entries):
        if not isinstance(e, dict) or "n" not in e or "op" not in e:
            raise SpecParseError(f"{where}[{i}]: expected keys 'n' and 'op'")
        table[int(e["n"])] = op_from_json(e["op"], f"{where}[{i}].op")
    return table


def system_from_json(obj, where="system"):
    if not isinstance(obj, dict):
        raise SpecParseError(f"{where}: expected an object")
    kind = obj.get("kind")
    domain = _domain_from_json(obj.get("domain", "Z"), where)
    extension = obj.get("extension", "error")
    try:
        _parse_extension(extension)
    except ValueError as exc:
        raise SpecParseError(f"{where}.extension: {exc}") from exc

    if kind in ("autonomous", "symbolic"):
        op = op_from_json(obj.get("coefficients"), f"{where}.coefficients")
        sys = LinearSystem.autonomous(domain, op)
        if kind == "symbolic" or op.is_symbolic():
            sys.dim = None
        return sys
    if kind == "dense_table":
        table = _table_from_json(obj.get("coefficients"), f"{where}.coefficients")
        return LinearSystem.from_table(domain, table, extension)
    if kind == "block_triangular":
        b11 = system_from_json(obj.get("blocks11"), f"{where}.blocks11")
        b22 = system_from_json(obj.get("blocks22"), f"{where}.blocks22")
        coup = obj.get("coupler12")
        if isinstance(coup, dict) and "kind" in coup:
            seq = CoefficientSequence.autonomous(
                op_from_json(coup, f"{where}.coupler12"))
        else:
            seq = CoefficientSequence(
                _table_from_json(coup, f"{where}.coupler12"), extension)
        try:
            return assemble(b11, seq, b22)
        except (DomainMismatch, DimensionMismatch) as exc:
            raise SpecParseError(f"{where}: {exc}") from exc
    raise SpecParseError(f"{where}.kind: unknown system kind {kind!r}")


def system_to_json(sys) -> dict:
    if isinstance(sys, BlockTriangularSystem):
        return {
            "domain": sys.domain.kind,
            "kind": "block_triangular",
            "blocks11": system_to_json(sys.blocks11),
            "coupler12": [{"n": n, "op": op_to_json(op)}
                          for n, op in sorted(sys.coupler12.table.items())],
            "blocks22": system_to_json(sys.blocks22),
            "extension": sys.coupler12.extension,
        }
    seq = sys.coefficients
    if isinstance(seq, _CallableSeq):
        raise SpecParseError("derived coefficient rules are not serializable")
    if len(seq.table) == 1 and seq.mode == "constant":
        op = next(iter(seq.table.values()))
        return {
            "domain": sys.domain.kind,
            "kind": "symbolic" if sys.dim is None else "autonomous",
            "coefficients": op_to_json(op),
        }
    return {
        "domain": sys.domain.kind,
        "kind": "dense_table",
        "coefficients": [{"n": n, "op": op_to_json(op)}
                         for n, op in sorted(seq.table.items())],
        "extension": seq.extension,
    }
