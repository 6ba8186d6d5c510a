"""Exact arithmetic over prime fields and small dense linear algebra.

Everything here works on plain Python integers, so results are exact for
any modulus below 2**31.  Matrices are immutable and tiny (q x q with q a
handful of subchannels), so no attempt is made at vectorization.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DivisionByZero,
    FieldMismatch,
    InconsistentSystem,
    InvalidEvaluationPoints,
    ShapeError,
    SingularMatrix,
)

MAX_MODULUS = 2**31


def is_prime(n: int) -> bool:
    """Trial-division primality test."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """The field of integers modulo a prime ``p``.

    Calling the field coerces an integer into a :class:`FieldElement`::

        >>> F = PrimeField(11)
        >>> F(3) * F(8)
        FieldElement(2, p=11)
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = int(p)
        if not 2 <= p < MAX_MODULUS:
            raise ValueError(f"modulus must be in [2, 2**31), got {p}")
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    def __call__(self, value: int) -> FieldElement:
        if isinstance(value, FieldElement):
            self.check(value)
            return value
        return FieldElement(int(value) % self.p, self)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __len__(self):
        return self.p

    @property
    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    @property
    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def elements(self) -> list[FieldElement]:
        return [FieldElement(v, self) for v in range(self.p)]

    def check(self, element: FieldElement) -> None:
        if element.field != self:
            raise FieldMismatch(f"element of {element.field!r} used in {self!r}")

    def inv(self, value: int) -> int:
        value %= self.p
        if value == 0:
            raise DivisionByZero(f"0 has no inverse in F_{self.p}")
        return pow(value, -1, self.p)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} is not a canonical representative mod {self.field.p}")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"cannot combine elements of F_{self.field.p} and F_{other.field.p}")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def _new(self, v: int) -> FieldElement:
        return FieldElement(v % self.field.p, self.field)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._new(self.value * self.field.inv(o))

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._new(o * self.field.inv(self.value))

    def __neg__(self):
        return self._new(-self.value)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self._new(pow(self.field.inv(self.value), -exponent, self.field.p))
        return self._new(pow(self.value, exponent, self.field.p))

    def inv(self) -> FieldElement:
        return self._new(self.field.inv(self.value))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.p))

    def __repr__(self):
        return f"FieldElement({self.value}, p={self.field.p})"


def field_arith(a: FieldElement, b: FieldElement | int | None, op: str) -> FieldElement:
    """Apply one of ``add``, ``sub``, ``mul``, ``inv`` or ``pow`` to field elements.

    ``inv`` ignores ``b``; ``pow`` takes an integer exponent as ``b``.
    """
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    if isinstance(b, FieldElement):
        a.field.check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown field operation {op!r}")


class FieldMatrix:
    """Immutable dense matrix over a prime field.

    Entries are stored as canonical integers; indexing returns
    :class:`FieldElement` objects.
    """

    __slots__ = ("field", "_rows")

    def __init__(self, field: PrimeField, rows: Iterable[Iterable[int | FieldElement]]):
        self.field = field
        data = []
        for row in rows:
            vals = []
            for v in row:
                if isinstance(v, FieldElement):
                    field.check(v)
                    vals.append(v.value)
                else:
                    vals.append(int(v) % field.p)
            data.append(tuple(vals))
        if data and any(len(r) != len(data[0]) for r in data):
            raise ShapeError("ragged rows")
        self._rows = tuple(data)

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> FieldMatrix:
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), (len(self._rows[0]) if self._rows else 0)

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def values(self) -> list[list[int]]:
        return [list(r) for r in self._rows]

    def __getitem__(self, idx):
        i, j = idx
        return FieldElement(self._rows[i][j], self.field)

    def row(self, i: int) -> tuple[int, ...]:
        return self._rows[i]

    def select_rows(self, indices: Sequence[int]) -> FieldMatrix:
        return FieldMatrix(self.field, [self._rows[i] for i in indices])

    def select_cols(self, indices: Sequence[int]) -> FieldMatrix:
        return FieldMatrix(self.field, [[r[j] for j in indices] for r in self._rows])

    def transpose(self) -> FieldMatrix:
        return FieldMatrix(self.field, zip(*self._rows))

    def __eq__(self, other):
        if isinstance(other, FieldMatrix):
            return self.field == other.field and self._rows == other._rows
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self._rows))

    def __repr__(self):
        return f"FieldMatrix(p={self.field.p}, {self.values()})"

    def __matmul__(self, other):
        p = self.field.p
        if isinstance(other, FieldMatrix):
            if other.field != self.field:
                raise FieldMismatch("matrices over different fields")
            if self.cols != other.rows:
                raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
            cols = list(zip(*other._rows))
            return FieldMatrix(
                self.field,
                [[sum(a * b for a, b in zip(r, c)) % p for c in cols] for r in self._rows],
            )
        vec = [self.field(v).value for v in other]
        if len(vec) != self.cols:
            raise ShapeError(f"vector of length {len(vec)} for matrix with {self.cols} columns")
        return [FieldElement(sum(a * b for a, b in zip(r, vec)) % p, self.field) for r in self._rows]


def _row_reduce(field: PrimeField, rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Reduce ``rows`` in place to reduced row-echelon form over the first ``ncols`` columns.

    Returns the reduced rows and the pivot column of each leading row.
    Pivot choice is the first nonzero entry at or below the current row.
    """
    p = field.p
    pivots: list[int] = []
    r = 0
    n = len(rows)
    for c in range(ncols):
        if r == n:
            break
        piv = next((i for i in range(r, n) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [(v * inv) % p for v in rows[r]]
        for i in range(n):
            if i != r and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [(a - factor * b) % p for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m: FieldMatrix) -> int:
    _, pivots = _row_reduce(m.field, m.values(), m.cols)
    return len(pivots)


def invert(m: FieldMatrix) -> FieldMatrix:
    """Exact inverse by Gauss-Jordan elimination over F_p."""
    n, k = m.shape
    if n != k:
        raise ShapeError(f"cannot invert a non-square {m.shape} matrix")
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(m.values())]
    reduced, pivots = _row_reduce(m.field, aug, n)
    if len(pivots) < n:
        raise SingularMatrix(f"matrix has rank {len(pivots)} < {n}")
    return FieldMatrix(m.field, [r[n:] for r in reduced])


def vandermonde(field: PrimeField, q: int, points: Sequence[int | FieldElement] | None = None) -> FieldMatrix:
    """q x q Vandermonde matrix with entry (i, j) = x_i ** j.

    Points default to ``1, 2, ..., q``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if points is None:
        points = range(1, q + 1)
    xs = [field(x).value for x in points]
    if len(xs) != q:
        raise InvalidEvaluationPoints(f"need {q} evaluation points, got {len(xs)}")
    if q > field.p - 1:
        raise InvalidEvaluationPoints(f"q={q} exceeds the {field.p - 1} nonzero elements of F_{field.p}")
    if 0 in xs:
        raise InvalidEvaluationPoints("evaluation points must be nonzero")
    if len(set(xs)) != q:
        raise InvalidEvaluationPoints("evaluation points must be distinct")
    return FieldMatrix(field, [[pow(x, j, field.p) for j in range(q)] for x in xs])


@dataclass(frozen=True)
class Underdetermined:
    """Outcome of a subset solve whose rows do not pin down every unknown."""

    rank: int
    unknowns: int

    def __str__(self):
        return f"Underdetermined(rank {self.rank} of {self.unknowns})"


def solve_subset(
    m: FieldMatrix, row_subset: Sequence[int], rhs: Sequence[int | FieldElement]
) -> list[FieldElement] | Underdetermined:
    """Solve ``m[row_subset] @ x = rhs`` exactly.

    Returns the unique solution when the selected rows have full column rank,
    otherwise an :class:`Underdetermined` record carrying the rank.
    """
    rows = list(row_subset)
    if any(not 0 <= i < m.rows for i in rows):
        raise ShapeError(f"row indices {rows} out of range for {m.rows} rows")
    if len(rhs) != len(rows):
        raise ShapeError(f"{len(rhs)} right-hand sides for {len(rows)} rows")
    field = m.field
    n = m.cols
    aug = [list(m.row(i)) + [field(b).value] for i, b in zip(rows, rhs)]
    reduced, pivots = _row_reduce(field, aug, n)
    if any(all(v == 0 for v in r[:n]) and r[n] for r in reduced):
        raise InconsistentSystem("right-hand side is not in the column space")
    if len(pivots) < n:
        return Underdetermined(len(pivots), n)
    return [FieldElement(reduced[i][n], field) for i in range(n)]
