"""Exact dense matrices over GF(p) or Q.

Rows are stored as a tuple of tuples of canonical field values.  All
operations are pure; matrices are immutable after construction.  Zero row or
column counts are allowed (they show up as empty column prefixes and as maps
out of the zero tensor).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    IndexOutOfRangeError,
    MixedFieldsError,
    ShapeMismatchError,
)
from .fields import Elem, Field, PrimeField


class Matrix:
    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, data: Iterable[Iterable], *, normalize: bool = False, cols: int = None):
        if normalize:
            rows = tuple(tuple(field.normalize(x) for x in row) for row in data)
        else:
            rows = tuple(tuple(row) for row in data)
        self.field = field
        self.data = rows
        self.rows = len(rows)
        if rows:
            self.cols = len(rows[0])
        else:
            self.cols = 0 if cols is None else cols
        for row in rows:
            if len(row) != self.cols:
                raise ShapeMismatchError("ragged matrix rows")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        z = field.zero()
        return cls(field, [[z] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        z, o = field.zero(), field.one()
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_entries(cls, field: Field, rows: int, cols: int, entries) -> "Matrix":
        """Build from a {(i, j): value} dict of nonzero entries (0-based)."""
        z = field.zero()
        data = [[z] * cols for _ in range(rows)]
        for (i, j), v in entries.items():
            data[i][j] = field.normalize(v)
        return cls(field, data)

    # -- basics ------------------------------------------------------------

    def __getitem__(self, ij) -> Elem:
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and other.field == self.field
            and other.data == self.data
        )

    def __hash__(self) -> int:
        return hash((self.field, self.data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.data)
        return f"Matrix({self.field}, {self.rows}x{self.cols}: {body})"

    def is_zero(self) -> bool:
        z = self.field.zero()
        return all(x == z for row in self.data for x in row)

    def transpose(self) -> "Matrix":
        return Matrix(
            self.field,
            [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def row(self, i: int) -> tuple:
        return self.data[i]

    def col(self, j: int) -> tuple:
        return tuple(row[j] for row in self.data)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Matrix"):
        if self.field != other.field:
            raise MixedFieldsError("matrices over different fields")

    def add(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatchError("matrix addition shape mismatch")
        f = self.field
        return Matrix(f, [
            [f.add(a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)
        ])

    def sub(self, other: "Matrix") -> "Matrix":
        self._check(other)
        f = self.field
        return Matrix(f, [
            [f.sub(a, b) for a, b in zip(ra, rb)]
            for ra, rb in zip(self.data, other.data)
        ])

    def scale(self, c: Elem) -> "Matrix":
        f = self.field
        return Matrix(f, [[f.mul(c, x) for x in row] for row in self.data])

    def mul(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise ShapeMismatchError(
                f"matmul shape mismatch: {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        f = self.field
        bt = list(zip(*other.data)) if other.rows else [()] * other.cols
        if isinstance(f, PrimeField):
            p = f.p
            return Matrix(f, [
                [sum(a * b for a, b in zip(row, col)) % p for col in bt]
                for row in self.data
            ], cols=other.cols)
        z = f.zero()
        out = []
        for row in self.data:
            out.append([sum((f.mul(a, b) for a, b in zip(row, col)), z) for col in bt])
        return Matrix(f, out, cols=other.cols)

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product with (outer, inner) lexicographic index order."""
        self._check(other)
        f = self.field
        out = []
        for ra in self.data:
            for rb in other.data:
                out.append([f.mul(a, b) for a in ra for b in rb])
        return Matrix(f, out, cols=self.cols * other.cols)

    # -- extraction ---------------------------------------------------------

    def submatrix(self, rowset: Sequence[int], colset: Sequence[int]) -> "Matrix":
        for i in rowset:
            if not 0 <= i < self.rows:
                raise IndexOutOfRangeError(f"row {i} out of range")
        for j in colset:
            if not 0 <= j < self.cols:
                raise IndexOutOfRangeError(f"col {j} out of range")
        return Matrix(self.field, [[self.data[i][j] for j in colset] for i in rowset], cols=len(colset))

    def col_prefix(self, d: int) -> "Matrix":
        if not 0 <= d <= self.cols:
            raise IndexOutOfRangeError(f"column prefix {d} out of range")
        return Matrix(self.field, [row[:d] for row in self.data], cols=d)

    def vectorize(self) -> tuple:
        """Row-major flattening."""
        return tuple(x for row in self.data for x in row)


def concat_cols(ms: Sequence[Matrix]) -> Matrix:
    """Concatenate [A; B; ...] along columns."""
    if not ms:
        raise ShapeMismatchError("empty concatenation")
    f = ms[0].field
    n = ms[0].rows
    for m in ms:
        if m.field != f:
            raise MixedFieldsError("concatenation over mixed fields")
        if m.rows != n:
            raise ShapeMismatchError("concatenation with differing row counts")
    total = sum(m.cols for m in ms)
    return Matrix(f, [sum((list(m.data[i]) for m in ms), []) for i in range(n)], cols=total)


@dataclass(frozen=True)
class RrefResult:
    rref: Matrix
    transform: Matrix  # invertible; transform * input = rref
    pivot_cols: tuple
    rank: int


def rref(m: Matrix) -> RrefResult:
    """Reduced row-echelon form with a recorded invertible row transform.

    Pivoting is deterministic: first nonzero entry scanning rows top-down,
    columns left-right.
    """
    f = m.field
    a = [list(row) for row in m.data]
    t = [list(row) for row in Matrix.identity(f, m.rows).data]
    pivots = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        sel = None
        for i in range(r, m.rows):
            if not f.is_zero(a[i][c]):
                sel = i
                break
        if sel is None:
            continue
        a[r], a[sel] = a[sel], a[r]
        t[r], t[sel] = t[sel], t[r]
        inv = f.inv(a[r][c])
        if inv != f.one():
            a[r] = [f.mul(inv, x) for x in a[r]]
            t[r] = [f.mul(inv, x) for x in t[r]]
        for i in range(m.rows):
            if i != r:
                factor = a[i][c]
                if not f.is_zero(factor):
                    a[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(a[i], a[r])]
                    t[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(t[i], t[r])]
        pivots.append(c)
        r += 1
    return RrefResult(Matrix(f, a), Matrix(f, t), tuple(pivots), r)


def rank(m: Matrix) -> int:
    """Matrix rank by Gaussian elimination (no transform bookkeeping)."""
    f = m.field
    if isinstance(f, PrimeField):
        return _rank_mod_p([list(row) for row in m.data], m.cols, f.p)
    a = [list(row) for row in m.data]
    r = 0
    rows_n = len(a)
    for c in range(m.cols):
        if r == rows_n:
            break
        sel = None
        for i in range(r, rows_n):
            if a[i][c] != 0:
                sel = i
                break
        if sel is None:
            continue
        a[r], a[sel] = a[sel], a[r]
        pr = a[r]
        pivinv = 1 / pr[c]
        for i in range(r + 1, rows_n):
            factor = a[i][c]
            if factor != 0:
                factor *= pivinv
                ai = a[i]
                for j in range(c, m.cols):
                    ai[j] -= factor * pr[j]
        r += 1
    return r


def _rank_mod_p(a: list, cols: int, p: int) -> int:
    """In-place row elimination mod p on lists of ints."""
    r = 0
    rows_n = len(a)
    for c in range(cols):
        if r == rows_n:
            break
        sel = None
        for i in range(r, rows_n):
            if a[i][c] % p:
                sel = i
                break
        if sel is None:
            continue
        a[r], a[sel] = a[sel], a[r]
        pr = a[r]
        pivinv = pow(pr[c], p - 2, p)
        for i in range(r + 1, rows_n):
            factor = a[i][c]
            if factor % p:
                factor = factor * pivinv % p
                ai = a[i]
                for j in range(c, cols):
                    ai[j] = (ai[j] - factor * pr[j]) % p
        r += 1
    return r


def rank_of_rows(field: Field, rows: Sequence[Sequence[Elem]], cols: int) -> int:
    """Rank of a list of row vectors without building a Matrix."""
    if isinstance(field, PrimeField):
        return _rank_mod_p([list(r) for r in rows], cols, field.p)
    return rank(Matrix(field, rows)) if rows else 0


def solve(a: Matrix, b: Sequence[Elem]):
    """One solution x of a x = b, or None if inconsistent."""
    f = a.field
    aug = Matrix(f, [list(row) + [bv] for row, bv in zip(a.data, b)])
    rr = rref(aug)
    x = [f.zero()] * a.cols
    for r_i, c in enumerate(rr.pivot_cols):
        if c == a.cols:
            return None  # pivot in the augmented column: inconsistent
        x[c] = rr.rref.data[r_i][a.cols]
    return x


def invert(m: Matrix) -> Matrix:
    """Inverse of a square invertible matrix."""
    if m.rows != m.cols:
        raise ShapeMismatchError("inverse of a non-square matrix")
    res = rref(m)
    if res.rank != m.rows:
        raise ShapeMismatchError("matrix is singular")
    return res.transform
