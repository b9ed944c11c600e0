"""Laurent-polynomial matrices and border-subrank degeneration certificates.

A degeneration certificate is a triple of Laurent matrices (A(e), B(e), C(e))
together with a claimed size r and a power m; it verifies against a tensor T
when applying it to T^(x)m yields the size-r diagonal tensor at exponent 0
and nothing at negative exponents.  Restrictions embed as Laurent matrices
supported at exponent 0, so one verification path covers both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

from .errors import (
    BadParamsError,
    FieldTooSmallError,
    ShapeMismatchError,
    VerificationFailedError,
)
from .fields import Elem, Field, PrimeField
from .matrix import Matrix, rank
from .tensor import Restriction, Tensor3, unit

LaurentPoly = Dict[int, Elem]  # exponent -> nonzero coefficient


def poly_add(field: Field, a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    out = dict(a)
    for e, v in b.items():
        s = field.add(out.get(e, field.zero()), v)
        if field.is_zero(s):
            out.pop(e, None)
        else:
            out[e] = s
    return out


def poly_mul(field: Field, a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    out: LaurentPoly = {}
    for ea, va in a.items():
        for eb, vb in b.items():
            e = ea + eb
            s = field.add(out.get(e, field.zero()), field.mul(va, vb))
            if field.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
    return out


def poly_eval(field: Field, a: LaurentPoly, x: Elem) -> Elem:
    """Evaluate at a field point; x must be nonzero if negative exponents occur."""
    acc = field.zero()
    for e, v in a.items():
        if e >= 0:
            acc = field.add(acc, field.mul(v, _power(field, x, e)))
        else:
            acc = field.add(acc, field.mul(v, _power(field, field.inv(x), -e)))
    return acc


def _power(field: Field, x: Elem, e: int) -> Elem:
    acc = field.one()
    for _ in range(e):
        acc = field.mul(acc, x)
    return acc


class LaurentMatrix:
    """Sparse matrix whose entries are Laurent polynomials in one variable."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: Field, rows: int, cols: int, entries: Dict[Tuple[int, int], LaurentPoly]):
        self.field = field
        self.rows = rows
        self.cols = cols
        clean = {}
        for (i, j), poly in entries.items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise ShapeMismatchError(f"laurent entry {(i, j)} out of range")
            poly = {e: v for e, v in poly.items() if not field.is_zero(v)}
            if poly:
                clean[(i, j)] = poly
        self.entries = clean

    @classmethod
    def from_matrix(cls, m: Matrix, exponent: int = 0) -> "LaurentMatrix":
        ent = {}
        for i in range(m.rows):
            for j in range(m.cols):
                v = m[i, j]
                if not m.field.is_zero(v):
                    ent[(i, j)] = {exponent: v}
        return cls(m.field, m.rows, m.cols, ent)

    def scale_rows(self, exponents: Sequence[int]) -> "LaurentMatrix":
        """Multiply row i by e^exponents[i]."""
        ent = {}
        for (i, j), poly in self.entries.items():
            ent[(i, j)] = {e + exponents[i]: v for e, v in poly.items()}
        return LaurentMatrix(self.field, self.rows, self.cols, ent)

    def mul(self, other: "LaurentMatrix") -> "LaurentMatrix":
        if self.cols != other.rows:
            raise ShapeMismatchError("laurent matmul shape mismatch")
        f = self.field
        by_row: Dict[int, list] = {}
        for (i, k), poly in self.entries.items():
            by_row.setdefault(i, []).append((k, poly))
        by_k: Dict[int, list] = {}
        for (k, j), poly in other.entries.items():
            by_k.setdefault(k, []).append((j, poly))
        out: Dict[Tuple[int, int], LaurentPoly] = {}
        for i, left in by_row.items():
            for k, pa in left:
                for j, pb in by_k.get(k, ()):
                    prod = poly_mul(f, pa, pb)
                    key = (i, j)
                    out[key] = poly_add(f, out.get(key, {}), prod)
        return LaurentMatrix(f, self.rows, other.cols, out)

    def evaluate(self, x: Elem) -> Matrix:
        f = self.field
        ent = {}
        for key, poly in self.entries.items():
            v = poly_eval(f, poly, x)
            if not f.is_zero(v):
                ent[key] = v
        return Matrix.from_entries(f, self.rows, self.cols, ent)

    def columns_index(self):
        """column -> list of (row, poly), for sparse contraction."""
        idx: Dict[int, list] = {}
        for (i, j), poly in self.entries.items():
            idx.setdefault(j, []).append((i, poly))
        return idx


@dataclass(frozen=True)
class Degeneration:
    """Certificate that T^(x)power degenerates to the unit tensor of size
    claimed_r (border-subrank witness)."""

    maps: Tuple[LaurentMatrix, LaurentMatrix, LaurentMatrix]
    claimed_r: int
    power: int = 1

    @property
    def target_dims(self):
        return tuple(m.rows for m in self.maps)

    @classmethod
    def from_restriction(cls, r: Restriction, claimed_r: int, power: int = 1) -> "Degeneration":
        return cls(tuple(LaurentMatrix.from_matrix(m) for m in r.maps), claimed_r, power)


def apply_degeneration(d: Degeneration, t: Tensor3) -> Dict[int, Tensor3]:
    """Coefficient tensors of (A(e) (x) B(e) (x) C(e)) T per exponent of e.

    `t` must already be the power-m tensor the certificate lives on.
    """
    f = t.field
    a, b, c = d.maps
    if (a.cols, b.cols, c.cols) != t.dims:
        raise ShapeMismatchError(
            f"degeneration expects source dims {(a.cols, b.cols, c.cols)}, tensor has {t.dims}"
        )
    ai, bi, ci = a.columns_index(), b.columns_index(), c.columns_index()
    acc: Dict[int, Dict[tuple, Elem]] = {}
    for (i, j, k), v in t.nonzero_items():
        for ra, pa in ai.get(i, ()):
            for rb, pb in bi.get(j, ()):
                pab = poly_mul(f, pa, pb)
                for rc, pc in ci.get(k, ()):
                    prod = poly_mul(f, pab, pc)
                    for e, coef in prod.items():
                        bucket = acc.setdefault(e, {})
                        key = (ra, rb, rc)
                        s = f.add(bucket.get(key, f.zero()), f.mul(coef, v))
                        if f.is_zero(s):
                            bucket.pop(key, None)
                        else:
                            bucket[key] = s
    dims = d.target_dims
    return {
        e: Tensor3(f, dims, bucket)
        for e, bucket in sorted(acc.items())
        if bucket
    }


@dataclass(frozen=True)
class DegenerationReport:
    ok: bool
    reason: str = ""


def verify_degeneration(d: Degeneration, t: Tensor3, *, explain: bool = False):
    """True iff no negative exponents appear and the exponent-0 coefficient
    is exactly the unit tensor of size claimed_r."""
    if d.target_dims != (d.claimed_r,) * 3:
        result = DegenerationReport(False, f"target dims {d.target_dims} != unit dims")
        return result if explain else False
    terms = apply_degeneration(d, t)
    neg = [e for e in terms if e < 0]
    if neg:
        result = DegenerationReport(False, f"negative exponent {min(neg)} present")
        return result if explain else False
    expected = unit(t.field, d.claimed_r)
    got = terms.get(0, Tensor3.zeros(t.field, d.target_dims))
    if got != expected:
        result = DegenerationReport(False, "exponent-0 coefficient is not the unit tensor")
        return result if explain else False
    result = DegenerationReport(True)
    return result if explain else True


def mamu_border_lb(e: int, h: int, l: int) -> int:
    """Border-subrank lower bound for the (e, h, l) matrix multiplication
    tensor, e <= h <= l: e*h - floor((e+h-l)^2/4) when e+h >= l, else e*h.
    Always at least ceil(3*e*h/4)."""
    if not (1 <= e <= h <= l):
        raise BadParamsError(f"need 1 <= e <= h <= l, got {(e, h, l)}")
    if e + h >= l:
        val = e * h - ((e + h - l) ** 2) // 4
    else:
        val = e * h
    if 4 * val < 3 * e * h:
        raise VerificationFailedError("border bound fell below 3eh/4")  # pragma: no cover
    return val


def border_le_qi_extract(d: Degeneration, t: Tensor3, direction: int):
    """From a verified degeneration on t (already the power tensor), certify
    that the direction-`direction` slice span of t has max-rank at least
    claimed_r: returns (x, coefficients, combined slice, rank).

    Scans nonzero field points for one where the determinant of the summed
    slices is nonzero; the determinant is a nonzero polynomial because its
    value at e = 0 is 1.
    """
    f = t.field
    q = d.claimed_r
    size = f.size()
    if size is not None and size <= q + 1:
        raise FieldTooSmallError(f"extraction needs |F| > {q + 1}, have {size}")
    if not verify_degeneration(d, t):
        raise BadParamsError("degeneration does not verify against the tensor")
    # candidate points in canonical order, skipping 0 (maps may have e^-k);
    # the determinant polynomial has finitely many roots, so over Q a fixed
    # generous range always suffices at certificate degrees seen in practice
    if isinstance(f, PrimeField):
        candidates = range(1, f.p)
    else:
        candidates = range(1, 1000 * (q + 2))
    for xi in candidates:
        x = f.normalize(xi)
        mats = [m.evaluate(x) for m in d.maps]
        res = _apply_maps(mats, t)
        summed = _sum_slices(res, direction)
        if rank(summed) == q:
            coeffs = _slice_sum_coeffs(mats[direction - 1], f)
            combined = _combine_tensor_slices(t, direction, coeffs)
            got = rank(combined)
            if got < q:
                raise VerificationFailedError("combined slice lost rank")  # pragma: no cover
            return x, coeffs, combined, got
    raise FieldTooSmallError("no evaluation point with nonzero determinant found")


def _apply_maps(mats: Sequence[Matrix], t: Tensor3) -> Tensor3:
    from .tensor import apply_restriction

    return apply_restriction(Restriction(tuple(mats)), t)


def _sum_slices(t: Tensor3, direction: int) -> Matrix:
    mats = t.slices(direction)
    acc = mats[0]
    for m in mats[1:]:
        acc = acc.add(m)
    return acc


def _slice_sum_coeffs(evaluated_map: Matrix, f: Field):
    """Coefficients of the combined slice: column sums of the evaluated map."""
    return tuple(
        _sum_elems(f, [evaluated_map[i, j] for i in range(evaluated_map.rows)])
        for j in range(evaluated_map.cols)
    )


def _sum_elems(f: Field, xs):
    acc = f.zero()
    for x in xs:
        acc = f.add(acc, x)
    return acc


def _combine_tensor_slices(t: Tensor3, direction: int, coeffs) -> Matrix:
    f = t.field
    mats = t.slices(direction)
    acc = Matrix.zeros(f, mats[0].rows, mats[0].cols)
    for c, m in zip(coeffs, mats):
        if not f.is_zero(c):
            acc = acc.add(m.scale(c))
    return acc
