"""Order-3 tensors: slices, flattenings, conciseness, restriction, Kronecker
products, and the named-tensor catalog.

Entries are stored densely in lexicographic (i, j, k) order; constructors
accept sparse {(i, j, k): value} input.  All indices in the API are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

from .errors import (
    BadParamsError,
    IndexOutOfRangeError,
    MixedFieldsError,
    ResourceGuardError,
    ShapeMismatchError,
)
from .fields import Elem, Field
from .matrix import Matrix, rank, rank_of_rows, solve

# Dense tensors beyond this entry count are refused rather than thrashed.
KRON_ENTRY_GUARD = 1 << 24


class Tensor3:
    __slots__ = ("field", "dims", "entries")

    def __init__(self, field: Field, dims: Tuple[int, int, int], entries, *, normalize: bool = False):
        n1, n2, n3 = dims
        if n1 < 0 or n2 < 0 or n3 < 0:
            raise BadParamsError("negative dimension")
        size = n1 * n2 * n3
        if isinstance(entries, dict):
            z = field.zero()
            flat = [z] * size
            for (i, j, k), v in entries.items():
                if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
                    raise IndexOutOfRangeError(f"entry index {(i, j, k)} out of range")
                flat[(i * n2 + j) * n3 + k] = field.normalize(v)
            entries = tuple(flat)
        elif normalize:
            entries = tuple(field.normalize(x) for x in entries)
        else:
            entries = tuple(entries)
        if len(entries) != size:
            raise ShapeMismatchError(f"expected {size} entries, got {len(entries)}")
        self.field = field
        self.dims = (n1, n2, n3)
        self.entries = entries

    @classmethod
    def zeros(cls, field: Field, dims: Tuple[int, int, int]) -> "Tensor3":
        return cls(field, dims, {})

    def __getitem__(self, ijk) -> Elem:
        i, j, k = ijk
        n1, n2, n3 = self.dims
        return self.entries[(i * n2 + j) * n3 + k]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tensor3)
            and other.field == self.field
            and other.dims == self.dims
            and other.entries == self.entries
        )

    def __hash__(self) -> int:
        return hash((self.field, self.dims, self.entries))

    def __repr__(self) -> str:
        return f"Tensor3({self.field}, dims={self.dims}, nnz={len(self.support())})"

    def is_zero(self) -> bool:
        z = self.field.zero()
        return all(x == z for x in self.entries)

    def support(self):
        """Sorted list of (i, j, k) positions with nonzero coefficient."""
        n1, n2, n3 = self.dims
        z = self.field.zero()
        out = []
        idx = 0
        for i in range(n1):
            for j in range(n2):
                for k in range(n3):
                    if self.entries[idx] != z:
                        out.append((i, j, k))
                    idx += 1
        return out

    def nonzero_items(self):
        n1, n2, n3 = self.dims
        z = self.field.zero()
        idx = 0
        for i in range(n1):
            for j in range(n2):
                for k in range(n3):
                    v = self.entries[idx]
                    if v != z:
                        yield (i, j, k), v
                    idx += 1

    # -- slices and flattenings ---------------------------------------------

    def slice(self, direction: int, index: int) -> Matrix:
        """The `index`-th slice along `direction` (1, 2 or 3).

        Row/column orientation follows the remaining directions in
        increasing order: 1-slices are (dir2 x dir3), 2-slices (dir1 x dir3),
        3-slices (dir1 x dir2).
        """
        n1, n2, n3 = self.dims
        e = self.entries
        if direction == 1:
            if not 0 <= index < n1:
                raise IndexOutOfRangeError(f"1-slice {index} out of range")
            base = index * n2 * n3
            return Matrix(self.field, [e[base + j * n3: base + (j + 1) * n3] for j in range(n2)])
        if direction == 2:
            if not 0 <= index < n2:
                raise IndexOutOfRangeError(f"2-slice {index} out of range")
            return Matrix(self.field, [
                e[(i * n2 + index) * n3: (i * n2 + index) * n3 + n3] for i in range(n1)
            ])
        if direction == 3:
            if not 0 <= index < n3:
                raise IndexOutOfRangeError(f"3-slice {index} out of range")
            return Matrix(self.field, [
                tuple(e[(i * n2 + j) * n3 + index] for j in range(n2)) for i in range(n1)
            ])
        raise IndexOutOfRangeError(f"direction must be 1, 2 or 3, got {direction}")

    def slices(self, direction: int):
        return [self.slice(direction, i) for i in range(self.dims[direction - 1])]

    def flattening(self, direction: int) -> Matrix:
        """The n_i x (n_j * n_k) flattening, grouping the other two legs
        (j < k) in lexicographic column order."""
        n1, n2, n3 = self.dims
        e = self.entries
        if direction == 1:
            return Matrix(self.field, [e[i * n2 * n3: (i + 1) * n2 * n3] for i in range(n1)])
        if direction == 2:
            return Matrix(self.field, [
                tuple(e[(i * n2 + j) * n3 + k] for i in range(n1) for k in range(n3))
                for j in range(n2)
            ])
        if direction == 3:
            return Matrix(self.field, [
                tuple(e[(i * n2 + j) * n3 + k] for i in range(n1) for j in range(n2))
                for k in range(n3)
            ])
        raise IndexOutOfRangeError(f"direction must be 1, 2 or 3, got {direction}")

    def flattening_rank(self, direction: int) -> int:
        return rank(self.flattening(direction))

    def flattening_ranks(self) -> Tuple[int, int, int]:
        return (self.flattening_rank(1), self.flattening_rank(2), self.flattening_rank(3))

    def is_concise(self) -> bool:
        return all(self.flattening_rank(i) == self.dims[i - 1] for i in (1, 2, 3))

    # -- structural operations ----------------------------------------------

    def permute(self, perm: Tuple[int, int, int]) -> "Tensor3":
        """Relabel legs: result leg t carries what was leg perm[t] (1-based)."""
        if sorted(perm) != [1, 2, 3]:
            raise BadParamsError(f"bad leg permutation {perm}")
        dims = tuple(self.dims[p - 1] for p in perm)
        out: Dict[tuple, Elem] = {}
        for (i, j, k), v in self.nonzero_items():
            old = (i, j, k)
            out[tuple(old[p - 1] for p in perm)] = v
        return Tensor3(self.field, dims, out)

    def is_symmetric(self) -> bool:
        """True iff cubical and invariant under all six leg permutations."""
        n1, n2, n3 = self.dims
        if not n1 == n2 == n3:
            return False
        for i in range(n1):
            for j in range(n2):
                for k in range(n3):
                    v = self[i, j, k]
                    if (
                        v != self[i, k, j]
                        or v != self[j, i, k]
                        or v != self[j, k, i]
                        or v != self[k, i, j]
                        or v != self[k, j, i]
                    ):
                        return False
        return True

    def kron(self, other: "Tensor3") -> "Tensor3":
        """Kronecker product; index pairing (outer, inner) -> outer*innerDim + inner."""
        if self.field != other.field:
            raise MixedFieldsError("kronecker product over mixed fields")
        d = tuple(a * b for a, b in zip(self.dims, other.dims))
        total = d[0] * d[1] * d[2]
        if total > KRON_ENTRY_GUARD:
            raise ResourceGuardError(
                f"kronecker product would have {total} entries (guard {KRON_ENTRY_GUARD})"
            )
        f = self.field
        m1, m2, m3 = other.dims
        out: Dict[tuple, Elem] = {}
        for (i, j, k), v in self.nonzero_items():
            for (a, b, c), w in other.nonzero_items():
                out[(i * m1 + a, j * m2 + b, k * m3 + c)] = f.mul(v, w)
        return Tensor3(f, d, out)

    def kron_power(self, m: int) -> "Tensor3":
        if m < 1:
            raise BadParamsError("kronecker power needs m >= 1")
        acc = self
        for _ in range(m - 1):
            acc = acc.kron(self)
        return acc


def check_concise_format(n1: int, n2: int, n3: int) -> bool:
    """True iff each dimension is at most the product of the other two."""
    return n1 <= n2 * n3 and n2 <= n1 * n3 and n3 <= n1 * n2


# -- restrictions ------------------------------------------------------------


@dataclass(frozen=True)
class Restriction:
    """Linear maps (L1, L2, L3) witnessing source >= target.

    L_i has shape target_dims[i] x source_dims[i].
    """

    maps: Tuple[Matrix, Matrix, Matrix]

    @property
    def source_dims(self) -> Tuple[int, int, int]:
        return tuple(m.cols for m in self.maps)

    @property
    def target_dims(self) -> Tuple[int, int, int]:
        return tuple(m.rows for m in self.maps)

    @classmethod
    def identity(cls, field: Field, dims: Tuple[int, int, int]) -> "Restriction":
        return cls(tuple(Matrix.identity(field, n) for n in dims))

    def compose(self, inner: "Restriction") -> "Restriction":
        """self after inner: maps T -> inner -> self."""
        if inner.target_dims != self.source_dims:
            raise ShapeMismatchError("restriction composition shape mismatch")
        return Restriction(tuple(a.mul(b) for a, b in zip(self.maps, inner.maps)))

    def kron(self, other: "Restriction") -> "Restriction":
        return Restriction(tuple(a.kron(b) for a, b in zip(self.maps, other.maps)))


def apply_restriction(r: Restriction, t: Tensor3) -> Tensor3:
    l1, l2, l3 = r.maps
    if (l1.cols, l2.cols, l3.cols) != t.dims:
        raise ShapeMismatchError(
            f"restriction expects source dims {(l1.cols, l2.cols, l3.cols)}, tensor has {t.dims}"
        )
    f = t.field
    out: Dict[tuple, Elem] = {}
    rows1 = [[(a, v) for a, v in enumerate(l1.col(i)) if not f.is_zero(v)] for i in range(l1.cols)]
    rows2 = [[(b, v) for b, v in enumerate(l2.col(j)) if not f.is_zero(v)] for j in range(l2.cols)]
    rows3 = [[(c, v) for c, v in enumerate(l3.col(k)) if not f.is_zero(v)] for k in range(l3.cols)]
    for (i, j, k), v in t.nonzero_items():
        for a, va in rows1[i]:
            va_v = f.mul(va, v)
            for b, vb in rows2[j]:
                vab = f.mul(va_v, vb)
                for c, vc in rows3[k]:
                    key = (a, b, c)
                    cur = out.get(key)
                    out[key] = f.mul(vab, vc) if cur is None else f.add(cur, f.mul(vab, vc))
    out = {k: v for k, v in out.items() if not f.is_zero(v)}
    return Tensor3(f, r.target_dims, out)


def verify_restriction(r: Restriction, t: Tensor3, s: Tensor3) -> bool:
    """Entrywise check that (L1 (x) L2 (x) L3) t = s."""
    if r.target_dims != s.dims or r.source_dims != t.dims:
        return False
    return apply_restriction(r, t) == s


# -- conciseness reduction ----------------------------------------------------


def _greedy_independent_slices(t: Tensor3, direction: int):
    """Indices of a greedy maximal independent set of slices, plus, for each
    remaining slice, its coordinates in that basis."""
    f = t.field
    slices = t.slices(direction)
    chosen = []
    basis_rows = []
    cols = 0
    for idx, s in enumerate(slices):
        v = s.vectorize()
        cols = len(v)
        if rank_of_rows(f, basis_rows + [v], cols) > len(basis_rows):
            basis_rows.append(v)
            chosen.append(idx)
    # coefficients of every slice in the chosen basis
    basis_mat = Matrix(f, list(zip(*basis_rows)), cols=len(basis_rows))
    coeffs = []
    for s in slices:
        x = solve(basis_mat, s.vectorize())
        assert x is not None, "slice not in span of chosen independent slices"
        coeffs.append(x)
    return chosen, coeffs


def concise_reduce(t: Tensor3):
    """Reduce to an equivalent concise subtensor.

    Returns (s, down, up) with s concise, down mapping t to s and up mapping
    s back to t; both restrictions verify.  The zero tensor reduces to dims
    (0, 0, 0).
    """
    f = t.field
    if t.is_zero():
        s = Tensor3.zeros(f, (0, 0, 0))
        down = Restriction(tuple(Matrix.zeros(f, 0, n) for n in t.dims))
        up = Restriction(tuple(Matrix.zeros(f, n, 0) for n in t.dims))
        return s, down, up
    cur = t
    downs = []
    ups = []
    for direction in (1, 2, 3):
        chosen, coeffs = _greedy_independent_slices(cur, direction)
        n = cur.dims[direction - 1]
        r = len(chosen)
        sel = Matrix.from_entries(f, r, n, {(a, i): f.one() for a, i in enumerate(chosen)})
        exp = Matrix(f, [coeffs[i] for i in range(n)])  # n x r, rows = coordinates
        maps_d = [Matrix.identity(f, cur.dims[0]), Matrix.identity(f, cur.dims[1]), Matrix.identity(f, cur.dims[2])]
        maps_u = list(maps_d)
        maps_d[direction - 1] = sel
        maps_u[direction - 1] = exp
        down_r = Restriction(tuple(maps_d))
        cur = apply_restriction(down_r, cur)
        maps_u_fixed = []
        for li, mu in enumerate(maps_u):
            if li == direction - 1:
                maps_u_fixed.append(exp)
            else:
                maps_u_fixed.append(Matrix.identity(f, cur.dims[li]))
        downs.append(down_r)
        ups.append(Restriction(tuple(maps_u_fixed)))
    down = downs[2].compose(downs[1]).compose(downs[0])
    up = ups[0].compose(ups[1]).compose(ups[2])
    return cur, down, up


# -- catalog ------------------------------------------------------------------


def unit(field: Field, r: int) -> Tensor3:
    """The diagonal unit tensor of size r."""
    if r < 0:
        raise BadParamsError("unit tensor size must be nonnegative")
    return Tensor3(field, (r, r, r), {(i, i, i): field.one() for i in range(r)})


def matmul_tensor(field: Field, a: int, b: int, c: int) -> Tensor3:
    """Structure tensor of (a x b) by (b x c) matrix multiplication.

    Legs index the pairs (i,j) in [a]x[b], (j,k) in [b]x[c], (k,i) in [c]x[a],
    each in row-major order.
    """
    if min(a, b, c) < 1:
        raise BadParamsError("matmul tensor needs positive parameters")
    ent = {}
    one = field.one()
    for i in range(a):
        for j in range(b):
            for k in range(c):
                ent[(i * b + j, j * c + k, k * a + i)] = one
    return Tensor3(field, (a * b, b * c, c * a), ent)


def null_algebra(field: Field, n: int) -> Tensor3:
    """Tensor with two slice directions of full max-rank and one of max-rank 2."""
    if n < 1:
        raise BadParamsError("null_algebra needs n >= 1")
    one = field.one()
    ent = {(0, 0, 0): one}
    for i in range(1, n):
        ent[(0, i, i)] = one
        ent[(i, i, 0)] = one
    return Tensor3(field, (n, n, n), ent)


def gen_null_algebra(field: Field, n: int, c: int) -> Tensor3:
    """Generalization of null_algebra trading off two slice-span max-ranks.

    The two defining sums overlap in one term, so that entry carries
    coefficient 2 (which vanishes in characteristic 2).
    """
    if c < 1 or n % c != 0:
        raise BadParamsError("gen_null_algebra needs c >= 1 dividing n")
    one = field.one()
    ent: Dict[tuple, Elem] = {}

    def add(key):
        ent[key] = field.add(ent.get(key, field.zero()), one)

    for i in range(n):
        add((0, i, i))
    w = n // c
    for i in range(n):
        add((i, i % w, i // w))
    return Tensor3(field, (n, n, n), ent)


def balanced_pivot(field: Field, n: int) -> Tensor3:
    """Concise tensor with all slice-span max-ranks between sqrt(n) and 2 sqrt(n).

    Built from an injective pair map (f, g) fixed as the identity on the first
    sqrt(n) indices and row-major over the remaining off-diagonal pairs.
    """
    s = math.isqrt(n)
    if s * s != n:
        raise BadParamsError("balanced_pivot needs a perfect square n")
    pairs = [(i, i) for i in range(s)]
    for a in range(s):
        for b in range(s):
            if a != b:
                pairs.append((a, b))
    fmap = {i: pairs[i][0] for i in range(n)}
    gmap = {i: pairs[i][1] for i in range(n)}
    one = field.one()
    ent: Dict[tuple, Elem] = {}

    def put(key):
        ent[key] = one

    for i in range(s):
        put((i, i, i))
    for i in range(s, n):
        put((i, fmap[i], gmap[i]))
        put((fmap[i], i, gmap[i]))
        put((fmap[i], gmap[i], i))
    return Tensor3(field, (n, n, n), ent)


def w_tensor(field: Field) -> Tensor3:
    """The 2x2x2 tensor with three off-diagonal unit terms."""
    one = field.one()
    return Tensor3(field, (2, 2, 2), {(0, 1, 1): one, (1, 0, 1): one, (1, 1, 0): one})


CATALOG = {
    "unit": (unit, ("r",)),
    "matmul": (matmul_tensor, ("a", "b", "c")),
    "null_algebra": (null_algebra, ("n",)),
    "gen_null_algebra": (gen_null_algebra, ("n", "c")),
    "balanced_pivot": (balanced_pivot, ("n",)),
    "w_tensor": (w_tensor, ()),
}


def catalog(field: Field, name: str, *params: int) -> Tensor3:
    if name not in CATALOG:
        raise BadParamsError(f"unknown catalog tensor {name!r} (have {sorted(CATALOG)})")
    ctor, argnames = CATALOG[name]
    if len(params) != len(argnames):
        raise BadParamsError(f"{name} expects parameters {argnames}, got {params}")
    return ctor(field, *params)


@dataclass(frozen=True)
class CatalogEntry:
    """Regression contract for a named tensor: expected invariant values
    that must reproduce under this library's own operations."""

    name: str
    params: Tuple[int, ...]
    dims: Tuple[int, int, int]
    flattening_ranks: Tuple[int, int, int]
    q_exact: Dict[int, int]  # direction -> exact slice-span max-rank
    q_upper: Dict[int, int]  # direction -> upper bound
    q_lower: Dict[int, int]  # direction -> lower bound
    subrank: "int | None" = None
    slicerank: "int | None" = None
    annotations: Tuple[str, ...] = ()


def catalog_entry(name: str, *params: int) -> CatalogEntry:
    """Expected invariants for a catalog tensor (see CatalogEntry)."""
    if name == "unit":
        (r,) = params
        return CatalogEntry(name, params, (r, r, r), (r, r, r),
                            {1: r, 2: r, 3: r}, {}, {}, subrank=r, slicerank=r)
    if name == "matmul":
        a, b, c = params
        dims = (a * b, b * c, c * a)
        return CatalogEntry(name, params, dims, dims, {}, {}, {},
                            annotations=("asymptotic diagonalization base min(ab, bc, ca) is classical",))
    if name == "null_algebra":
        (n,) = params
        ann = ()
        if n >= 5:
            ann = (f"literature: asymptotic value 2*sqrt({n}-1) = {2 * (n - 1) ** 0.5:.4f}",)
        return CatalogEntry(name, params, (n, n, n), (n, n, n),
                            {1: n, 2: 2, 3: n}, {}, {}, annotations=ann)
    if name == "gen_null_algebra":
        n, c = params
        return CatalogEntry(name, params, (n, n, n), (n, n, n),
                            {1: n}, {2: c + 1, 3: n // c + 1}, {})
    if name == "balanced_pivot":
        (n,) = params
        s = math.isqrt(n)
        return CatalogEntry(name, params, (n, n, n), (n, n, n),
                            {}, {d: 2 * s for d in (1, 2, 3)}, {d: s for d in (1, 2, 3)})
    if name == "w_tensor":
        return CatalogEntry(name, params, (2, 2, 2), (2, 2, 2),
                            {1: 2, 2: 2, 3: 2}, {}, {}, subrank=1, slicerank=2)
    raise BadParamsError(f"no catalog expectations for {name!r}")
