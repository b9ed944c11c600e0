"""Matrix subspaces arising from tensor slices: max-rank, min-rank, minimal
covers, the staircase construction behind the max-rank product inequality,
and the diagonalization pipeline that turns large max-rank into large
min-rank on a principal submatrix.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence, Tuple

from .errors import (
    BadParamsError,
    FieldTooSmallError,
    InfiniteFieldError,
    NotConciseError,
    ResourceGuardError,
    RetryBudgetError,
    VerificationFailedError,
    ZeroSpanError,
)
from .fields import Elem, Field, PrimeField
from .matrix import Matrix, concat_cols, rank, rank_of_rows, rref, solve
from .tensor import Tensor3

PROJECTIVE_GUARD = 10_000_000
SUBSPACE_PAIR_GUARD = 1_000_000
EXHAUSTIVE_U_GUARD = 100_000
_BATCH_THRESHOLD = 256


@dataclass(frozen=True)
class SliceSpan:
    """An ordered spanning set of matrices with an orientation tag.

    `basis` keeps the tensor's slice order and may be linearly dependent;
    use `independent_basis` for a reduced basis.  `orientation` records which
    tensor direction indexes rows and which indexes columns (None for a
    free-standing span).
    """

    field: Field
    basis: Tuple[Matrix, ...]
    orientation: Optional[Tuple[int, int]] = None

    @property
    def shape(self) -> Tuple[int, int]:
        m = self.basis[0]
        return (m.rows, m.cols)

    def transpose(self) -> "SliceSpan":
        o = (self.orientation[1], self.orientation[0]) if self.orientation else None
        return SliceSpan(self.field, tuple(m.transpose() for m in self.basis), o)


def span_of(field: Field, mats: Sequence[Matrix], orientation=None) -> SliceSpan:
    if not mats:
        raise ZeroSpanError("a span needs at least one generator")
    return SliceSpan(field, tuple(mats), orientation)


def slice_span(t: Tensor3, row_dir: int, col_dir: int) -> SliceSpan:
    """Span of the slices along the direction not in {row_dir, col_dir},
    with the requested row/column orientation."""
    if row_dir == col_dir or not {row_dir, col_dir} <= {1, 2, 3}:
        raise BadParamsError(f"bad orientation ({row_dir}, {col_dir})")
    d = ({1, 2, 3} - {row_dir, col_dir}).pop()
    mats = t.slices(d)
    if (row_dir, col_dir) != tuple(sorted((row_dir, col_dir))):
        mats = [m.transpose() for m in mats]
    return SliceSpan(t.field, tuple(mats), (row_dir, col_dir))


def independent_basis(span: SliceSpan):
    """Reduced basis and the coefficient matrix expressing it in span.basis.

    Returns (mats, coeffs) with mats[i] = sum_j coeffs[i][j] * span.basis[j].
    """
    f = span.field
    vecs = [m.vectorize() for m in span.basis]
    aug = Matrix(f, [list(v) + list(row) for v, row in zip(vecs, Matrix.identity(f, len(vecs)).data)])
    res = rref(aug)
    n = len(vecs[0])
    rows, cols = span.shape
    mats = []
    coeffs = []
    for r in range(res.rank):
        if res.pivot_cols[r] >= n:
            break  # rows whose pivot lies in the bookkeeping block span nothing
        row = res.rref.data[r]
        mats.append(Matrix(f, [row[i * cols:(i + 1) * cols] for i in range(rows)], cols=cols))
        coeffs.append(row[n:])
    return mats, Matrix(f, coeffs, cols=len(vecs))


def span_dim(span: SliceSpan) -> int:
    f = span.field
    vecs = [m.vectorize() for m in span.basis]
    return rank_of_rows(f, vecs, len(vecs[0])) if vecs and vecs[0] else 0


@dataclass(frozen=True)
class MaxRankWitness:
    """A linear combination of span generators attaining a rank value."""

    coeffs: Tuple[Elem, ...]  # over span.basis, in order
    rank: int


def _combine(span: SliceSpan, coeffs: Sequence[Elem]) -> Matrix:
    f = span.field
    rows, cols = span.shape
    if isinstance(f, PrimeField):
        p = f.p
        acc = [[0] * cols for _ in range(rows)]
        for c, m in zip(coeffs, span.basis):
            if c % p:
                for i, row in enumerate(m.data):
                    ai = acc[i]
                    for j, v in enumerate(row):
                        ai[j] = (ai[j] + c * v) % p
        return Matrix(f, acc, cols=cols)
    acc = [[f.zero()] * cols for _ in range(rows)]
    for c, m in zip(coeffs, span.basis):
        if not f.is_zero(c):
            for i, row in enumerate(m.data):
                ai = acc[i]
                for j, v in enumerate(row):
                    ai[j] = f.add(ai[j], f.mul(c, v))
    return Matrix(f, acc, cols=cols)


def combine(span: SliceSpan, coeffs: Sequence[Elem]) -> Matrix:
    return _combine(span, coeffs)


def _lift_coeffs(reduced_coeffs, reduction: Matrix, field: Field):
    """Coefficients over the reduced basis -> coefficients over span.basis."""
    out = [field.zero()] * reduction.cols
    for c, row in zip(reduced_coeffs, reduction.data):
        if not field.is_zero(c):
            for j, v in enumerate(row):
                out[j] = field.add(out[j], field.mul(c, v))
    return tuple(out)


def _enumerate_ranks(span: SliceSpan, *, minimize: bool, guard: int):
    """Shared projective enumeration for max/min rank over GF(p)."""
    f = span.field
    if not isinstance(f, PrimeField):
        raise InfiniteFieldError("exhaustive rank search needs a finite field")
    mats, reduction = independent_basis(span)
    c = len(mats)
    if c == 0:
        if minimize:
            raise ZeroSpanError("min-rank of the zero span")
        return 0, tuple(f.zero() for _ in span.basis)
    q = f.p
    from ._batch import projective_count, projective_vectors

    count = projective_count(q, c)
    if count > guard:
        raise ResourceGuardError(
            f"projective enumeration of {count} combinations exceeds guard {guard}"
        )
    red = SliceSpan(f, tuple(mats))
    rows, cols = span.shape
    upper = min(rows, cols)
    if count >= _BATCH_THRESHOLD and q <= 2**15:
        value, idx = _enumerate_ranks_batched(red, q, c, minimize)
        vec = None
        for i, v in enumerate(projective_vectors(q, c)):
            if i == idx:
                vec = v
                break
        return value, _lift_coeffs(vec, reduction, f)
    best = None
    best_vec = None
    for vec in projective_vectors(q, c):
        r = rank(_combine(red, vec))
        if best is None or (r < best if minimize else r > best):
            best, best_vec = r, vec
            if (minimize and best == 1) or (not minimize and best == upper):
                break
    return best, _lift_coeffs(best_vec, reduction, f)


def _enumerate_ranks_batched(red: SliceSpan, q: int, c: int, minimize: bool):
    import numpy as np

    from ._batch import batched_rank_mod_p, projective_array

    rows, cols = red.shape
    basis = np.array([m.data for m in red.basis], dtype=np.int64).reshape(c, rows * cols)
    vecs = projective_array(q, c)
    best = None
    best_idx = None
    chunk = 1 << 15
    for lo in range(0, vecs.shape[0], chunk):
        part = vecs[lo: lo + chunk]
        mats = (part @ basis % q).reshape(-1, rows, cols)
        ranks = batched_rank_mod_p(mats, q)
        i = int(np.argmin(ranks) if minimize else np.argmax(ranks))
        v = int(ranks[i])
        if best is None or (v < best if minimize else v > best):
            best = v
            best_idx = lo + i
            if (minimize and best == 1) or (not minimize and best == min(rows, cols)):
                break
    return best, best_idx


def max_rank_exhaustive(span: SliceSpan, *, guard: int = PROJECTIVE_GUARD):
    """Exact max-rank over a finite field with a witness combination."""
    value, coeffs = _enumerate_ranks(span, minimize=False, guard=guard)
    return value, MaxRankWitness(coeffs, value)


def min_rank_exhaustive(span: SliceSpan, *, guard: int = PROJECTIVE_GUARD):
    """Exact min-rank over nonzero span elements, with witness."""
    value, coeffs = _enumerate_ranks(span, minimize=True, guard=guard)
    return value, MaxRankWitness(coeffs, value)


def max_rank_randomized(span: SliceSpan, trials: int, seed: int = 0):
    """Best rank over `trials` random combinations: a certified lower bound.

    Over GF(p) a uniform random combination attains the true max-rank except
    with probability at most maxrank/p per trial (Schwartz-Zippel on a
    nonzero maxrank x maxrank minor); over Q integer coefficients of height
    2*min(shape)+1 give the same bound.  The returned value never exceeds
    the true max-rank.
    """
    f = span.field
    rng = random.Random(seed)
    n = len(span.basis)
    h = 2 * min(span.shape) + 1
    best = 0
    best_coeffs = tuple([f.zero()] * n)
    upper = min(span.shape)
    for _ in range(max(1, trials)):
        if isinstance(f, PrimeField):
            coeffs = tuple(rng.randrange(f.p) for _ in range(n))
        else:
            coeffs = tuple(Fraction(rng.randrange(h)) for _ in range(n))
        r = rank(_combine(span, coeffs))
        if r > best:
            best, best_coeffs = r, coeffs
            if best == upper:
                break
    return best, MaxRankWitness(best_coeffs, best)


# -- subspace enumeration and minimal covers -----------------------------------


def subspaces(field: Field, n: int, dim: int):
    """All dim-dimensional subspaces of F^n as rref basis matrices."""
    if not isinstance(field, PrimeField):
        raise InfiniteFieldError("cannot enumerate subspaces over the rationals")
    q = field.p
    if dim == 0:
        yield Matrix.zeros(field, 0, n)
        return
    for pivots in itertools.combinations(range(n), dim):
        free_pos = [
            (r, c)
            for r in range(dim)
            for c in range(pivots[r] + 1, n)
            if c not in pivots
        ]
        for vals in itertools.product(range(q), repeat=len(free_pos)):
            ent = {(r, pivots[r]): 1 for r in range(dim)}
            for (pos, v) in zip(free_pos, vals):
                if v:
                    ent[pos] = v
            yield Matrix.from_entries(field, dim, n, ent)


def subspace_count(q: int, n: int, dim: int) -> int:
    """Gaussian binomial [n choose dim]_q."""
    num = den = 1
    for i in range(dim):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _annihilator(basis: Matrix) -> Matrix:
    """Rows spanning {y : y . v = 0 for all v in row span of basis}."""
    f = basis.field
    n = basis.cols
    res = rref(basis)
    piv = set(res.pivot_cols)
    rows = []
    for c in range(n):
        if c in piv:
            continue
        vec = [f.zero()] * n
        vec[c] = f.one()
        for r, pc in enumerate(res.pivot_cols):
            vec[pc] = f.neg(res.rref.data[r][c])
        rows.append(vec)
    return Matrix(f, rows, cols=n)


def _covered(span: SliceSpan, ann1: Matrix, ann2: Matrix) -> bool:
    for m in span.basis:
        if not ann1.mul(m).mul(ann2.transpose()).is_zero():
            return False
    return True


def mincov_exhaustive(span: SliceSpan, *, guard: int = SUBSPACE_PAIR_GUARD):
    """Smallest dim V1 + dim V2 with the span inside V1 (x) F + F (x) V2.

    Returns (value, (V1 basis matrix, V2 basis matrix)).  Exhausts subspace
    pairs in order of increasing total dimension, so the first hit is optimal.
    """
    f = span.field
    if not isinstance(f, PrimeField):
        raise InfiniteFieldError("mincov enumeration needs a finite field")
    n1, n2 = span.shape
    if all(m.is_zero() for m in span.basis):
        return 0, (Matrix.zeros(f, 0, n1), Matrix.zeros(f, 0, n2))
    q = f.p
    total_pairs = sum(
        subspace_count(q, n1, a) * subspace_count(q, n2, b)
        for a in range(n1 + 1)
        for b in range(n2 + 1)
    )
    if total_pairs > guard:
        raise ResourceGuardError(
            f"subspace-pair enumeration of {total_pairs} pairs exceeds guard {guard}"
        )
    for total in range(1, n1 + n2 + 1):
        for a in range(max(0, total - n2), min(n1, total) + 1):
            b = total - a
            for v1 in subspaces(f, n1, a):
                ann1 = _annihilator(v1)
                for v2 in subspaces(f, n2, b):
                    if _covered(span, ann1, _annihilator(v2)):
                        return total, (v1, v2)
    raise VerificationFailedError("mincov search exhausted without a cover")  # pragma: no cover


def verify_cover(span: SliceSpan, v1: Matrix, v2: Matrix) -> bool:
    """Check that the span lies inside V1 (x) F + F (x) V2."""
    return _covered(span, _annihilator(v1), _annihilator(v2))


@dataclass(frozen=True)
class FlandersReport:
    maxrank: int
    mincov: Optional[int]
    interval: Tuple[int, int]
    two_sided_applicable: bool
    lower_ok: bool
    four_times_ok: bool
    two_times_ok: Optional[bool]

    @property
    def ratio_ok(self) -> bool:
        ok = self.lower_ok and self.four_times_ok
        if self.two_sided_applicable and self.two_times_ok is not None:
            ok = ok and self.two_times_ok
        return ok


def flanders_check(span: SliceSpan, *, guard: int = SUBSPACE_PAIR_GUARD) -> FlandersReport:
    """Check maxrank <= mincov <= 4*maxrank (and <= 2*maxrank when |F| > maxrank)."""
    mr, _ = max_rank_exhaustive(span)
    f = span.field
    two_sided = f.size() is not None and f.size() > mr
    try:
        mc, _ = mincov_exhaustive(span, guard=guard)
    except ResourceGuardError:
        return FlandersReport(mr, None, (mr, 4 * mr), two_sided, True, True, None)
    return FlandersReport(
        maxrank=mr,
        mincov=mc,
        interval=(mc, mc),
        two_sided_applicable=two_sided,
        lower_ok=mr <= mc,
        four_times_ok=mc <= 4 * mr,
        two_times_ok=(mc <= 2 * mr) if two_sided else None,
    )


# -- staircase construction ----------------------------------------------------


@dataclass(frozen=True)
class StaircaseResult:
    u: Matrix
    s: Tuple[int, ...]
    witness_maxrank3: Tuple[int, int]  # (slice index, rank)
    witness_maxrank2: Tuple[Matrix, int]  # (first-columns matrix, rank)
    coeffs3: Tuple[Elem, ...]
    coeffs2: Tuple[Elem, ...]


def _col_space_rank(field: Field, cols: List[tuple]) -> int:
    return rank_of_rows(field, cols, len(cols[0])) if cols else 0


def staircase(t: Tensor3, *, seed: int = 0, retries: int = 32) -> StaircaseResult:
    """Find U making the left-flushed column prefixes of the transformed
    3-slices jointly independent; yields witnesses with
    witness3.rank * witness2.rank >= n1.
    """
    if not t.is_concise():
        raise NotConciseError("staircase needs a concise tensor")
    f = t.field
    n1, n2, n3 = t.dims
    if f.size() is not None and f.size() <= n1:
        raise FieldTooSmallError(f"staircase needs |F| > {n1}, have {f.size()}")
    slices = t.slices(3)
    s = []
    basis: List[tuple] = []
    r_prev = 0
    for a in slices:
        cols = [a.col(j) for j in range(n2)]
        for cvec in cols:
            if rank_of_rows(f, basis + [cvec], n1) > len(basis):
                basis.append(cvec)
        s.append(len(basis) - r_prev)
        r_prev = len(basis)
    if sum(s) != n1:
        raise NotConciseError("cumulative column ranks do not reach n1")  # pragma: no cover

    rng = random.Random(seed)

    def try_u(u: Matrix):
        prefix_cols = []
        for a, si in zip(slices, s):
            au = a.mul(u)
            for j in range(si):
                prefix_cols.append(au.col(j))
        if prefix_cols and rank_of_rows(f, prefix_cols, n1) == n1:
            return True
        return not prefix_cols and n1 == 0

    u = None
    for _ in range(retries):
        if isinstance(f, PrimeField):
            cand = Matrix(f, [[rng.randrange(f.p) for _ in range(n2)] for _ in range(n2)])
        else:
            h = 2 * n1 + 1
            cand = Matrix(f, [[Fraction(rng.randrange(h)) for _ in range(n2)] for _ in range(n2)])
        if try_u(cand):
            u = cand
            break
    if u is None and isinstance(f, PrimeField):
        total = f.p ** (n2 * n2)
        if total <= EXHAUSTIVE_U_GUARD:
            for vals in itertools.product(range(f.p), repeat=n2 * n2):
                cand = Matrix(f, [vals[i * n2:(i + 1) * n2] for i in range(n2)])
                if try_u(cand):
                    u = cand
                    break
    if u is None:
        raise RetryBudgetError(f"no staircase matrix found in {retries} random tries")

    i_star = max(range(n3), key=lambda i: s[i])
    w3_rank = rank(slices[i_star])
    au = [a.mul(u) for a in slices]
    m = Matrix(f, [[au[i][a, 0] for i in range(n3)] for a in range(n1)], cols=n3)
    w2_rank = rank(m)
    nz = sum(1 for si in s if si)
    if w3_rank < max(s) or w2_rank < nz or w3_rank * w2_rank < n1:
        raise VerificationFailedError("staircase postcondition failed")  # pragma: no cover
    one, zero = f.one(), f.zero()
    coeffs3 = tuple(one if i == i_star else zero for i in range(n3))
    coeffs2 = tuple(u.col(0))
    return StaircaseResult(u, tuple(s), (i_star, w3_rank), (m, w2_rank), coeffs3, coeffs2)


def high_rank_slice(t: Tensor3) -> Tuple[int, int]:
    """A 3-slice of rank at least ceil(max(n1, n2) / n3), by pigeonhole on
    the pivot columns of the concatenated slices."""
    if not t.is_concise():
        raise NotConciseError("high_rank_slice needs a concise tensor")
    n1, n2, c = t.dims
    slices = t.slices(3)
    if n1 >= n2:
        cat = concat_cols(slices)
    else:
        cat = concat_cols([a.transpose() for a in slices])
    res = rref(cat)
    width = n2 if n1 >= n2 else n1
    counts = [0] * c
    for pc in res.pivot_cols:
        counts[pc // width] += 1
    best = max(range(c), key=lambda i: counts[i])
    need = -(-max(n1, n2) // c)
    got = rank(slices[best])
    if got < need:
        raise VerificationFailedError("pigeonhole slice has unexpectedly low rank")  # pragma: no cover
    return best, got


# -- diagonalization pipeline ---------------------------------------------------


def _embed(field: Field, small: Matrix, labels: Sequence[int], n: int) -> Matrix:
    """Embed a transform acting on the `labels` coordinates into GL(F^n)."""
    ent = {(i, i): field.one() for i in range(n)}
    for a, la in enumerate(labels):
        for b, lb in enumerate(labels):
            ent[(la, lb)] = small[a, b]
    return Matrix.from_entries(field, n, n, ent)


def _diag_step(field: Field, a: List[List[Elem]]):
    """One head-clearing step on a d x d block.

    Returns (U, V, drops): row/col transforms with U = Id + (column i stuff),
    V = Id + (row j stuff), i != j, such that in U a V the first row and
    column are zero outside (0,0) at all positions not in drops.
    """
    d = len(a)
    one = field.one()
    u = Matrix.identity(field, d)
    v = Matrix.identity(field, d)
    drops = set()
    xs = [l for l in range(1, d) if not field.is_zero(a[0][l])]
    j = None
    if xs:
        j = xs[0]
        inv = field.inv(a[0][j])
        ent = {(i, i): one for i in range(d)}
        for l in xs:
            if l != j:
                ent[(j, l)] = field.neg(field.mul(inv, a[0][l]))
        v = Matrix.from_entries(field, d, d, ent)
        drops.add(j)
    ys = [l for l in range(1, d) if not field.is_zero(a[l][0])]
    ys_p = [l for l in ys if l != j]
    if ys_p:
        i = ys_p[0]
        inv = field.inv(a[i][0])
        ent = {(r, r): one for r in range(d)}
        for l in ys:
            if l not in (i, j):
                ent[(l, i)] = field.neg(field.mul(inv, a[l][0]))
        u = Matrix.from_entries(field, d, d, ent)
        drops.add(i)
    return u, v, drops


def diagonalize_single(field: Field, a: Matrix):
    """U, V invertible and kept indices with (U a V) diagonal on kept x kept,
    |kept| >= ceil(d/3), and diagonal matrices unchanged on kept x kept."""
    d = a.rows
    u_tot = Matrix.identity(field, d)
    v_tot = Matrix.identity(field, d)
    cur = a
    active = list(range(d))
    prefix = []
    while active:
        block = [[cur[r, c] for c in active] for r in active]
        u_s, v_s, drops = _diag_step(field, block)
        if drops:
            u_f = _embed(field, u_s, active, d)
            v_f = _embed(field, v_s, active, d)
            u_tot = u_f.mul(u_tot)
            v_tot = v_tot.mul(v_f)
            cur = u_f.mul(cur).mul(v_f)
        prefix.append(active[0])
        active = [active[l] for l in range(1, len(active)) if l not in drops]
    kept = sorted(prefix)
    if len(kept) < -(-d // 3):
        raise VerificationFailedError("diagonalization kept fewer than d/3 indices")  # pragma: no cover
    return u_tot, v_tot, kept


def diagonalize_principal(field: Field, mats: Sequence[Matrix]):
    """Simultaneous sandwich transforms making all matrices diagonal on a
    principal submatrix of size at least 3^-(c-1) * n; the first matrix must
    be the identity and survives unchanged on the kept indices."""
    if not mats:
        raise ZeroSpanError("empty matrix collection")
    n = mats[0].rows
    if mats[0] != Matrix.identity(field, n):
        raise BadParamsError("diagonalize_principal expects mats[0] = Id")
    u_tot = Matrix.identity(field, n)
    v_tot = Matrix.identity(field, n)
    kept = list(range(n))
    for m in mats[1:]:
        cur = u_tot.mul(m).mul(v_tot)
        block = cur.submatrix(kept, kept)
        u_s, v_s, kept_rel = diagonalize_single(field, block)
        u_tot = _embed(field, u_s, kept, n).mul(u_tot)
        v_tot = v_tot.mul(_embed(field, v_s, kept, n))
        kept = [kept[i] for i in kept_rel]
    c = len(mats)
    bound = -(-n // 3 ** (c - 1))
    if len(kept) < bound:
        raise VerificationFailedError(
            f"diagonalization kept {len(kept)} < {bound} indices"
        )  # pragma: no cover
    for m in mats:
        tr = u_tot.mul(m).mul(v_tot)
        for a in kept:
            for b in kept:
                if a != b and not field.is_zero(tr[a, b]):
                    raise VerificationFailedError("off-diagonal residue after diagonalization")
    idt = u_tot.mul(mats[0]).mul(v_tot)
    for a in kept:
        if idt[a, a] != field.one():
            raise VerificationFailedError("identity not preserved on kept indices")
    return u_tot, v_tot, kept


# -- support restriction (min-supp) ---------------------------------------------


def _supp(vec) -> frozenset:
    return frozenset(i for i, x in enumerate(vec) if x != 0 and x != Fraction(0))


def _span_vectors(field: Field, basis: Sequence[tuple], *, guard: int = PROJECTIVE_GUARD):
    """Projective enumeration of a vector subspace given by (possibly
    dependent) generators, over a finite field."""
    if not isinstance(field, PrimeField):
        raise InfiniteFieldError("cannot enumerate a subspace over the rationals")
    n = len(basis[0])
    red = [list(v) for v in basis]
    m = Matrix(field, red, cols=n)
    res = rref(m)
    rows = [res.rref.data[i] for i in range(res.rank)]
    from ._batch import projective_count, projective_vectors

    if projective_count(field.p, len(rows)) > guard:
        raise ResourceGuardError("subspace enumeration exceeds guard")
    for coeffs in projective_vectors(field.p, len(rows)):
        out = [0] * n
        for c, row in zip(coeffs, rows):
            if c:
                for j, x in enumerate(row):
                    out[j] = (out[j] + c * x) % field.p
        yield tuple(out)


def minsupp_restrict(field: Field, basis: Sequence[tuple], c: Optional[int] = None):
    """Index set I with V_I nonzero and minsupp(V_I) >= maxsupp(V)/c.

    Runs the greedy set-building process with deterministic tie-breaking
    (lowest-index qualifying vector in a fixed enumeration of the subspace).
    """
    n = len(basis[0])
    dim = rank_of_rows(field, basis, n)
    if dim == 0:
        raise ZeroSpanError("minsupp restriction of the zero space")
    if c is None:
        c = dim
    if dim > c:
        raise BadParamsError(f"subspace dimension {dim} exceeds bound c = {c}")
    vectors = list(_span_vectors(field, basis))
    k = max(len(_supp(v)) for v in vectors)
    j: set = set()
    changed = True
    while changed:
        changed = False
        for v in vectors:
            new = _supp(v) - j
            if 0 < len(new) * c < k:
                j |= _supp(v)
                changed = True
                break
    i_set = [x for x in range(n) if x not in j]
    restricted = [tuple(v[x] for x in i_set) for v in vectors]
    if all(all(x == 0 for x in rv) for rv in restricted):
        raise VerificationFailedError("restricted space collapsed to zero")  # pragma: no cover
    min_supp = min(len(_supp(rv)) for rv in restricted if any(rv))
    if min_supp * c < k:
        raise VerificationFailedError("minsupp postcondition failed")  # pragma: no cover
    return i_set


def _reduce_rows(field: Field, rows: Sequence[tuple]):
    """Independent row basis of a set of vectors (rref rows)."""
    n = len(rows[0])
    res = rref(Matrix(field, rows, cols=n))
    return [res.rref.data[i] for i in range(res.rank)]


def _minsupp_argmin(field: Field, basis: Sequence[tuple]):
    """(value, vector) minimizing support size over nonzero span elements.

    GF(p): projective enumeration.  Q: recursion on single-coordinate
    kernels; any vector with a zero at a live coordinate i lies in the
    kernel of that coordinate, and a full-support vector always exists over
    an infinite field, so the minimum is found exactly.
    """
    n = len(basis[0])
    rows = _reduce_rows(field, basis)
    if not rows:
        raise ZeroSpanError("minsupp of the zero space")
    if isinstance(field, PrimeField):
        best, best_v = None, None
        for v in _span_vectors(field, rows):
            s = len(_supp(v))
            if best is None or s < best:
                best, best_v = s, v
                if best == 1:
                    break
        return best, best_v
    return _minsupp_argmin_q(field, rows, n)


def _minsupp_argmin_q(field: Field, rows: List[tuple], n: int):
    d = len(rows)
    live = [i for i in range(n) if any(r[i] != 0 for r in rows)]
    if d == 1:
        return len(_supp(rows[0])), tuple(rows[0])
    # full-support seed: sum_t t^i row_i avoids all coordinate kernels for
    # some t among (d-1)*|live|+1 candidates (Vandermonde root counting)
    seed = None
    for t in range(1, (d - 1) * len(live) + 2):
        vec = [field.zero()] * n
        w = field.one()
        tt = field.normalize(t)
        for r in rows:
            for jj, x in enumerate(r):
                if x != 0:
                    vec[jj] = field.add(vec[jj], field.mul(w, x))
            w = field.mul(w, tt)
        if all(vec[i] != 0 for i in live):
            seed = vec
            break
    assert seed is not None
    best, best_v = len(live), tuple(seed)
    for i in live:
        sub = Matrix(field, [[r[i]] for r in rows], cols=1)
        ann = _annihilator(sub.transpose())
        kernel_rows = []
        for krow in ann.data:
            vec = [field.zero()] * n
            for coef, r in zip(krow, rows):
                if coef != 0:
                    for jj, x in enumerate(r):
                        vec[jj] = field.add(vec[jj], field.mul(coef, x))
            if any(x != 0 for x in vec):
                kernel_rows.append(tuple(vec))
        if kernel_rows:
            val, vec = _minsupp_argmin_q(field, _reduce_rows(field, kernel_rows), n)
            if val < best:
                best, best_v = val, vec
                if best == 1:
                    break
    return best, best_v


def minsupp_exact(field: Field, basis: Sequence[tuple]) -> int:
    """Exact minimum support size over nonzero vectors of the span."""
    return _minsupp_argmin(field, basis)[0]


def maxsupp_exact(field: Field, basis: Sequence[tuple]) -> int:
    """Exact maximum support size; over Q this is the number of live
    coordinates (a finite union of proper subspaces cannot cover the span)."""
    n = len(basis[0])
    rows = _reduce_rows(field, basis)
    if not rows:
        raise ZeroSpanError("maxsupp of the zero space")
    if isinstance(field, PrimeField):
        return max(len(_supp(v)) for v in _span_vectors(field, rows))
    return sum(1 for i in range(n) if any(r[i] != 0 for r in rows))


def diag_minrank_restrict(field: Field, mats: Sequence[Matrix], c: Optional[int] = None):
    """Index set I with minrank of the I x I restriction at least
    maxrank/c, for a span of diagonal matrices."""
    d = min(mats[0].rows, mats[0].cols)
    vectors = [tuple(m[i, i] for i in range(d)) for m in mats]
    return minsupp_restrict(field, vectors, c)


# -- basis extension -------------------------------------------------------------


def basis_extension(field: Field, mats: Sequence[Matrix], j_set: Sequence[int]):
    """Basis (B_1..B_b, B_{b+1}..B_c) of span(mats) with the first b
    restrictions to J x J linearly independent and the rest zero there."""
    reduced, _ = independent_basis(span_of(field, list(mats)))
    c = len(reduced)
    j_list = list(j_set)
    restr_vecs = [m.submatrix(j_list, j_list).vectorize() for m in reduced]
    width = len(j_list) * len(j_list)
    chosen: List[int] = []
    for idx in range(c):
        if rank_of_rows(field, [restr_vecs[i] for i in chosen] + [restr_vecs[idx]], width) > len(chosen):
            chosen.append(idx)
    b = len(chosen)
    front = [reduced[i] for i in chosen]
    back = []
    basis_mat = Matrix(field, list(zip(*[restr_vecs[i] for i in chosen])), cols=b)
    for idx in range(c):
        if idx in chosen:
            continue
        x = solve(basis_mat, restr_vecs[idx])
        assert x is not None
        m = reduced[idx]
        for coef, bm in zip(x, front):
            if not field.is_zero(coef):
                m = m.sub(bm.scale(coef))
        if not m.submatrix(j_list, j_list).is_zero():
            raise VerificationFailedError("basis extension residue on J x J")  # pragma: no cover
        back.append(m)
    return front, back


# -- the min-rank diagonalization pipeline ---------------------------------------


def epsilon(c: int) -> Fraction:
    """The pipeline's min-rank retention constant (1/c) * 3^-(c-1)."""
    if c < 1:
        raise BadParamsError("epsilon needs c >= 1")
    return Fraction(1, c * 3 ** (c - 1))


@dataclass(frozen=True)
class DiagMinrankResult:
    u: Matrix
    v: Matrix
    j_set: Tuple[int, ...]
    diag_basis: Tuple[Matrix, ...]
    zero_basis: Tuple[Matrix, ...]
    minrank_jj: int
    maxrank: int
    maxrank_exact: bool

    @property
    def b(self) -> int:
        return len(self.diag_basis)


def rank_normal_form(a: Matrix):
    """Invertible P, Q with P a Q = [[Id_k, 0], [0, 0]]; returns (P, Q, k)."""
    f = a.field
    res = rref(a)
    k = res.rank
    p = res.transform
    q_ops = Matrix.identity(f, a.cols)
    work = res.rref
    for r in range(k):
        pc = res.pivot_cols[r]
        ent = {(i, i): f.one() for i in range(a.cols)}
        touched = False
        for c in range(a.cols):
            if c != pc and not f.is_zero(work[r, c]):
                ent[(pc, c)] = f.neg(work[r, c])
                touched = True
        if touched:
            e = Matrix.from_entries(f, a.cols, a.cols, ent)
            work = work.mul(e)
            q_ops = q_ops.mul(e)
    perm_ent = {}
    used = set()
    for r in range(k):
        perm_ent[(res.pivot_cols[r], r)] = f.one()
        used.add(res.pivot_cols[r])
    free = [c for c in range(a.cols) if c not in used]
    for t, c in enumerate(free):
        perm_ent[(c, k + t)] = f.one()
    perm = Matrix.from_entries(f, a.cols, a.cols, perm_ent)
    q = q_ops.mul(perm)
    return p, q, k


def minrk_diag_pipeline(span: SliceSpan, *, trials: int = 64, seed: int = 0,
                        guard: int = PROJECTIVE_GUARD) -> DiagMinrankResult:
    """Base changes U, V, an index set J and a split basis such that the
    basis restricted to J x J is diagonal with min-rank at least
    epsilon(c) * maxrank (and the rest restrict to zero)."""
    f = span.field
    reduced, _ = independent_basis(span)
    c = len(reduced)
    if c == 0:
        raise ZeroSpanError("pipeline on the zero span")
    red_span = span_of(f, reduced)
    exact = False
    if isinstance(f, PrimeField):
        try:
            k_val, wit = max_rank_exhaustive(red_span, guard=guard)
            exact = True
        except ResourceGuardError:
            k_val, wit = max_rank_randomized(red_span, trials, seed)
    else:
        k_val, wit = max_rank_randomized(red_span, trials, seed)
    a_star = _combine(red_span, wit.coeffs)
    p, q, k = rank_normal_form(a_star)
    assert k == k_val
    # reorder basis to start with the max-rank element
    rest = [m for m in reduced]
    basis = [a_star]
    vecs = [a_star.vectorize()]
    width = len(vecs[0])
    for m in rest:
        v = m.vectorize()
        if rank_of_rows(f, vecs + [v], width) > len(vecs):
            basis.append(m)
            vecs.append(v)
    assert len(basis) == c
    transformed = [p.mul(m).mul(q) for m in basis]
    blocks = [m.submatrix(range(k), range(k)) for m in transformed]
    assert blocks[0] == Matrix.identity(f, k)
    u_k, v_k, kept = diagonalize_principal(f, blocks)
    diag_vectors = []
    for blk in blocks:
        tr = u_k.mul(blk).mul(v_k)
        diag_vectors.append(tuple(tr[i, i] for i in kept))
    if isinstance(f, PrimeField):
        i_rel = minsupp_restrict(f, diag_vectors, c)
    else:
        i_rel = _minsupp_restrict_exact_q(f, diag_vectors, c)
    j_set = tuple(kept[i] for i in i_rel)
    n1, n2 = span.shape
    u_full = _pad_block(f, u_k, n1).mul(p)
    v_full = q.mul(_pad_block(f, v_k, n2))
    final = [u_full.mul(m).mul(v_full) for m in basis]
    front, back = basis_extension(f, final, j_set)
    for m in front:
        sub = m.submatrix(j_set, j_set)
        for a in range(len(j_set)):
            for bcol in range(len(j_set)):
                if a != bcol and not f.is_zero(sub[a, bcol]):
                    raise VerificationFailedError("diag basis not diagonal on J x J")
    restricted_diags = [tuple(m.submatrix(j_set, j_set)[i, i] for i in range(len(j_set))) for m in front]
    minrank_jj = minsupp_exact(f, restricted_diags)
    eps = epsilon(c)
    if Fraction(minrank_jj) < eps * k:
        raise VerificationFailedError(
            f"pipeline min-rank {minrank_jj} below epsilon({c}) * {k}"
        )
    return DiagMinrankResult(
        u=u_full, v=v_full, j_set=j_set,
        diag_basis=tuple(front), zero_basis=tuple(back),
        minrank_jj=minrank_jj, maxrank=k, maxrank_exact=exact,
    )


def _minsupp_restrict_exact_q(field: Field, vectors: Sequence[tuple], c: int):
    """Greedy restriction over Q, driven by the exact argmin search: while
    the restricted space has a vector of support below k/c, absorb its full
    support into the removed set."""
    n = len(vectors[0])
    if rank_of_rows(field, vectors, n) == 0:
        raise ZeroSpanError("minsupp restriction of the zero space")
    k = maxsupp_exact(field, vectors)
    j: set = set()
    while True:
        i_set = [x for x in range(n) if x not in j]
        basis_i = [tuple(v[x] for x in i_set) for v in vectors]
        if rank_of_rows(field, basis_i, len(i_set)) == 0:
            raise VerificationFailedError("restricted space collapsed to zero")  # pragma: no cover
        rows = _reduce_rows(field, basis_i)
        val, vec = _minsupp_argmin(field, rows)
        if val * c >= k:
            return i_set
        # lift the witness back to a full vector via its coefficients
        full_rows = _reduce_rows(field, vectors)
        coeffs = solve(Matrix(field, list(zip(*[tuple(r[x] for x in i_set) for r in full_rows])), cols=len(full_rows)), list(vec))
        assert coeffs is not None
        full = [field.zero()] * n
        for coef, r in zip(coeffs, full_rows):
            if coef != 0:
                for jj, x in enumerate(r):
                    full[jj] = field.add(full[jj], field.mul(coef, x))
        new = _supp(full) - j
        if not new:
            raise VerificationFailedError("greedy restriction made no progress")  # pragma: no cover
        j |= _supp(full)


def _pad_block(field: Field, m: Matrix, n: int) -> Matrix:
    """Extend a k x k transform to n x n, identity on the complement."""
    return _embed(field, m, list(range(m.rows)), n)


# -- mixed Kronecker products -----------------------------------------------------


def mixed_kron_count(b: int, c: int, m: int, l: int) -> int:
    from math import comb

    return sum(comb(m, t) * b**t * (c - b) ** (m - t) for t in range(l, m + 1))


def mixed_kron_set(b_mats: Sequence[Matrix], c_mats: Sequence[Matrix], m: int, l: int,
                   *, entry_guard: int = 1 << 24):
    """All order-m Kronecker products of the given matrices with at least l
    factors drawn from b_mats, in lexicographic factor order."""
    if not (m >= l >= 1):
        raise BadParamsError("mixed_kron_set needs m >= l >= 1")
    all_mats = list(b_mats) + list(c_mats)
    b = len(b_mats)
    c = len(all_mats)
    if c == 0:
        raise ZeroSpanError("no factors")
    count = mixed_kron_count(b, c, m, l)
    rows, cols = all_mats[0].rows, all_mats[0].cols
    if count * (rows * cols) ** m > entry_guard:
        raise ResourceGuardError(
            f"mixed kron set of {count} matrices of shape {rows**m}x{cols**m} exceeds guard"
        )
    out = []
    for combo in itertools.product(range(c), repeat=m):
        if sum(1 for i in combo if i < b) < l:
            continue
        acc = all_mats[combo[0]]
        for i in combo[1:]:
            acc = acc.kron(all_mats[i])
        out.append(acc)
    if len(out) != count:
        raise VerificationFailedError("mixed kron count mismatch")  # pragma: no cover
    return out
