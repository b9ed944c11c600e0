"""Pivots of matrix subspaces and tensors: the cover number rho, the
matching number sigma (equal by Konig's theorem), the six orientation-
sensitive tensor variants, the pivot uncertainty inequality, and the
pivot-based border-subrank certificates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .errors import (
    DegenerateSpanError,
    NotConciseError,
    NotCubicalError,
    NotPivotMatchedError,
    VerificationFailedError,
    ZeroMatrixError,
    ZeroSpanError,
    ZeroTensorError,
)
from .laurent import Degeneration, LaurentMatrix, verify_degeneration
from .matrix import Matrix, rref
from .spans import SliceSpan, max_rank_exhaustive, slice_span
from .tensor import Tensor3


def pivot_of(m: Matrix) -> Tuple[int, int]:
    """Lexicographically first nonzero coordinate (0-based)."""
    f = m.field
    for i in range(m.rows):
        for j in range(m.cols):
            if not f.is_zero(m[i, j]):
                return (i, j)
    raise ZeroMatrixError("pivot of the zero matrix")


@dataclass(frozen=True)
class PivotData:
    basis: Tuple[Matrix, ...]
    pivots: Tuple[Tuple[int, int], ...]
    rho: int
    sigma: int
    cover: Tuple[Tuple[int, ...], Tuple[int, ...]]  # (row lines, column lines)
    matching: Tuple[Tuple[int, int], ...]


def pivot_basis(span: SliceSpan):
    """Basis with pairwise distinct pivots (rows of the rref of the
    row-major vectorized slices), together with the canonical pivot set.

    The returned basis is normalized: each matrix is 1 at its own pivot and
    0 at every other basis matrix's pivot.
    """
    f = span.field
    vecs = [m.vectorize() for m in span.basis]
    if not vecs or all(all(f.is_zero(x) for x in v) for v in vecs):
        raise ZeroSpanError("pivot basis of the zero span")
    rows, cols = span.shape
    res = rref(Matrix(f, vecs, cols=rows * cols))
    mats = []
    pivots = []
    for r in range(res.rank):
        row = res.rref.data[r]
        mats.append(Matrix(f, [row[i * cols:(i + 1) * cols] for i in range(rows)], cols=cols))
        pc = res.pivot_cols[r]
        pivots.append((pc // cols, pc % cols))
    return mats, pivots


def max_pivot_matching(pivots: Sequence[Tuple[int, int]]):
    """Maximum set of pivots pairwise distinct in rows and columns
    (bipartite augmenting-path matching)."""
    rows = sorted({p[0] for p in pivots})
    adj: Dict[int, List[int]] = {r: [] for r in rows}
    for (r, c) in pivots:
        adj[r].append(c)
    match_col: Dict[int, int] = {}

    def augment(r, seen):
        for c in adj[r]:
            if c in seen:
                continue
            seen.add(c)
            if c not in match_col or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in rows:
        augment(r, set())
    pairs = sorted((r, c) for c, r in match_col.items())
    piv_set = set(pivots)
    pairs = [p for p in pairs if p in piv_set]
    return pairs, match_col


def konig_cover(pivots: Sequence[Tuple[int, int]], match_col: Dict[int, int]):
    """Minimum line cover from a maximum matching: rows not in Z plus
    columns in Z, where Z is the alternating reachability set from
    unmatched rows."""
    rows = sorted({p[0] for p in pivots})
    adj: Dict[int, List[int]] = {r: [] for r in rows}
    for (r, c) in pivots:
        adj[r].append(c)
    matched_rows = set(match_col.values())
    z_rows = {r for r in rows if r not in matched_rows}
    z_cols: set = set()
    frontier = list(z_rows)
    while frontier:
        nxt = []
        for r in frontier:
            for c in adj[r]:
                if c not in z_cols:
                    z_cols.add(c)
                    mr = match_col.get(c)
                    if mr is not None and mr not in z_rows:
                        z_rows.add(mr)
                        nxt.append(mr)
        frontier = nxt
    cover_rows = tuple(sorted(set(rows) - z_rows))
    cover_cols = tuple(sorted(z_cols))
    return cover_rows, cover_cols


def rho_sigma(span: SliceSpan) -> PivotData:
    """Pivot set with its minimum line cover and maximum matching.

    Equality rho = sigma (Konig) is asserted; a mismatch is a bug.
    """
    mats, pivots = pivot_basis(span)
    matching, match_col = max_pivot_matching(pivots)
    cover_rows, cover_cols = konig_cover(pivots, match_col)
    rho = len(cover_rows) + len(cover_cols)
    sigma = len(matching)
    if rho != sigma:
        raise VerificationFailedError(f"rho {rho} != sigma {sigma}")  # pragma: no cover
    for (r, c) in pivots:
        if r not in cover_rows and c not in cover_cols:
            raise VerificationFailedError("cover misses a pivot")  # pragma: no cover
    return PivotData(
        basis=tuple(mats),
        pivots=tuple(pivots),
        rho=rho,
        sigma=sigma,
        cover=(cover_rows, cover_cols),
        matching=tuple(matching),
    )


def rho_ij(t: Tensor3, i: int, j: int) -> int:
    """rho of the oriented slice span with rows indexed by direction i and
    columns by direction j."""
    if t.is_zero():
        raise ZeroTensorError("rho of the zero tensor")
    return rho_sigma(slice_span(t, i, j)).rho


def all_rho(t: Tensor3) -> Dict[Tuple[int, int], int]:
    return {
        (i, j): rho_ij(t, i, j)
        for i in (1, 2, 3)
        for j in (1, 2, 3)
        if i != j
    }


@dataclass(frozen=True)
class PivotUncertaintyReport:
    entries: Tuple[dict, ...]

    @property
    def all_hold(self) -> bool:
        return all(e["ok"] for e in self.entries)


def pivot_uncertainty_check(t: Tensor3) -> PivotUncertaintyReport:
    """Check rho_{i,j} * max(Q_i, Q_j) >= n_k for all distinct i, j, k."""
    if not t.is_concise():
        raise NotConciseError("pivot uncertainty needs a concise tensor")
    q = {}
    for d in (1, 2, 3):
        rd, cd = [x for x in (1, 2, 3) if x != d]
        q[d], _ = max_rank_exhaustive(slice_span(t, rd, cd))
    out = []
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i == j:
                continue
            k = ({1, 2, 3} - {i, j}).pop()
            rho = rho_ij(t, i, j)
            bound = rho * max(q[i], q[j])
            out.append({
                "i": i, "j": j, "k": k,
                "rho": rho, "qi": q[i], "qj": q[j],
                "nk": t.dims[k - 1],
                "ok": bound >= t.dims[k - 1],
            })
    return PivotUncertaintyReport(tuple(out))


# -- the rho-based border-subrank certificate ----------------------------------


def rho_degeneration(t: Tensor3, i: int, j: int) -> Degeneration:
    """Verified size-rho_{i,j} degeneration certificate on t itself.

    Extracts the matched pivot slices, restricts to the pivot rows/columns
    reordered so pivots sit on the diagonal with cleared pivot rows, then
    attaches the epsilon-scalings; all steps are folded into one Laurent map
    triple.
    """
    if t.is_zero():
        raise ZeroTensorError("degeneration of the zero tensor")
    f = t.field
    span = slice_span(t, i, j)
    data = rho_sigma(span)
    r = data.rho
    slice_dir = ({1, 2, 3} - {i, j}).pop()
    mats, pivots = data.basis, list(data.pivots)
    # matched pivots, sorted by row
    matched = sorted(data.matching)
    sel = [pivots.index(p) for p in matched]
    # basis matrices are combinations of the oriented slices; recover the
    # combination coefficients from the rref transform
    vecs = [m.vectorize() for m in span.basis]
    res = rref(Matrix(f, vecs, cols=len(vecs[0])))
    slice_map_rows = [res.transform.data[pivots_index] for pivots_index in sel]
    rows_sel = [p[0] for p in matched]
    cols_sel = [p[1] for p in matched]
    chosen = [mats[s] for s in sel]
    # order columns by the permutation sending matched pivot t -> diagonal
    sub = [m.submatrix(rows_sel, cols_sel) for m in chosen]
    # clear pivot rows right of the pivot: process slices by decreasing
    # pivot column value; column operations use the pivot column only
    order = sorted(range(r), key=lambda s: -matched[s][1])
    col_ops = Matrix.identity(f, r)
    work = [list(map(list, m.data)) for m in sub]
    for s in order:
        row = work[s][s]
        piv = row[s]
        assert not f.is_zero(piv)
        for u in range(r):
            if u != s and not f.is_zero(row[u]):
                factor = f.div(row[u], piv)
                for w in work:
                    for a in range(r):
                        w[a][u] = f.sub(w[a][u], f.mul(factor, w[a][s]))
                ent = {(x, x): f.one() for x in range(r)}
                ent[(s, u)] = f.neg(factor)
                col_ops = col_ops.mul(Matrix.from_entries(f, r, r, ent))
    # sanity: slice s now has pivot row s equal to e_s and zero rows above
    for s in range(r):
        piv = work[s][s][s]
        if f.is_zero(piv):
            raise VerificationFailedError("pivot vanished during clearing")  # pragma: no cover
    # scale each slice so its pivot value is 1 (slice-leg diagonal map)
    scale = [f.inv(work[s][s][s]) for s in range(r)]

    # assemble the three numeric maps in tensor-leg order
    sel_rows = Matrix.from_entries(f, r, t.dims[i - 1], {(a, rows_sel[a]): f.one() for a in range(r)})
    sel_cols = Matrix.from_entries(f, r, t.dims[j - 1], {(a, cols_sel[a]): f.one() for a in range(r)})
    col_map = col_ops.transpose().mul(sel_cols)
    slice_combo = Matrix(f, [
        [f.mul(scale[a], v) for v in slice_map_rows[a]] for a in range(r)
    ], cols=t.dims[slice_dir - 1])

    # epsilon scalings: slice leg gets e^-s, row leg e^+a (the exponent-0
    # part is then exactly the diagonal; everything else has row > slice)
    legs: List[LaurentMatrix] = [None, None, None]
    legs[slice_dir - 1] = LaurentMatrix.from_matrix(slice_combo).scale_rows([-s for s in range(1, r + 1)])
    legs[i - 1] = LaurentMatrix.from_matrix(sel_rows).scale_rows(list(range(1, r + 1)))
    legs[j - 1] = LaurentMatrix.from_matrix(col_map)
    d = Degeneration(tuple(legs), claimed_r=r, power=1)
    check = verify_degeneration(d, t, explain=True)
    if not check.ok:
        raise VerificationFailedError(f"rho degeneration failed: {check.reason}")
    return d


# -- pivot-matched tensors and the sqrt(n) certificate ---------------------------


def pivot_maps(t: Tensor3):
    """Pivot maps of the 1-slice span (rows = direction 2) and the 3-slice
    span (rows = direction 1), from their rref pivot bases."""
    a_mats, a_piv = pivot_basis(slice_span(t, 2, 3))
    b_mats, b_piv = pivot_basis(slice_span(t, 1, 2))
    return (a_mats, a_piv), (b_mats, b_piv)


def is_pivot_matched(t: Tensor3):
    """Identity-representative pivot-matched test: the multisets of pivot
    rows of the normalized 1-slice and 3-slice bases must agree.

    This is a sufficient condition; a False only means "not pivot-matched
    in the given basis".  Returns (flag, pivot map A, pivot map B).
    """
    n1, n2, n3 = t.dims
    if not (n1 == n2 == n3):
        raise NotCubicalError("pivot matching needs a cubical tensor")
    n = n1
    if t.flattening_rank(1) != n or t.flattening_rank(3) != n:
        raise DegenerateSpanError("pivot maps need full slice span dimensions")
    (a_mats, a_piv), (b_mats, b_piv) = pivot_maps(t)
    rows_a = sorted(p[0] for p in a_piv)
    rows_b = sorted(p[0] for p in b_piv)
    return rows_a == rows_b, a_piv, b_piv


def sqrt_certificate(t: Tensor3) -> Degeneration:
    """Size-n degeneration certificate on the square Kronecker power of a
    concise, cubical, pivot-matched tensor (so the asymptotic diagonalization
    measure is at least sqrt(n)).

    Construction: normalize the 1-slices and 3-slices to rref pivot bases,
    reorder so the two pivot maps share their row coordinate pointwise,
    project each leg of the product tensor onto the paired coordinates, and
    attach the epsilon scalings that push the strictly-upper part to
    positive exponents.
    """
    n1, n2, n3 = t.dims
    if not (n1 == n2 == n3):
        raise NotCubicalError("sqrt certificate needs a cubical tensor")
    n = n1
    if not t.is_concise():
        raise NotConciseError("sqrt certificate needs a concise tensor")
    matched, _, _ = is_pivot_matched(t)
    if not matched:
        raise NotPivotMatchedError("pivot rows of 1- and 3-slice bases differ")
    f = t.field

    a_span = slice_span(t, 2, 3)
    b_span = slice_span(t, 1, 2)
    a_res = rref(Matrix(f, [m.vectorize() for m in a_span.basis], cols=n * n))
    b_res = rref(Matrix(f, [m.vectorize() for m in b_span.basis], cols=n * n))
    a_piv = [(pc // n, pc % n) for pc in a_res.pivot_cols]
    b_piv = [(pc // n, pc % n) for pc in b_res.pivot_cols]
    # pair A-slices and B-slices with equal pivot row, in pivot order
    by_row: Dict[int, List[int]] = {}
    for idx, (pr, _) in enumerate(b_piv):
        by_row.setdefault(pr, []).append(idx)
    pairing = []
    taken = {r: 0 for r in by_row}
    for idx, (pr, _) in enumerate(a_piv):
        pool = by_row.get(pr, [])
        if taken[pr] >= len(pool):
            raise NotPivotMatchedError("pivot row multiset mismatch")  # pragma: no cover
        pairing.append(pool[taken[pr]])
        taken[pr] += 1
    # after pairing, slice l of the A-basis and slice pairing[l] of the
    # B-basis have the same pivot row: f_a[l] == f_b[l]
    f_a = [p[0] for p in a_piv]
    g_a = [p[1] for p in a_piv]
    f_b = [b_piv[pairing[l]][0] for l in range(n)]
    g_b = [b_piv[pairing[l]][1] for l in range(n)]
    assert f_a == f_b

    # base changes: G turns the 1-slices into the A-basis (leg 1),
    # H turns the 3-slices into the reordered B-basis (leg 3)
    g = Matrix(f, [a_res.transform.data[l] for l in range(n)], cols=n)
    h = Matrix(f, [b_res.transform.data[pairing[l]] for l in range(n)], cols=n)

    # leg projections of T_A (x) T_B onto the paired coordinates:
    #   leg 1 keeps (l, f_a[l]), leg 2 keeps (f_b[v], g_b[v]), leg 3 keeps (g_a[w], w)
    def selector(pairs: List[Tuple[int, int]]) -> Matrix:
        ent = {(a, pa * n + pb): f.one() for a, (pa, pb) in enumerate(pairs)}
        return Matrix.from_entries(f, n, n * n, ent)

    p1 = selector([(l, f_a[l]) for l in range(n)])
    p2 = selector([(f_b[v], g_b[v]) for v in range(n)])
    p3 = selector([(g_a[w], w) for w in range(n)])

    ident = Matrix.identity(f, n)
    leg1 = LaurentMatrix.from_matrix(p1.mul(g.kron(ident))).scale_rows([-(f_a[l] + 1) for l in range(n)])
    leg2 = LaurentMatrix.from_matrix(p2).scale_rows([f_b[v] + 1 for v in range(n)])
    leg3 = LaurentMatrix.from_matrix(p3.mul(ident.kron(h)))
    d = Degeneration((leg1, leg2, leg3), claimed_r=n, power=2)
    check = verify_degeneration(d, t.kron_power(2), explain=True)
    if not check.ok:
        raise VerificationFailedError(f"sqrt certificate failed: {check.reason}")
    return d
