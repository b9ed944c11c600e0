"""Command-line interface: inspect tensors, compute and certify rank
parameters, verify certificate files, and run exhaustive format scans.

Exit codes: 0 success, 2 parse error, 3 resource guard, 4 field too small,
5 verification failure, 1 any other library error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional, Tuple

from .errors import (
    FieldTooSmallError,
    ParseError,
    ResourceGuardError,
    TenrankError,
    VerificationFailedError,
)
from .fields import PrimeField, parse_field
from .io import (
    certificate_of_restriction,
    parse_certificate,
    parse_tensor,
    serialize_certificate,
    serialize_tensor,
)
from .laurent import verify_degeneration
from .spans import max_rank_exhaustive, max_rank_randomized, min_rank_exhaustive, slice_span
from .tensor import CATALOG, Tensor3, catalog
from . import engine, pivots

DEFAULT_SEED = 2024
SCAN_CAP = 1 << 20


def _read_tensor(path: str) -> Tensor3:
    if path == "-":
        return parse_tensor(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tensor(fh.read())


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_info(args) -> int:
    t = _read_tensor(args.tensor)
    ranks = t.flattening_ranks()
    lines = [
        f"dims {t.dims[0]} {t.dims[1]} {t.dims[2]}",
        f"field {t.field.tag}",
        f"nonzeros {len(t.support())}",
        f"flattening_ranks {ranks[0]} {ranks[1]} {ranks[2]}",
        f"concise {int(ranks == t.dims)}",
        f"symmetric {int(t.is_symmetric())}",
    ]
    _emit("\n".join(lines), args.out)
    return 0


def cmd_bounds(args) -> int:
    t = _read_tensor(args.tensor)
    rep = engine.asymptotic_bounds(t)
    _emit(rep.to_kv() if args.format == "kv" else rep.to_text(), args.out)
    return 0


def _guard_kw(args) -> dict:
    return {"guard": args.guard} if args.guard else {}


def cmd_subrank(args) -> int:
    t = _read_tensor(args.tensor)
    value, cert = engine.subrank_exact(t, **_guard_kw(args))
    lines = [f"subrank {value}"]
    if args.certify:
        d = certificate_of_restriction(cert.restriction, cert.r, cert.power)
        with open(args.certify, "w", encoding="utf-8") as fh:
            fh.write(serialize_certificate(d, t.field))
        lines.append(f"certificate {args.certify}")
    _emit("\n".join(lines), args.out)
    return 0


def cmd_slicerank(args) -> int:
    t = _read_tensor(args.tensor)
    _emit(f"slicerank {engine.slicerank_exact(t, **_guard_kw(args))}", args.out)
    return 0


def _parse_orient(text: str) -> Tuple[int, int]:
    try:
        i, j = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise ParseError(f"bad orientation {text!r}, expected 'i,j'") from exc
    return i, j


def cmd_maxrank(args) -> int:
    t = _read_tensor(args.tensor)
    i, j = _parse_orient(args.orient)
    span = slice_span(t, i, j)
    if args.trials:
        value, wit = max_rank_randomized(span, args.trials, args.seed)
        how = f"randomized lower bound ({args.trials} trials)"
    else:
        value, wit = max_rank_exhaustive(span, **_guard_kw(args))
        how = "exhaustive"
    _emit(f"maxrank {value} ({how})", args.out)
    return 0


def cmd_minrank(args) -> int:
    t = _read_tensor(args.tensor)
    i, j = _parse_orient(args.orient)
    value, _ = min_rank_exhaustive(slice_span(t, i, j), **_guard_kw(args))
    _emit(f"minrank {value}", args.out)
    return 0


def cmd_pivots(args) -> int:
    t = _read_tensor(args.tensor)
    lines = []
    for (i, j), v in sorted(pivots.all_rho(t).items()):
        lines.append(f"rho_{i}{j} {v}")
    _emit("\n".join(lines), args.out)
    return 0


def cmd_certify(args) -> int:
    t = _read_tensor(args.tensor)
    kind = args.kind
    if kind == "rho":
        i, j = _parse_orient(args.orient)
        d = pivots.rho_degeneration(t, i, j)
    elif kind == "sqrt":
        d = pivots.sqrt_certificate(t)
    elif kind == "subrank":
        _, cert = engine.subrank_exact(t, **_guard_kw(args))
        d = certificate_of_restriction(cert.restriction, cert.r, cert.power)
    elif kind == "c2":
        cert = engine.subrank_c2(t)
        d = certificate_of_restriction(cert.restriction, cert.r, cert.power)
    else:  # pragma: no cover - argparse restricts choices
        raise ParseError(f"unknown certificate kind {kind!r}")
    text = serialize_certificate(d, t.field)
    _emit(text, args.out)
    if not args.out:
        return 0
    sys.stdout.write(f"certificate r={d.claimed_r} power={d.power} -> {args.out}\n")
    return 0


def cmd_verify(args) -> int:
    with open(args.certificate, "r", encoding="utf-8") as fh:
        d, field = parse_certificate(fh.read())
    t = _read_tensor(args.tensor)
    if t.field != field:
        raise VerificationFailedError("certificate and tensor field tags differ")
    power_tensor = t.kron_power(d.power) if d.power > 1 else t
    report = verify_degeneration(d, power_tensor, explain=True)
    if report.ok:
        _emit(f"verified r={d.claimed_r} power={d.power}", args.out)
        return 0
    raise VerificationFailedError(report.reason)


def cmd_power(args) -> int:
    t = _read_tensor(args.tensor)
    _emit(serialize_tensor(t.kron_power(args.m)), args.out)
    return 0


def cmd_catalog(args) -> int:
    field = parse_field(args.field)
    params = [int(x) for x in args.params]
    t = catalog(field, args.name, *params)
    if args.expect:
        from .tensor import catalog_entry

        entry = catalog_entry(args.name, *params)
        lines = [f"dims {entry.dims}", f"flattening_ranks {entry.flattening_ranks}"]
        for d, v in sorted(entry.q_exact.items()):
            lines.append(f"q{d} {v}")
        for d, v in sorted(entry.q_lower.items()):
            lines.append(f"q{d} >= {v}")
        for d, v in sorted(entry.q_upper.items()):
            lines.append(f"q{d} <= {v}")
        if entry.subrank is not None:
            lines.append(f"subrank {entry.subrank}")
        if entry.slicerank is not None:
            lines.append(f"slicerank {entry.slicerank}")
        for a in entry.annotations:
            lines.append(f"note: {a}")
        _emit("\n".join(lines), args.out)
        return 0
    _emit(serialize_tensor(t), args.out)
    return 0


def _scan_one(word: int, dims, field) -> Tuple[int, int, Tuple[int, int, int], bool]:
    from . import _gf2

    if isinstance(field, PrimeField) and field.p == 2:
        ranks = _gf2.flattening_ranks(word, dims)
        entries = _gf2.unpack_entries(word, dims)
        t = Tensor3(field, dims, entries)
    else:
        t = _tensor_from_index(word, dims, field)
        ranks = t.flattening_ranks()
    q_val, _ = engine.subrank_exact(t)
    sr_val = engine.slicerank_exact(t)
    return q_val, sr_val, ranks, ranks == dims


def _tensor_from_index(index: int, dims, field) -> Tensor3:
    q = field.p
    n = dims[0] * dims[1] * dims[2]
    digits = []
    for _ in range(n):
        digits.append(index % q)
        index //= q
    return Tensor3(field, dims, digits)


def scan_format(field, dims, *, offset: int = 0, limit: Optional[int] = None,
                workers: int = 1, cap: int = SCAN_CAP):
    """Exhaustively scan all tensors of a format over GF(q).

    Returns (counts, scanned) where counts maps
    (subrank, slicerank, flattening ranks, concise) to a tally.  The index
    range [offset, offset+limit) supports resumable chunked scans; workers
    split the range into deterministic chunks whose commutative merge makes
    the result independent of the worker count.
    """
    if not isinstance(field, PrimeField):
        raise ResourceGuardError("scan needs a prime field")
    n = dims[0] * dims[1] * dims[2]
    total = field.p**n
    if total > cap:
        raise ResourceGuardError(f"scan of {total} tensors exceeds cap {cap}")
    end = total if limit is None else min(total, offset + limit)
    counts: Dict[tuple, int] = {}
    # deterministic commutative aggregation over worker chunks
    for w in range(max(1, workers)):
        for idx in range(offset + w, end, max(1, workers)):
            key = _scan_one(idx, dims, field)
            counts[key] = counts.get(key, 0) + 1
    return counts, end - offset


def format_scan_report(field, dims, counts: Dict[tuple, int], scanned: int) -> str:
    lines = [
        "scan v1",
        f"field {field.tag}",
        f"dims {dims[0]} {dims[1]} {dims[2]}",
        "columns subrank slicerank r1 r2 r3 concise count",
    ]
    for key in sorted(counts):
        q_val, sr_val, ranks, concise = key
        lines.append(
            f"row {q_val} {sr_val} {ranks[0]} {ranks[1]} {ranks[2]} {int(concise)} {counts[key]}"
        )
    lines.append(f"total {scanned}")
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> int:
    field = parse_field(args.field)
    dims = tuple(int(x) for x in args.dims.split(","))
    if len(dims) != 3:
        raise ParseError("scan needs --dims a,b,c")
    counts, scanned = scan_format(
        field, dims, offset=args.offset, limit=args.limit, workers=args.workers,
        cap=args.guard if args.guard else SCAN_CAP,
    )
    # chain inequalities inside every bucket
    violations = sum(
        cnt for (q_val, sr_val, ranks, _), cnt in counts.items()
        if not (q_val <= sr_val <= min(ranks) or min(ranks) == 0)
    )
    text = format_scan_report(field, dims, counts, scanned)
    text += f"chain_violations {violations}\n"
    _emit(text, args.out)
    return 0 if violations == 0 else 5


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tenrank", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tensor=True):
        if tensor:
            sp.add_argument("tensor", help="tensor file")
        sp.add_argument("--out", default=None, help="write output to a file")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--guard", type=int, default=None, help="resource guard override")

    sp = sub.add_parser("info", help="dimensions, field, ranks, conciseness")
    common(sp)
    sp.set_defaults(fn=cmd_info)

    sp = sub.add_parser("bounds", help="certified asymptotic subrank interval")
    common(sp)
    sp.add_argument("--format", choices=["text", "kv"], default="text")
    sp.set_defaults(fn=cmd_bounds)

    sp = sub.add_parser("subrank", help="exact subrank (exhaustive search)")
    common(sp)
    sp.add_argument("--certify", default=None, help="also write a certificate file")
    sp.set_defaults(fn=cmd_subrank)

    sp = sub.add_parser("slicerank", help="exact slice rank (exhaustive search)")
    common(sp)
    sp.set_defaults(fn=cmd_slicerank)

    sp = sub.add_parser("maxrank", help="max-rank of an oriented slice span")
    common(sp)
    sp.add_argument("--orient", default="1,2", help="row,col directions")
    sp.add_argument("--trials", type=int, default=0, help="randomized trials (0 = exhaustive)")
    sp.set_defaults(fn=cmd_maxrank)

    sp = sub.add_parser("minrank", help="min-rank of an oriented slice span")
    common(sp)
    sp.add_argument("--orient", default="1,2")
    sp.set_defaults(fn=cmd_minrank)

    sp = sub.add_parser("pivots", help="the six oriented pivot cover numbers")
    common(sp)
    sp.set_defaults(fn=cmd_pivots)

    sp = sub.add_parser("certify", help="emit a certificate file")
    sp.add_argument("kind", choices=["rho", "sqrt", "subrank", "c2"])
    common(sp)
    sp.add_argument("--orient", default="1,2")
    sp.set_defaults(fn=cmd_certify)

    sp = sub.add_parser("verify", help="re-verify a certificate against a tensor")
    sp.add_argument("certificate")
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("power", help="write a Kronecker power of a tensor")
    common(sp)
    sp.add_argument("m", type=int)
    sp.set_defaults(fn=cmd_power)

    sp = sub.add_parser("catalog", help="write a named catalog tensor")
    sp.add_argument("name", choices=sorted(CATALOG))
    sp.add_argument("params", nargs="*")
    sp.add_argument("--field", default="gf:2")
    sp.add_argument("--out", default=None)
    sp.add_argument("--expect", action="store_true",
                    help="print the expected invariant table instead of the tensor")
    sp.set_defaults(fn=cmd_catalog)

    sp = sub.add_parser("scan", help="exhaustive scan of a whole format")
    sp.add_argument("--dims", required=True)
    sp.add_argument("--field", required=True)
    sp.add_argument("--offset", type=int, default=0)
    sp.add_argument("--limit", type=int, default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--guard", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_scan)

    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return 3
    except FieldTooSmallError as exc:
        print(f"field too small: {exc}", file=sys.stderr)
        return 4
    except VerificationFailedError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 5
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return 2
    except TenrankError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
