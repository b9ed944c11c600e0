"""Text file formats: tensors, certificates, scan reports.

All formats are line-oriented UTF-8, diffable, and round-trip bit-exactly:
parse(serialize(x)) == x.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .errors import ParseError
from .fields import Field, format_value, parse_field, parse_value
from .laurent import Degeneration, LaurentMatrix
from .tensor import Restriction, Tensor3

TENSOR_HEADER = "tensor v1"
CERT_HEADER = "certificate v1"


def serialize_tensor(t: Tensor3) -> str:
    lines = [
        TENSOR_HEADER,
        f"field {t.field.tag}",
        f"dims {t.dims[0]} {t.dims[1]} {t.dims[2]}",
    ]
    for (i, j, k), v in t.nonzero_items():
        lines.append(f"{i + 1} {j + 1} {k + 1} {format_value(v)}")
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> Tensor3:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != TENSOR_HEADER:
        raise ParseError(f"expected '{TENSOR_HEADER}' header")
    field = None
    dims = None
    entries: Dict[Tuple[int, int, int], object] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "field":
            field = parse_field(parts[1])
        elif parts[0] == "dims":
            if len(parts) != 4:
                raise ParseError(f"bad dims line: {ln!r}")
            dims = tuple(int(x) for x in parts[1:])
        else:
            if field is None or dims is None:
                raise ParseError("entry line before field/dims header")
            if len(parts) != 4:
                raise ParseError(f"bad entry line: {ln!r}")
            try:
                i, j, k = (int(x) - 1 for x in parts[:3])
            except ValueError as exc:
                raise ParseError(f"bad index in {ln!r}") from exc
            if not (0 <= i < dims[0] and 0 <= j < dims[1] and 0 <= k < dims[2]):
                raise ParseError(f"index out of range in {ln!r}")
            if (i, j, k) in entries:
                raise ParseError(f"duplicate coordinate in {ln!r}")
            v = parse_value(field, parts[3])
            if field.is_zero(v):
                raise ParseError(f"explicit zero entry in {ln!r}")
            entries[(i, j, k)] = v
    if field is None or dims is None:
        raise ParseError("missing field or dims header")
    return Tensor3(field, dims, entries)


def serialize_certificate(d: Degeneration, field: Field) -> str:
    lines = [
        CERT_HEADER,
        f"field {field.tag}",
        f"power {d.power}",
        f"r {d.claimed_r}",
    ]
    for leg, m in enumerate(d.maps, start=1):
        lines.append(f"map {leg} rows {m.rows} cols {m.cols}")
        for (i, j) in sorted(m.entries):
            for e in sorted(m.entries[(i, j)]):
                v = m.entries[(i, j)][e]
                lines.append(f"{i + 1} {j + 1} {e} {format_value(v)}")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str):
    """Returns (Degeneration, Field)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != CERT_HEADER:
        raise ParseError(f"expected '{CERT_HEADER}' header")
    field = None
    power = None
    r = None
    maps = []
    cur = None  # (rows, cols, entries)
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "field":
            field = parse_field(parts[1])
        elif parts[0] == "power":
            power = int(parts[1])
        elif parts[0] == "r":
            r = int(parts[1])
        elif parts[0] == "map":
            if len(parts) != 6 or parts[2] != "rows" or parts[4] != "cols":
                raise ParseError(f"bad map header {ln!r}")
            if cur is not None:
                maps.append(cur)
            cur = (int(parts[3]), int(parts[5]), {})
        else:
            if cur is None or field is None:
                raise ParseError(f"entry line outside a map block: {ln!r}")
            if len(parts) != 4:
                raise ParseError(f"bad quadruple {ln!r}")
            try:
                i, j = int(parts[0]) - 1, int(parts[1]) - 1
                e = int(parts[2])
            except ValueError as exc:
                raise ParseError(f"bad quadruple {ln!r}") from exc
            v = parse_value(field, parts[3])
            cur[2].setdefault((i, j), {})[e] = v
    if cur is not None:
        maps.append(cur)
    if field is None or power is None or r is None or len(maps) != 3:
        raise ParseError("certificate missing field/power/r or map blocks")
    lms = tuple(LaurentMatrix(field, rows, cols, ent) for rows, cols, ent in maps)
    return Degeneration(lms, claimed_r=r, power=power), field


def certificate_of_restriction(res: Restriction, r: int, power: int) -> Degeneration:
    """Embed an exact restriction as an exponent-0 degeneration, so both
    certificate kinds share one file format and one verification path."""
    return Degeneration.from_restriction(res, r, power)
