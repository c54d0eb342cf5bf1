"""Transaction-level import data: parsing, aggregation, validation, groups.

Input CSV layout (UTF-8, comma-delimited, header required):

    product_code,partner,cif_value,quantity,statutory_tariff_frac,applied_tariff_frac,excise_frac,vat_frac

The four rate columns declare their unit in the header suffix: a ``_frac``
column holds fractions (0.40 means 40%), a ``_pct`` column holds percent
values (40 means 40%). Either suffix is accepted independently per column;
values are always stored as fractions so downstream arithmetic never sees
percent units.

``quantity`` may be empty. A record without a quantity falls back to its
CIF value at aggregation time: with full tariff pass-through and fixed
world prices, value at world prices is proportional to quantity, and the
substitution step is homogeneous in quantities, so the substitution
results are unaffected by the proxy.

Country groups come from a second file of ``group_name,member`` pairs, one
per row. A literal ``group_name,member`` first row is treated as a header
and skipped. Group and partner identifiers are matched after trimming and
case-folding.

All transformations here are pure. Aggregation emits lines sorted by
(product_code, partner) so chunked or parallel ingestion reduces to a
deterministic result.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError, EmptyInput, MalformedRow, UnknownGroup

_BASE_COLUMNS = ("product_code", "partner", "cif_value", "quantity")
_RATE_COLUMNS = ("statutory_tariff", "applied_tariff", "excise", "vat")

# Canonical serialization header (fraction units everywhere).
CANONICAL_HEADER = _BASE_COLUMNS + tuple(f"{c}_frac" for c in _RATE_COLUMNS)

GROUPS_HEADER = ("group_name", "member")

# Rates are fractions; 10.0 allows tariffs up to 1000%.
MAX_RATE = 10.0


def canonical_identifier(name: str) -> str:
    """Trim and case-fold an identifier for exact-string matching."""
    return name.strip().casefold()


@dataclass(frozen=True, slots=True)
class TradeRecord:
    """One import transaction: a (product, partner) flow with its rates.

    Rates are fractions (0.40 means 40%). ``applied_tariff`` never exceeds
    ``statutory_tariff``: exemptions only reduce the collected rate.
    """

    product_code: str
    partner: str
    cif_value: float
    quantity: float | None
    statutory_tariff: float
    applied_tariff: float
    excise_rate: float
    vat_rate: float


@dataclass(frozen=True, slots=True)
class TradeLine:
    """An aggregated (product, partner) flow, the atomic simulation unit.

    Unique per (product_code, partner) within a dataset. ``quantity`` is
    the summed physical quantity, or the CIF value where quantities were
    absent. Rates are CIF-weighted means of the merged records.
    """

    product_code: str
    partner: str
    cif_value: float
    quantity: float
    statutory_tariff: float
    applied_tariff: float
    excise_rate: float
    vat_rate: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.product_code, self.partner)


@dataclass(frozen=True, slots=True)
class CountryGroup:
    """A named set of partner identifiers, e.g. a trade bloc."""

    name: str
    members: frozenset[str]


@dataclass(frozen=True, slots=True)
class Dataset:
    """Simulation-ready trade lines plus country groups."""

    lines: tuple[TradeLine, ...]
    groups: tuple[CountryGroup, ...] = ()
    currency_label: str = "value"

    @property
    def total_cif(self) -> float:
        return sum(line.cif_value for line in self.lines)


@dataclass(frozen=True, slots=True)
class ValidationFinding:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """All invariant violations found in a dataset; empty means ready."""

    findings: tuple[ValidationFinding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return "\n".join(str(f) for f in self.findings)


def _decode(source: bytes | str) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    return source


def _parse_float(cell: str, line_no: int, field: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise MalformedRow(line_no, f"cannot parse number {cell!r} for {field}") from None
    if not math.isfinite(value):
        raise DomainError(line_no, field, f"value {cell!r} is not finite")
    return value


def _rate_scales(header: list[str], line_no: int = 1) -> tuple[float, ...]:
    """Map the four rate header cells to multiplicative unit scales."""
    if len(header) != len(CANONICAL_HEADER):
        raise MalformedRow(line_no, f"expected {len(CANONICAL_HEADER)} columns, got {len(header)}")
    cells = [c.strip() for c in header]
    if tuple(cells[:4]) != _BASE_COLUMNS:
        raise MalformedRow(line_no, f"expected leading columns {','.join(_BASE_COLUMNS)}")
    scales = []
    for base, cell in zip(_RATE_COLUMNS, cells[4:]):
        if cell == f"{base}_frac":
            scales.append(1.0)
        elif cell == f"{base}_pct":
            scales.append(0.01)
        else:
            raise MalformedRow(line_no, f"rate column {cell!r} must be {base}_frac or {base}_pct")
    return tuple(scales)


def parse_trade_records(source: bytes | str) -> list[TradeRecord]:
    """Parse a delimited table of import transactions, in file order.

    Raises MalformedRow for structural problems (arity, unparseable
    numbers, bad header), DomainError for sign/bound/order violations, and
    EmptyInput when there are no data rows.
    """
    reader = csv.reader(io.StringIO(_decode(source)))
    rows = [(i + 1, row) for i, row in enumerate(reader) if row]
    if not rows:
        raise EmptyInput("no rows in input")
    header_no, header = rows[0]
    scales = _rate_scales(header, header_no)
    if len(rows) == 1:
        raise EmptyInput("no data rows after header")

    records = []
    for line_no, row in rows[1:]:
        if len(row) != len(CANONICAL_HEADER):
            raise MalformedRow(line_no, f"expected {len(CANONICAL_HEADER)} fields, got {len(row)}")
        product = row[0].strip()
        partner = row[1].strip()
        if not product:
            raise DomainError(line_no, "product_code", "must be nonempty")
        if not partner:
            raise DomainError(line_no, "partner", "must be nonempty")

        cif = _parse_float(row[2], line_no, "cif_value")
        if cif < 0:
            raise DomainError(line_no, "cif_value", f"must be nonnegative, got {cif}")

        qty_cell = row[3].strip()
        quantity: float | None = None
        if qty_cell:
            quantity = _parse_float(qty_cell, line_no, "quantity")
            if quantity <= 0:
                raise DomainError(line_no, "quantity", f"must be positive when present, got {quantity}")

        rates = []
        for base, cell, scale in zip(_RATE_COLUMNS, row[4:], scales):
            field = f"{base}_rate" if base in ("excise", "vat") else base
            rate = _parse_float(cell, line_no, field) * scale
            if rate < 0 or rate > MAX_RATE:
                raise DomainError(line_no, field, f"must be in [0, {MAX_RATE}], got {rate}")
            rates.append(rate)
        statutory, applied, excise, vat = rates
        if applied > statutory:
            raise DomainError(
                line_no, "applied_tariff", f"applied {applied} exceeds statutory {statutory}"
            )

        records.append(
            TradeRecord(
                product_code=product,
                partner=partner,
                cif_value=cif,
                quantity=quantity,
                statutory_tariff=statutory,
                applied_tariff=applied,
                excise_rate=excise,
                vat_rate=vat,
            )
        )
    return records


def serialize_trade_records(records: Iterable[TradeRecord]) -> bytes:
    """Write records in the canonical fraction-unit CSV format.

    Numbers use Python's shortest round-tripping representation, so
    parse -> serialize -> parse reproduces values bit-exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for r in records:
        writer.writerow(
            [
                r.product_code,
                r.partner,
                repr(r.cif_value),
                "" if r.quantity is None else repr(r.quantity),
                repr(r.statutory_tariff),
                repr(r.applied_tariff),
                repr(r.excise_rate),
                repr(r.vat_rate),
            ]
        )
    return out.getvalue().encode("utf-8")


def _effective_quantity(record: TradeRecord | TradeLine) -> float:
    q = record.quantity
    return record.cif_value if q is None else q


def as_trade_lines(records: Iterable[TradeRecord]) -> list[TradeLine]:
    """Map records to lines one-to-one, without merging duplicate keys.

    Used by validation paths that need to surface duplicates rather than
    silently merge them.
    """
    return [
        TradeLine(
            product_code=r.product_code,
            partner=r.partner,
            cif_value=r.cif_value,
            quantity=_effective_quantity(r),
            statutory_tariff=r.statutory_tariff,
            applied_tariff=r.applied_tariff,
            excise_rate=r.excise_rate,
            vat_rate=r.vat_rate,
        )
        for r in records
    ]


def aggregate_lines(records: Iterable[TradeRecord | TradeLine]) -> list[TradeLine]:
    """Merge records with equal (product, partner) into one line each.

    CIF values and quantities are summed; each rate becomes the
    CIF-weighted mean (simple mean for zero-CIF groups, where weights are
    undefined). Output is sorted by (product_code, partner). Groups of one
    record are copied verbatim, which makes the operation idempotent.
    """
    grouped: dict[tuple[str, str], list[TradeRecord | TradeLine]] = {}
    for r in records:
        grouped.setdefault((r.product_code, r.partner), []).append(r)

    lines = []
    for (product, partner), members in sorted(grouped.items()):
        if len(members) == 1:
            m = members[0]
            lines.append(
                TradeLine(
                    product_code=product,
                    partner=partner,
                    cif_value=m.cif_value,
                    quantity=_effective_quantity(m),
                    statutory_tariff=m.statutory_tariff,
                    applied_tariff=m.applied_tariff,
                    excise_rate=m.excise_rate,
                    vat_rate=m.vat_rate,
                )
            )
            continue
        cif_total = sum(m.cif_value for m in members)
        qty_total = sum(_effective_quantity(m) for m in members)

        def _mean(attr: str) -> float:
            values = [getattr(m, attr) for m in members]
            if cif_total > 0:
                return sum(v * m.cif_value for v, m in zip(values, members)) / cif_total
            return sum(values) / len(values)

        lines.append(
            TradeLine(
                product_code=product,
                partner=partner,
                cif_value=cif_total,
                quantity=qty_total,
                statutory_tariff=_mean("statutory_tariff"),
                applied_tariff=_mean("applied_tariff"),
                excise_rate=_mean("excise_rate"),
                vat_rate=_mean("vat_rate"),
            )
        )
    return lines


def parse_groups(source: bytes | str) -> list[CountryGroup]:
    """Parse ``group_name,member`` pairs into country groups.

    Duplicate pairs are deduplicated; group order follows first
    appearance. An optional literal header row is skipped.
    """
    reader = csv.reader(io.StringIO(_decode(source)))
    members: dict[str, set[str]] = {}
    order: list[str] = []
    for i, row in enumerate(reader):
        if not row:
            continue
        line_no = i + 1
        if len(row) != 2:
            raise MalformedRow(line_no, f"expected 2 fields (group_name,member), got {len(row)}")
        name, member = row[0].strip(), row[1].strip()
        if line_no == 1 and (name, member) == GROUPS_HEADER:
            continue
        if not name:
            raise MalformedRow(line_no, "empty group name")
        if not member:
            raise MalformedRow(line_no, "empty group member")
        if name not in members:
            members[name] = set()
            order.append(name)
        members[name].add(member)
    return [CountryGroup(name=n, members=frozenset(members[n])) for n in order]


def resolve_groups(dataset: Dataset, group_name: str) -> list[TradeLine]:
    """Return the dataset lines whose partner belongs to the named group.

    Matching is exact-string on trimmed, case-folded identifiers. Raises
    UnknownGroup when the dataset defines no group with that name.
    """
    wanted = canonical_identifier(group_name)
    for group in dataset.groups:
        if canonical_identifier(group.name) == wanted:
            member_keys = {canonical_identifier(m) for m in group.members}
            matched = [l for l in dataset.lines if canonical_identifier(l.partner) in member_keys]
            return sorted(matched, key=lambda l: l.key)
    raise UnknownGroup(f"group {group_name!r} is not defined")


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Check every dataset invariant and report all violations found."""
    findings: list[ValidationFinding] = []
    seen: set[tuple[str, str]] = set()

    def _check_rate(loc: str, field: str, value: float) -> None:
        if not math.isfinite(value):
            findings.append(ValidationFinding(loc, f"{field} is not finite"))
        elif value < 0 or value > MAX_RATE:
            findings.append(ValidationFinding(loc, f"{field} {value} outside [0, {MAX_RATE}]"))

    for line in dataset.lines:
        loc = f"product={line.product_code} partner={line.partner}"
        if not line.product_code.strip():
            findings.append(ValidationFinding(loc, "empty product_code"))
        if not line.partner.strip():
            findings.append(ValidationFinding(loc, "empty partner"))
        if line.key in seen:
            findings.append(ValidationFinding(loc, "duplicate (product_code, partner) key"))
        seen.add(line.key)
        if not math.isfinite(line.cif_value):
            findings.append(ValidationFinding(loc, "cif_value is not finite"))
        elif line.cif_value < 0:
            findings.append(ValidationFinding(loc, f"cif_value {line.cif_value} is negative"))
        if not math.isfinite(line.quantity):
            findings.append(ValidationFinding(loc, "quantity is not finite"))
        elif line.quantity < 0:
            findings.append(ValidationFinding(loc, f"quantity {line.quantity} is negative"))
        elif line.cif_value > 0 and line.quantity <= 0:
            findings.append(ValidationFinding(loc, "quantity must be positive when cif_value > 0"))
        _check_rate(loc, "statutory_tariff", line.statutory_tariff)
        _check_rate(loc, "applied_tariff", line.applied_tariff)
        _check_rate(loc, "excise_rate", line.excise_rate)
        _check_rate(loc, "vat_rate", line.vat_rate)
        if line.applied_tariff > line.statutory_tariff:
            findings.append(
                ValidationFinding(
                    loc,
                    f"applied_tariff {line.applied_tariff} exceeds "
                    f"statutory_tariff {line.statutory_tariff}",
                )
            )

    group_names: set[str] = set()
    for group in dataset.groups:
        loc = f"group={group.name}"
        if not group.members:
            findings.append(ValidationFinding(loc, "group has no members"))
        canon = canonical_identifier(group.name)
        if canon in group_names:
            findings.append(ValidationFinding(loc, "duplicate group name"))
        group_names.add(canon)

    return ValidationReport(findings=tuple(findings))


def load_dataset(
    data: bytes | str,
    groups_data: bytes | str | None = None,
    currency_label: str = "value",
) -> Dataset:
    """Parse and aggregate raw transaction data into a Dataset."""
    records = parse_trade_records(data)
    groups = tuple(parse_groups(groups_data)) if groups_data is not None else ()
    return Dataset(
        lines=tuple(aggregate_lines(records)),
        groups=groups,
        currency_label=currency_label,
    )


__all__ = [
    "CANONICAL_HEADER",
    "CountryGroup",
    "Dataset",
    "MAX_RATE",
    "TradeLine",
    "TradeRecord",
    "ValidationFinding",
    "ValidationReport",
    "aggregate_lines",
    "as_trade_lines",
    "canonical_identifier",
    "load_dataset",
    "parse_groups",
    "parse_trade_records",
    "resolve_groups",
    "serialize_trade_records",
    "validate_dataset",
]
