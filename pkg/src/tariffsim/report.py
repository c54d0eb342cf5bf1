"""Aggregate simulation results into comparison tables and render them.

Three table shapes: partner shares of import value, tariff revenue by rate
band, and a before/after scenario summary. Renderers emit CSV, JSON and
Markdown deterministically; CSV and Markdown display values at one
decimal (shares at zero decimals under paper rounding), JSON carries
exact values.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

from .errors import UnsupportedFormat
from .engine import SimulationResult
from .ingest import Dataset
from .scenario import RateBand, classify_band, BandRule

FORMATS = ("csv", "json", "md")

# Rate bands used for revenue breakdowns, highest first; the nuisance band
# is lower-inclusive and upper-exclusive like its scenario counterpart.
DEFAULT_BANDS: tuple[RateBand, ...] = (
    RateBand(lower=0.40, upper=None),
    RateBand(lower=0.20, upper=0.40),
    RateBand(lower=0.10, upper=0.20),
    RateBand(lower=0.05, upper=0.10),
    RateBand(lower=0.0, upper=0.05, nuisance=True),
)

UNCLASSIFIED_LABEL = "Unclassified"
FOLD_LABEL = "OTHER"


@dataclass(frozen=True, slots=True)
class PartnerShareRow:
    partner: str
    cif_value: float
    share_pct: float


@dataclass(frozen=True, slots=True)
class PartnerShareTable:
    """Import value and share per partner, largest first, residual last."""

    rows: tuple[PartnerShareRow, ...]
    total_value: float
    total_share: float
    value_label: str = "value"


@dataclass(frozen=True, slots=True)
class BandRevenueRow:
    band: str
    revenue: float
    share_pct: float


@dataclass(frozen=True, slots=True)
class BandRevenueTable:
    """Tariff revenue and share per pre-reform rate band."""

    rows: tuple[BandRevenueRow, ...]
    total_revenue: float
    total_share: float
    value_label: str = "value"


@dataclass(frozen=True, slots=True)
class ScenarioSummary:
    """Headline before/after comparison for one scenario.

    Tariff revenue is collected revenue (applied rates); the average
    tariff rows are trade-weighted statutory rates in percent, so the
    summary can show a falling schedule alongside rising collections when
    exemptions are removed. Changes are after minus before.
    """

    scenario_name: str
    import_value_before: float
    import_value_after: float
    import_value_change: float
    tariff_revenue_before: float
    tariff_revenue_after: float
    tariff_revenue_change: float
    avg_tariff_before: float
    avg_tariff_after: float
    avg_tariff_change: float
    value_label: str = "value"


def _check_state(state: str) -> bool:
    if state not in ("before", "after"):
        raise ValueError(f"state must be 'before' or 'after', got {state!r}")
    return state == "before"


def partner_shares(
    source: Dataset | SimulationResult, top_n: int = 10, state: str = "before"
) -> PartnerShareTable:
    """Partner totals sorted by import value, truncated to ``top_n``.

    Partners beyond ``top_n`` are folded into an OTHER row; any OTHER row
    (original or folded) renders last. Shares are percent of the full
    total, so they sum to 100 regardless of truncation.
    """
    before = _check_state(state)
    if isinstance(source, Dataset):
        pairs = [(line.partner, line.cif_value) for line in source.lines]
        label = source.currency_label
    else:
        pairs = [(l.partner, l.cif_old if before else l.cif_new) for l in source.lines]
        label = source.currency_label
    if not pairs:
        raise ValueError("cannot tabulate an empty dataset")

    totals: dict[str, float] = {}
    for partner, cif in pairs:
        totals[partner] = totals.get(partner, 0.0) + cif
    grand_total = sum(totals[p] for p in sorted(totals))

    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = ranked[: max(top_n, 1)]
    folded = sum(cif for _, cif in ranked[max(top_n, 1) :])

    merged: dict[str, float] = dict(kept)
    if folded > 0:
        merged[FOLD_LABEL] = merged.get(FOLD_LABEL, 0.0) + folded

    body = sorted(
        ((p, v) for p, v in merged.items() if p != FOLD_LABEL), key=lambda kv: (-kv[1], kv[0])
    )
    if FOLD_LABEL in merged:
        body.append((FOLD_LABEL, merged[FOLD_LABEL]))

    rows = tuple(
        PartnerShareRow(
            partner=p,
            cif_value=v,
            share_pct=100.0 * v / grand_total if grand_total > 0 else 0.0,
        )
        for p, v in body
    )
    return PartnerShareTable(
        rows=rows,
        total_value=sum(r.cif_value for r in rows),
        total_share=sum(r.share_pct for r in rows),
        value_label=label,
    )


def revenue_by_band(
    result: SimulationResult,
    bands: Sequence[RateBand] = DEFAULT_BANDS,
    state: str = "before",
) -> BandRevenueTable:
    """Tariff revenue per rate band, one row per band.

    Lines are classified by their pre-reform statutory rate for both
    states, so before and after rows stay comparable within a band. Lines
    matching no band (possible exactly at an excluded boundary) land in an
    extra Unclassified row, ensuring shares still sum to 100.
    """
    before = _check_state(state)
    # classify_band is shared with scenario rules; new_rate is a dummy here.
    probes = tuple(BandRule(band=band, new_rate=0.0) for band in bands)
    revenue = {band.label(): 0.0 for band in bands}
    unclassified = 0.0
    for line in result.lines:
        amount = (line.revenue_old if before else line.revenue_new).tariff
        rule = classify_band(line.rates_old.statutory, probes)
        if rule is None:
            unclassified += amount
        else:
            revenue[rule.band.label()] += amount

    entries = [(band.label(), revenue[band.label()]) for band in bands]
    if unclassified > 0:
        entries.append((UNCLASSIFIED_LABEL, unclassified))
    total = sum(amount for _, amount in entries)
    rows = tuple(
        BandRevenueRow(
            band=label,
            revenue=amount,
            share_pct=100.0 * amount / total if total > 0 else 0.0,
        )
        for label, amount in entries
    )
    return BandRevenueTable(
        rows=rows,
        total_revenue=sum(r.revenue for r in rows),
        total_share=sum(r.share_pct for r in rows),
        value_label=result.currency_label,
    )


def scenario_summary(result: SimulationResult) -> ScenarioSummary:
    """Headline totals for one simulation, changes as after minus before."""
    before, after = result.before, result.after
    avg_before = before.avg_statutory_tariff * 100.0
    avg_after = after.avg_statutory_tariff * 100.0
    return ScenarioSummary(
        scenario_name=result.scenario_name,
        import_value_before=before.import_value,
        import_value_after=after.import_value,
        import_value_change=after.import_value - before.import_value,
        tariff_revenue_before=before.revenue.tariff,
        tariff_revenue_after=after.revenue.tariff,
        tariff_revenue_change=after.revenue.tariff - before.revenue.tariff,
        avg_tariff_before=avg_before,
        avg_tariff_after=avg_after,
        avg_tariff_change=avg_after - avg_before,
        value_label=result.currency_label,
    )


def _fmt_value(value: float) -> str:
    return f"{value:.1f}"


def _fmt_share(share: float, paper_rounding: bool) -> str:
    return f"{share:.0f}" if paper_rounding else f"{share:.1f}"


_SUMMARY_FIELDS = (
    ("import_value_before", "Import value (before)"),
    ("import_value_after", "Import value (after)"),
    ("import_value_change", "Change"),
    ("tariff_revenue_before", "Tariff revenue (before)"),
    ("tariff_revenue_after", "Tariff revenue (after)"),
    ("tariff_revenue_change", "Change"),
    ("avg_tariff_before", "Average tariff % (before)"),
    ("avg_tariff_after", "Average tariff % (after)"),
    ("avg_tariff_change", "Change (pp)"),
)


def _csv_bytes(rows: Sequence[Sequence[str]]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)
    return out.getvalue().encode("utf-8")


def _json_bytes(payload: object) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _md_table(header: Sequence[str], body: Sequence[Sequence[str]]) -> bytes:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(" --- " for _ in header) + "|")
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _normalize_format(fmt: str) -> str:
    name = fmt.strip().lower()
    if name == "markdown":
        name = "md"
    if name not in FORMATS:
        raise UnsupportedFormat(f"format must be one of {FORMATS}, got {fmt!r}")
    return name


def render(
    table: PartnerShareTable | BandRevenueTable | ScenarioSummary,
    fmt: str,
    paper_rounding: bool = False,
) -> bytes:
    """Render a table deterministically as csv, json or md bytes."""
    fmt = _normalize_format(fmt)
    if isinstance(table, PartnerShareTable):
        return _render_partner(table, fmt, paper_rounding)
    if isinstance(table, BandRevenueTable):
        return _render_band(table, fmt, paper_rounding)
    if isinstance(table, ScenarioSummary):
        return _render_summary(table, fmt)
    raise UnsupportedFormat(f"cannot render object of type {type(table).__name__}")


def _render_partner(table: PartnerShareTable, fmt: str, paper_rounding: bool) -> bytes:
    if fmt == "json":
        return _json_bytes(
            {
                "value_label": table.value_label,
                "rows": [
                    {"partner": r.partner, "cif_value": r.cif_value, "share_pct": r.share_pct}
                    for r in table.rows
                ],
                "total": {"cif_value": table.total_value, "share_pct": table.total_share},
            }
        )
    body = [
        [r.partner, _fmt_value(r.cif_value), _fmt_share(r.share_pct, paper_rounding)]
        for r in table.rows
    ]
    body.append(["TOTAL", _fmt_value(table.total_value), _fmt_share(table.total_share, paper_rounding)])
    if fmt == "csv":
        return _csv_bytes([["partner", "cif_value", "share_pct"], *body])
    return _md_table(["partner", table.value_label, "share (%)"], body)


def _render_band(table: BandRevenueTable, fmt: str, paper_rounding: bool) -> bytes:
    if fmt == "json":
        return _json_bytes(
            {
                "value_label": table.value_label,
                "rows": [
                    {"band": r.band, "revenue": r.revenue, "share_pct": r.share_pct}
                    for r in table.rows
                ],
                "total": {"revenue": table.total_revenue, "share_pct": table.total_share},
            }
        )
    body = [
        [r.band, _fmt_value(r.revenue), _fmt_share(r.share_pct, paper_rounding)]
        for r in table.rows
    ]
    body.append(
        ["TOTAL", _fmt_value(table.total_revenue), _fmt_share(table.total_share, paper_rounding)]
    )
    if fmt == "csv":
        return _csv_bytes([["band", "revenue", "share_pct"], *body])
    return _md_table(["tariff band", f"revenue ({table.value_label})", "share (%)"], body)


def _render_summary(summary: ScenarioSummary, fmt: str) -> bytes:
    if fmt == "json":
        payload = {field: getattr(summary, field) for field, _ in _SUMMARY_FIELDS}
        payload["scenario_name"] = summary.scenario_name
        payload["value_label"] = summary.value_label
        return _json_bytes(payload)
    if fmt == "csv":
        rows = [["metric", "value"], ["scenario_name", summary.scenario_name]]
        rows.extend([field, _fmt_value(getattr(summary, field))] for field, _ in _SUMMARY_FIELDS)
        return _csv_bytes(rows)
    body = [[label, _fmt_value(getattr(summary, field))] for field, label in _SUMMARY_FIELDS]
    return _md_table([f"{summary.scenario_name}", f"value ({summary.value_label})"], body)


def render_comparison(summaries: Sequence[ScenarioSummary], fmt: str) -> bytes:
    """Render several scenario summaries side by side, sharing the before column."""
    if not summaries:
        raise ValueError("need at least one summary to compare")
    fmt = _normalize_format(fmt)
    metrics = (
        ("import_value", "Import value"),
        ("tariff_revenue", "Tariff revenue"),
        ("avg_tariff", "Average tariff %"),
    )
    if fmt == "json":
        payload = {
            "before": {m: getattr(summaries[0], f"{m}_before") for m, _ in metrics},
            "scenarios": [
                {
                    "name": s.scenario_name,
                    **{f"{m}_after": getattr(s, f"{m}_after") for m, _ in metrics},
                    **{f"{m}_change": getattr(s, f"{m}_change") for m, _ in metrics},
                }
                for s in summaries
            ],
        }
        return _json_bytes(payload)
    header = ["metric", "before"]
    for s in summaries:
        header.extend([f"{s.scenario_name} (after)", f"{s.scenario_name} (change)"])
    body = []
    for metric, label in metrics:
        row = [label, _fmt_value(getattr(summaries[0], f"{metric}_before"))]
        for s in summaries:
            row.append(_fmt_value(getattr(s, f"{metric}_after")))
            row.append(_fmt_value(getattr(s, f"{metric}_change")))
        body.append(row)
    if fmt == "csv":
        return _csv_bytes([header, *body])
    return _md_table(header, body)


def _csv_rows(data: bytes) -> list[list[str]]:
    return [row for row in csv.reader(io.StringIO(data.decode("utf-8"))) if row]


def parse_partner_table_csv(data: bytes) -> PartnerShareTable:
    """Read back a CSV-rendered partner table (values as displayed)."""
    rows = _csv_rows(data)
    if not rows or rows[0] != ["partner", "cif_value", "share_pct"]:
        raise UnsupportedFormat("not a partner share CSV table")
    body = [PartnerShareRow(r[0], float(r[1]), float(r[2])) for r in rows[1:-1]]
    total = rows[-1]
    return PartnerShareTable(
        rows=tuple(body), total_value=float(total[1]), total_share=float(total[2])
    )


def parse_band_table_csv(data: bytes) -> BandRevenueTable:
    """Read back a CSV-rendered band revenue table (values as displayed)."""
    rows = _csv_rows(data)
    if not rows or rows[0] != ["band", "revenue", "share_pct"]:
        raise UnsupportedFormat("not a band revenue CSV table")
    body = [BandRevenueRow(r[0], float(r[1]), float(r[2])) for r in rows[1:-1]]
    total = rows[-1]
    return BandRevenueTable(
        rows=tuple(body), total_revenue=float(total[1]), total_share=float(total[2])
    )


__all__ = [
    "BandRevenueRow",
    "BandRevenueTable",
    "DEFAULT_BANDS",
    "FORMATS",
    "PartnerShareRow",
    "PartnerShareTable",
    "ScenarioSummary",
    "parse_band_table_csv",
    "parse_partner_table_csv",
    "partner_shares",
    "render",
    "render_comparison",
    "revenue_by_band",
    "scenario_summary",
]
