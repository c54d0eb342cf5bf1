"""Partial-equilibrium tariff reform simulator.

Takes transaction-level import data and a declarative reform scenario,
computes post-reform prices, import reallocation across exporters and
government revenue (tariff, excise, VAT), and renders before/after
comparison tables.
"""

from .engine import (
    DatasetTotals,
    LineResult,
    RevenueBreakdown,
    SimulationResult,
    compute_revenue,
    demand_effect,
    domestic_substitution,
    exporter_substitution,
    price_change,
    run_simulation,
)
from .errors import (
    DegenerateWeights,
    DomainError,
    EmptyInput,
    InvalidRate,
    MalformedRow,
    OverlappingBands,
    SchemaError,
    TariffSimError,
    UnknownGroup,
    UnsupportedFormat,
)
from .ingest import (
    CountryGroup,
    Dataset,
    TradeLine,
    TradeRecord,
    ValidationReport,
    aggregate_lines,
    load_dataset,
    parse_groups,
    parse_trade_records,
    resolve_groups,
    serialize_trade_records,
    validate_dataset,
)
from .report import (
    BandRevenueTable,
    PartnerShareTable,
    ScenarioSummary,
    partner_shares,
    render,
    render_comparison,
    revenue_by_band,
    scenario_summary,
)
from .scenario import (
    BandRule,
    Elasticities,
    RateBand,
    Rates,
    Scenario,
    apply_rules,
    classify_band,
    parse_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BandRevenueTable",
    "BandRule",
    "CountryGroup",
    "Dataset",
    "DatasetTotals",
    "DegenerateWeights",
    "DomainError",
    "Elasticities",
    "EmptyInput",
    "InvalidRate",
    "LineResult",
    "MalformedRow",
    "OverlappingBands",
    "PartnerShareTable",
    "RateBand",
    "Rates",
    "RevenueBreakdown",
    "Scenario",
    "ScenarioSummary",
    "SchemaError",
    "SimulationResult",
    "TariffSimError",
    "TradeLine",
    "TradeRecord",
    "UnknownGroup",
    "UnsupportedFormat",
    "ValidationReport",
    "aggregate_lines",
    "apply_rules",
    "classify_band",
    "compute_revenue",
    "demand_effect",
    "domestic_substitution",
    "exporter_substitution",
    "load_dataset",
    "parse_groups",
    "parse_scenario",
    "parse_trade_records",
    "partner_shares",
    "price_change",
    "render",
    "render_comparison",
    "resolve_groups",
    "revenue_by_band",
    "run_simulation",
    "scenario_summary",
    "serialize_trade_records",
    "validate_dataset",
]
