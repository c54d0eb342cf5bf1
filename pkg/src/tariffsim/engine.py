"""Three-step trade response and revenue accounting for a reform scenario.

For each product the reform is propagated in three consecutive steps, each
driven by relative duty-inclusive price changes:

1. Substitution across exporters of the product. Each exporter's quantity
   is scaled by (1 + gamma_es * dp_j) and the product total is renormalized
   so the summed quantity is conserved.
2. Substitution between imports and domestic output. All exporters of the
   product are scaled pro-rata by (1 + gamma_ds * dp_bar), where dp_bar is
   the pre-reform CIF-weighted mean price change.
3. A demand response scaling by (1 + epsilon_d * dp_bar).

With full pass-through and fixed world prices, the relative price change
for a tariff move t_old -> t_new is (t_new - t_old) / (1 + t_old); the
excise and VAT factors applied on top of the duty-inclusive value cancel.

Revenue cascades: tariff on CIF, excise on tariff-inclusive CIF, VAT on
tariff-and-excise-inclusive CIF. Collected revenue uses applied rates.

Products are independent (no cross-product substitution), so
``run_simulation`` may fan products out to worker threads; results are
reduced in sorted (product, partner) order and are bitwise identical for
any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateWeights
from .ingest import CountryGroup, Dataset, TradeLine
from .scenario import Rates, Scenario, apply_rules


def price_change(t_old: float, t_new: float, excise: float = 0.0, vat: float = 0.0) -> float:
    """Relative duty-inclusive price change for a tariff move.

    Equals (t_new - t_old) / (1 + t_old). The excise and vat arguments are
    accepted because both taxes multiply the duty-inclusive price; they
    cancel out of the relative change and do not affect the result.
    """
    del excise, vat
    return (t_new - t_old) / (1.0 + t_old)


def exporter_substitution(
    q_old: Sequence[float], price_changes: Sequence[float], gamma_es: float
) -> list[float]:
    """Reallocate one product's import quantities across its exporters.

    q_es_j = (1 + gamma_es * dp_j) * q_old_j * sum(q_old) / sum_k((1 + gamma_es * dp_k) * q_old_k)

    The normalization conserves the summed quantity. Zero-quantity lines
    pass through as zero and do not enter the normalization sums. Raises
    DegenerateWeights when any traded line's factor, or the weight sum, is
    nonpositive.
    """
    if len(q_old) != len(price_changes):
        raise ValueError("q_old and price_changes must have equal length")
    if not q_old:
        return []
    factors = [1.0 + gamma_es * dp for dp in price_changes]
    for q, f in zip(q_old, factors):
        if q > 0 and f <= 0:
            raise DegenerateWeights(f"price-response factor {f} is nonpositive")
    total_old = sum(q for q in q_old if q > 0)
    if total_old <= 0:
        return [0.0] * len(q_old)
    traded = [f for q, f in zip(q_old, factors) if q > 0]
    if all(f == traded[0] for f in traded):
        # Uniform factor cancels against the normalization exactly.
        return [q if q > 0 else 0.0 for q in q_old]
    weighted = sum(f * q for q, f in zip(q_old, factors) if q > 0)
    if weighted <= 0:
        raise DegenerateWeights(f"normalization weight sum {weighted} is nonpositive")
    scale = total_old / weighted
    return [f * q * scale if q > 0 else 0.0 for q, f in zip(q_old, factors)]


def cif_weighted_price_change(cif_old: Sequence[float], price_changes: Sequence[float]) -> float:
    """Mean price change over a product, weighted by pre-reform CIF shares."""
    total = sum(cif_old)
    if total <= 0:
        return 0.0
    return sum(c * dp for c, dp in zip(cif_old, price_changes)) / total


def domestic_substitution(
    q_es: Sequence[float],
    cif_old: Sequence[float],
    price_changes: Sequence[float],
    gamma_ds: float,
) -> list[float]:
    """Scale a product's imports against domestic output, pro-rata.

    Every exporter is multiplied by (1 + gamma_ds * dp_bar) with dp_bar the
    pre-reform CIF-weighted mean price change. gamma_ds of 0 is an exact
    no-op. Raises DegenerateWeights when the factor is nonpositive.
    """
    dp_bar = cif_weighted_price_change(cif_old, price_changes)
    factor = 1.0 + gamma_ds * dp_bar
    if factor <= 0:
        raise DegenerateWeights(f"import-domestic factor {factor} is nonpositive")
    return [q * factor for q in q_es]


def demand_effect(q_ds: Sequence[float], avg_price_change: float, epsilon_d: float) -> list[float]:
    """Scale a product's imports for the overall demand response.

    Multiplies every quantity by (1 + epsilon_d * avg_price_change);
    epsilon_d of 0 is an exact no-op. Raises DegenerateWeights when the
    factor is nonpositive.
    """
    factor = 1.0 + epsilon_d * avg_price_change
    if factor <= 0:
        raise DegenerateWeights(f"demand factor {factor} is nonpositive")
    return [q * factor for q in q_ds]


@dataclass(frozen=True, slots=True)
class RevenueBreakdown:
    """Revenue collected on one flow, by component (currency units)."""

    tariff: float
    excise: float
    vat: float
    total: float


def compute_revenue(cif: float, tariff_rate: float, excise_rate: float, vat_rate: float) -> RevenueBreakdown:
    """Cascaded revenue on a CIF value.

    tariff = t * cif, excise = e * (1 + t) * cif,
    vat = v * (1 + t) * (1 + e) * cif.
    """
    tariff = tariff_rate * cif
    excise = excise_rate * (1.0 + tariff_rate) * cif
    vat = vat_rate * (1.0 + tariff_rate) * (1.0 + excise_rate) * cif
    return RevenueBreakdown(tariff=tariff, excise=excise, vat=vat, total=tariff + excise + vat)


@dataclass(frozen=True, slots=True)
class PriceChange:
    """Relative duty-inclusive price change for one line."""

    product_code: str
    partner: str
    delta_p_rel: float


@dataclass(frozen=True, slots=True)
class LineResult:
    """One line's quantities, values and revenue before and after reform."""

    product_code: str
    partner: str
    q_old: float
    q_es: float
    q_ds: float
    q_final: float
    cif_old: float
    cif_new: float
    rates_old: Rates
    rates_new: Rates
    revenue_old: RevenueBreakdown
    revenue_new: RevenueBreakdown


@dataclass(frozen=True, slots=True)
class DatasetTotals:
    """Dataset-level aggregates for one state (pre- or post-reform)."""

    import_value: float
    revenue: RevenueBreakdown
    avg_statutory_tariff: float
    avg_applied_tariff: float


@dataclass(frozen=True, slots=True)
class SimulationResult:
    """All line results plus recomputable dataset totals."""

    scenario_name: str
    currency_label: str
    lines: tuple[LineResult, ...]
    before: DatasetTotals
    after: DatasetTotals


def aggregate_totals(lines: Iterable[LineResult], state: str) -> DatasetTotals:
    """Recompute dataset totals from line results for 'before' or 'after'."""
    if state not in ("before", "after"):
        raise ValueError(f"state must be 'before' or 'after', got {state!r}")
    old = state == "before"
    cif_total = 0.0
    tariff = excise = vat = 0.0
    stat_weighted = applied_weighted = 0.0
    for line in lines:
        cif = line.cif_old if old else line.cif_new
        rates = line.rates_old if old else line.rates_new
        revenue = line.revenue_old if old else line.revenue_new
        cif_total += cif
        tariff += revenue.tariff
        excise += revenue.excise
        vat += revenue.vat
        stat_weighted += rates.statutory * cif
        applied_weighted += rates.applied * cif
    return DatasetTotals(
        import_value=cif_total,
        revenue=RevenueBreakdown(tariff=tariff, excise=excise, vat=vat, total=tariff + excise + vat),
        avg_statutory_tariff=stat_weighted / cif_total if cif_total > 0 else 0.0,
        avg_applied_tariff=applied_weighted / cif_total if cif_total > 0 else 0.0,
    )


def _simulate_product(
    product_code: str,
    lines: Sequence[TradeLine],
    scenario: Scenario,
    groups: Iterable[CountryGroup],
) -> list[LineResult]:
    rates_new = [apply_rules(line, scenario, groups) for line in lines]
    changes = [
        price_change(line.applied_tariff, new.applied, line.excise_rate, line.vat_rate)
        for line, new in zip(lines, rates_new)
    ]
    q_old = [line.quantity for line in lines]
    cif_old = [line.cif_value for line in lines]
    gamma_es = scenario.elasticities.gamma_es_for(product_code)
    try:
        q_es = exporter_substitution(q_old, changes, gamma_es)
        dp_bar = cif_weighted_price_change(cif_old, changes)
        q_ds = domestic_substitution(q_es, cif_old, changes, scenario.elasticities.gamma_ds)
        q_final = demand_effect(q_ds, dp_bar, scenario.elasticities.epsilon_d)
    except DegenerateWeights as exc:
        raise DegenerateWeights(f"product {product_code}: {exc}", product_code=product_code) from exc

    results = []
    for line, new, qe, qd, qf in zip(lines, rates_new, q_es, q_ds, q_final):
        cif_new = line.cif_value * (qf / line.quantity) if line.quantity > 0 else line.cif_value
        old = Rates(
            statutory=line.statutory_tariff,
            applied=line.applied_tariff,
            excise=line.excise_rate,
            vat=line.vat_rate,
        )
        results.append(
            LineResult(
                product_code=line.product_code,
                partner=line.partner,
                q_old=line.quantity,
                q_es=qe,
                q_ds=qd,
                q_final=qf,
                cif_old=line.cif_value,
                cif_new=cif_new,
                rates_old=old,
                rates_new=new,
                revenue_old=compute_revenue(line.cif_value, old.applied, old.excise, old.vat),
                revenue_new=compute_revenue(cif_new, new.applied, new.excise, new.vat),
            )
        )
    return results


def run_simulation(dataset: Dataset, scenario: Scenario, jobs: int = 1) -> SimulationResult:
    """Run the full trade response and revenue accounting for a scenario.

    Products are processed independently, optionally on ``jobs`` worker
    threads; output order and totals are reduced in sorted
    (product_code, partner) order, so results do not depend on ``jobs``.
    Raises DegenerateWeights (naming the product) when a step factor is
    nonpositive.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    ordered = sorted(dataset.lines, key=lambda l: (l.product_code, l.partner))
    by_product: dict[str, list[TradeLine]] = {}
    for line in ordered:
        by_product.setdefault(line.product_code, []).append(line)

    items = list(by_product.items())
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(
                pool.map(lambda it: _simulate_product(it[0], it[1], scenario, dataset.groups), items)
            )
    else:
        chunks = [_simulate_product(code, lines, scenario, dataset.groups) for code, lines in items]

    line_results = tuple(result for chunk in chunks for result in chunk)
    return SimulationResult(
        scenario_name=scenario.name,
        currency_label=dataset.currency_label,
        lines=line_results,
        before=aggregate_totals(line_results, "before"),
        after=aggregate_totals(line_results, "after"),
    )


__all__ = [
    "DatasetTotals",
    "LineResult",
    "PriceChange",
    "RevenueBreakdown",
    "SimulationResult",
    "aggregate_totals",
    "cif_weighted_price_change",
    "compute_revenue",
    "demand_effect",
    "domestic_substitution",
    "exporter_substitution",
    "price_change",
    "run_simulation",
]
