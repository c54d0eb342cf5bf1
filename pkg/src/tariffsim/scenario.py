"""Reform scenarios: ordered band-remapping rules plus targeting and overrides.

A scenario rewrites each line's tariff rates. Band intervals follow the
(lower, upper] convention: lower-exclusive, upper-inclusive, with ``upper``
of None meaning unbounded. The sub-threshold ("nuisance") band flips both
ends to [lower, upper), so a rate exactly at the threshold is untouched
while zero-rated lines are included and raised.

The rate named by ``rate_basis`` is band-classified and replaced; the
other rate follows the exemption policy:

* ``remove_exemptions=True``: both rates collapse to the remapped basis
  rate, i.e. the full rate is collected.
* otherwise the pre-reform ratio between the two rates is preserved
  (taken as 1 when the basis rate is 0), so partial exemptions survive
  the reform proportionally. Lines whose basis rate matches no band pass
  through bit-identically, unless exemptions are being removed.

Scenario files are JSON; see ``parse_scenario``. Scenario objects are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InvalidRate, OverlappingBands, SchemaError, UnknownGroup
from .ingest import MAX_RATE, CountryGroup, TradeLine, canonical_identifier

RATE_BASES = ("applied", "statutory")


def _pct(rate: float) -> str:
    return f"{rate * 100:g}%"


@dataclass(frozen=True, slots=True)
class RateBand:
    """A rate interval, (lower, upper] by default or [lower, upper) when nuisance."""

    lower: float
    upper: float | None  # None = unbounded above
    nuisance: bool = False

    def contains(self, rate: float) -> bool:
        if self.nuisance:
            return rate >= self.lower and (self.upper is None or rate < self.upper)
        return rate > self.lower and (self.upper is None or rate <= self.upper)

    def overlaps(self, other: "RateBand") -> bool:
        lo = max(self.lower, other.lower)
        hi = min(
            math.inf if self.upper is None else self.upper,
            math.inf if other.upper is None else other.upper,
        )
        if lo < hi:
            return True
        return lo == hi and self.contains(lo) and other.contains(lo)

    def label(self) -> str:
        if self.nuisance:
            upper = "" if self.upper is None else f" {_pct(self.upper)}"
            return f"Below{upper} (nuisance)" if upper else "All rates (nuisance)"
        if self.upper is None:
            return f"Above {_pct(self.lower)}"
        return f"Between {_pct(self.lower)} & {_pct(self.upper)}"

    def __str__(self) -> str:
        left = "[" if self.nuisance else "("
        right = ")" if self.nuisance else "]"
        upper = "inf" if self.upper is None else f"{self.upper:g}"
        return f"{left}{self.lower:g}, {upper}{right}"


@dataclass(frozen=True, slots=True)
class BandRule:
    """Remap any rate inside ``band`` to ``new_rate``."""

    band: RateBand
    new_rate: float

    def __str__(self) -> str:
        return f"{self.band} -> {self.new_rate:g}"


@dataclass(frozen=True, slots=True)
class Elasticities:
    """Signed response parameters for the three trade-response steps.

    ``gamma_es`` drives substitution across exporters of one product and
    may be overridden per product code. ``gamma_ds`` scales the shift
    between imports and domestic output, ``epsilon_d`` the overall demand
    response; both default to 0 so those steps are exact no-ops.
    """

    gamma_es: float = -1.5
    gamma_ds: float = 0.0
    epsilon_d: float = 0.0
    gamma_es_overrides: Mapping[str, float] = field(default_factory=dict)

    def gamma_es_for(self, product_code: str) -> float:
        return self.gamma_es_overrides.get(product_code, self.gamma_es)


@dataclass(frozen=True, slots=True)
class Rates:
    """One line's effective rate set (fractions)."""

    statutory: float
    applied: float
    excise: float
    vat: float


def _check_rules_disjoint(rules: Iterable[BandRule]) -> None:
    rules = list(rules)
    for i, a in enumerate(rules):
        for b in rules[i + 1 :]:
            if a.band.overlaps(b.band):
                raise OverlappingBands(a, b)


@dataclass(frozen=True, slots=True)
class Scenario:
    """A named reform: band rules, optional targeting, and tax overrides."""

    name: str
    rules: tuple[BandRule, ...] = ()
    target_group: str | None = None
    rate_basis: str = "applied"
    remove_exemptions: bool = False
    vat_override: float | None = None
    excise_override: float | None = None
    elasticities: Elasticities = field(default_factory=Elasticities)

    def __post_init__(self) -> None:
        if self.rate_basis not in RATE_BASES:
            raise SchemaError(f"rate_basis must be one of {RATE_BASES}, got {self.rate_basis!r}")
        for rule in self.rules:
            _check_rule(rule)
        _check_rules_disjoint(self.rules)
        for name, value in (("vat_override", self.vat_override), ("excise_override", self.excise_override)):
            if value is not None and (not math.isfinite(value) or value < 0 or value > MAX_RATE):
                raise InvalidRate(f"{name} must be in [0, {MAX_RATE}], got {value}")
        for name in ("gamma_es", "gamma_ds", "epsilon_d"):
            if not math.isfinite(getattr(self.elasticities, name)):
                raise SchemaError(f"elasticities.{name} must be finite")


def _check_rule(rule: BandRule) -> None:
    band = rule.band
    if not math.isfinite(band.lower) or band.lower < 0:
        raise SchemaError(f"band lower bound must be a finite rate >= 0, got {band.lower}")
    if band.upper is not None and (not math.isfinite(band.upper) or band.upper <= band.lower):
        raise SchemaError(f"band upper bound must exceed lower bound, got {band}")
    if not math.isfinite(rule.new_rate) or rule.new_rate < 0 or rule.new_rate > MAX_RATE:
        raise InvalidRate(f"new_rate must be in [0, {MAX_RATE}], got {rule.new_rate}")


def classify_band(rate: float, rules: Iterable[BandRule]) -> BandRule | None:
    """Return the unique rule whose band contains ``rate``, else None."""
    for rule in rules:
        if rule.band.contains(rate):
            return rule
    return None


_TOP_KEYS = {
    "name",
    "rules",
    "target_group",
    "rate_basis",
    "remove_exemptions",
    "vat_override",
    "excise_override",
    "elasticities",
}
_RULE_KEYS = {"lower", "upper", "new_rate", "nuisance"}
_ELASTICITY_KEYS = {"gamma_es", "gamma_ds", "epsilon_d", "gamma_es_overrides"}


def _number(value: object, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path} must be a number, got {value!r}")
    return float(value)


def _parse_rule(obj: object, index: int) -> BandRule:
    path = f"rules[{index}]"
    if not isinstance(obj, dict):
        raise SchemaError(f"{path} must be an object")
    unknown = set(obj) - _RULE_KEYS
    if unknown:
        raise SchemaError(f"{path} has unknown keys {sorted(unknown)}")
    for required in ("lower", "new_rate"):
        if required not in obj:
            raise SchemaError(f"{path} is missing {required!r}")
    lower = _number(obj["lower"], f"{path}.lower")
    upper = None if obj.get("upper") is None else _number(obj["upper"], f"{path}.upper")
    nuisance = obj.get("nuisance", False)
    if not isinstance(nuisance, bool):
        raise SchemaError(f"{path}.nuisance must be a boolean")
    new_rate = _number(obj["new_rate"], f"{path}.new_rate")
    return BandRule(band=RateBand(lower=lower, upper=upper, nuisance=nuisance), new_rate=new_rate)


def _parse_elasticities(obj: object) -> Elasticities:
    if not isinstance(obj, dict):
        raise SchemaError("elasticities must be an object")
    unknown = set(obj) - _ELASTICITY_KEYS
    if unknown:
        raise SchemaError(f"elasticities has unknown keys {sorted(unknown)}")
    defaults = Elasticities()
    overrides_obj = obj.get("gamma_es_overrides", {})
    if not isinstance(overrides_obj, dict):
        raise SchemaError("elasticities.gamma_es_overrides must be an object")
    overrides = {
        str(code): _number(v, f"elasticities.gamma_es_overrides[{code!r}]")
        for code, v in overrides_obj.items()
    }
    return Elasticities(
        gamma_es=_number(obj.get("gamma_es", defaults.gamma_es), "elasticities.gamma_es"),
        gamma_ds=_number(obj.get("gamma_ds", defaults.gamma_ds), "elasticities.gamma_ds"),
        epsilon_d=_number(obj.get("epsilon_d", defaults.epsilon_d), "elasticities.epsilon_d"),
        gamma_es_overrides=overrides,
    )


def parse_scenario(source: bytes | str) -> Scenario:
    """Parse and fully validate a JSON scenario document.

    Schema: an object with ``name`` (required) and optional ``rules``
    (array of ``{lower, upper, new_rate, nuisance?}``, ``upper: null``
    meaning unbounded), ``target_group``, ``rate_basis`` (``applied`` or
    ``statutory``), ``remove_exemptions``, ``vat_override``,
    ``excise_override`` and ``elasticities`` (``{gamma_es, gamma_ds,
    epsilon_d, gamma_es_overrides?}``). Omitted fields take the documented
    defaults. Raises SchemaError, OverlappingBands or InvalidRate.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown scenario keys {sorted(unknown)}")
    if "name" not in doc or not isinstance(doc["name"], str) or not doc["name"].strip():
        raise SchemaError("scenario needs a nonempty string 'name'")

    rules_obj = doc.get("rules", [])
    if not isinstance(rules_obj, list):
        raise SchemaError("rules must be an array")
    rules = tuple(_parse_rule(r, i) for i, r in enumerate(rules_obj))

    target_group = doc.get("target_group")
    if target_group is not None and not isinstance(target_group, str):
        raise SchemaError("target_group must be a string or null")

    rate_basis = doc.get("rate_basis", "applied")
    if not isinstance(rate_basis, str):
        raise SchemaError("rate_basis must be a string")

    remove_exemptions = doc.get("remove_exemptions", False)
    if not isinstance(remove_exemptions, bool):
        raise SchemaError("remove_exemptions must be a boolean")

    overrides = {}
    for key in ("vat_override", "excise_override"):
        value = doc.get(key)
        overrides[key] = None if value is None else _number(value, key)

    elasticities = _parse_elasticities(doc.get("elasticities", {}))

    return Scenario(
        name=doc["name"].strip(),
        rules=rules,
        target_group=target_group,
        rate_basis=rate_basis,
        remove_exemptions=remove_exemptions,
        vat_override=overrides["vat_override"],
        excise_override=overrides["excise_override"],
        elasticities=elasticities,
    )


def _find_group(groups: Iterable[CountryGroup], name: str) -> CountryGroup:
    wanted = canonical_identifier(name)
    for group in groups:
        if canonical_identifier(group.name) == wanted:
            return group
    raise UnknownGroup(f"scenario targets group {name!r}, which is not defined")


def apply_rules(line: TradeLine, scenario: Scenario, groups: Iterable[CountryGroup] = ()) -> Rates:
    """Transform one line's rates under a scenario.

    Pure function of (line, scenario, groups). Lines outside the target
    group come back with bit-identical rates. Raises UnknownGroup when the
    scenario targets a group absent from ``groups``.
    """
    unchanged = Rates(
        statutory=line.statutory_tariff,
        applied=line.applied_tariff,
        excise=line.excise_rate,
        vat=line.vat_rate,
    )
    if scenario.target_group is not None:
        group = _find_group(groups, scenario.target_group)
        member_keys = {canonical_identifier(m) for m in group.members}
        if canonical_identifier(line.partner) not in member_keys:
            return unchanged

    if scenario.rate_basis == "applied":
        basis_old, other_old = line.applied_tariff, line.statutory_tariff
    else:
        basis_old, other_old = line.statutory_tariff, line.applied_tariff

    rule = classify_band(basis_old, scenario.rules)
    basis_new = rule.new_rate if rule is not None else basis_old
    if scenario.remove_exemptions:
        other_new = basis_new
    elif rule is None:
        other_new = other_old  # untouched band: exact passthrough
    else:
        ratio = other_old / basis_old if basis_old != 0 else 1.0
        other_new = basis_new * ratio

    if scenario.rate_basis == "applied":
        statutory, applied = other_new, basis_new
    else:
        statutory, applied = basis_new, other_new

    return Rates(
        statutory=statutory,
        applied=applied,
        excise=line.excise_rate if scenario.excise_override is None else scenario.excise_override,
        vat=line.vat_rate if scenario.vat_override is None else scenario.vat_override,
    )


__all__ = [
    "BandRule",
    "Elasticities",
    "RATE_BASES",
    "RateBand",
    "Rates",
    "Scenario",
    "apply_rules",
    "classify_band",
    "parse_scenario",
]
