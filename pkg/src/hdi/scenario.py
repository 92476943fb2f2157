"""What-if sweeps of standardized indices over scenarios and aversion values."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergence import IndexFamily
from .errors import DimensionMismatch, ValidationError, ZeroBaseline, ZeroMeanGroup
from .grouped import GroupedSummary, WeightingScheme, between_group_index, standardized_value

DEFAULT_GRID = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)
DEFAULT_FAMILIES = (IndexFamily.SYMMETRIZED_RENYI, IndexFamily.REF_INVARIANT_SYM_GE)

# thresholds for flagging an alpha where GE-type values collapse while SRI still separates
COLLAPSE_TOL = 1e-4
SEPARATION_TOL = 1e-3


@dataclass(frozen=True)
class Scenario:
    name: str
    sizes: tuple
    rates: tuple
    groups: tuple | None = None

    def __post_init__(self):
        sizes = tuple(float(x) for x in self.sizes)
        rates = tuple(float(x) for x in self.rates)
        if len(sizes) != len(rates):
            raise DimensionMismatch(f"scenario {self.name!r}: {len(sizes)} sizes but {len(rates)} rates")
        if len(sizes) < 2:
            raise ValidationError(f"scenario {self.name!r} needs at least 2 groups")
        if any(s <= 0 for s in sizes):
            raise ValidationError(f"scenario {self.name!r}: sizes must be positive")
        if any(not (0.0 <= r <= 1.0) for r in rates):
            raise ValidationError(f"scenario {self.name!r}: rates must lie in [0, 1]")
        if self.groups is not None:
            groups = tuple(str(g) for g in self.groups)
            if len(groups) != len(rates):
                raise DimensionMismatch(f"scenario {self.name!r}: {len(groups)} labels for {len(rates)} groups")
            object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "rates", rates)

    def summary(self):
        if any(r == 0 for r in self.rates):
            raise ZeroMeanGroup(f"scenario {self.name!r} has a group rate of 0")
        labels = self.groups or tuple(f"g{k + 1}" for k in range(len(self.rates)))
        return GroupedSummary(labels, self.sizes, self.rates)


@dataclass(frozen=True)
class SweepCell:
    scenario: str
    family: IndexFamily
    scheme: WeightingScheme
    alpha: float
    value: float
    abs_change: float
    rel_change: float | None


@dataclass
class SweepResult:
    alpha_grid: tuple
    baseline: str
    scenarios: tuple
    families: tuple
    scheme: WeightingScheme
    cells: list = field(default_factory=list)

    def get(self, scenario, family, alpha):
        family = IndexFamily(family)
        for c in self.cells:
            if c.scenario == scenario and c.family is family and c.alpha == alpha:
                return c
        raise KeyError((scenario, family, alpha))

    def values(self, scenario, family):
        family = IndexFamily(family)
        return np.array([self.get(scenario, family, a).value for a in self.alpha_grid])

    def relative_change(self, scenario, family, alpha):
        cell = self.get(scenario, family, alpha)
        if cell.rel_change is None:
            raise ZeroBaseline(f"baseline value is 0 for {IndexFamily(family).value} at alpha={alpha}")
        return cell.rel_change


def run_sweep(baseline, scenarios, grid=DEFAULT_GRID, families=DEFAULT_FAMILIES, scheme=WeightingScheme.POPULATION):
    """Evaluate standardized indices for the baseline and each scenario over ``grid``.

    Every cell carries the change from the baseline value; the relative
    change is ``None`` where the baseline value is zero.
    """
    scheme = WeightingScheme(scheme)
    families = tuple(IndexFamily(f) for f in families)
    grid = tuple(float(a) for a in grid)
    everything = [baseline] + [s for s in scenarios if s is not baseline]
    names = [s.name for s in everything]
    if len(set(names)) != len(names):
        raise ValidationError("scenario names must be unique")
    m = len(baseline.rates)
    for s in everything:
        if len(s.rates) != m:
            raise DimensionMismatch(f"scenario {s.name!r} has {len(s.rates)} groups, baseline has {m}")

    result = SweepResult(grid, baseline.name, tuple(names), families, scheme)
    base_vals = {}
    summaries = {s.name: s.summary() for s in everything}
    for s in everything:
        for fam in families:
            for a in grid:
                raw = between_group_index(summaries[s.name], scheme, fam, a)
                v = standardized_value(fam, raw, a)
                if s is baseline:
                    base_vals[fam, a] = v
                b = base_vals[fam, a]
                rel = (v - b) / b if b != 0 else None
                result.cells.append(SweepCell(s.name, fam, scheme, a, v, v - b, rel))
    return result


@dataclass(frozen=True)
class DiscriminationReport:
    # (family, alpha) -> max - min of the standardized values across scenarios
    spread: dict
    # alphas where a GE-type family collapses (< COLLAPSE_TOL) while the SRI separates (> SEPARATION_TOL)
    flagged_alphas: tuple


_SRI_LIKE = (IndexFamily.SYMMETRIZED_RENYI, IndexFamily.STANDARDIZED_SRI)
_GE_LIKE = (IndexFamily.REF_INVARIANT_SYM_GE, IndexFamily.SYMMETRIZED_GE)


def discrimination_report(result):
    spread = {}
    for fam in result.families:
        for a in result.alpha_grid:
            vals = [result.get(s, fam, a).value for s in result.scenarios]
            spread[fam, a] = float(max(vals) - min(vals))
    flagged = []
    for a in result.alpha_grid:
        sri = [spread[f, a] for f in result.families if f in _SRI_LIKE]
        ge = [spread[f, a] for f in result.families if f in _GE_LIKE]
        if sri and ge and min(ge) < COLLAPSE_TOL and max(sri) > SEPARATION_TOL:
            flagged.append(a)
    return DiscriminationReport(spread, tuple(flagged))


EXAMPLE_GROUPS = ("A", "B", "C", "D")
EXAMPLE_SIZES = (0.25, 0.25, 0.25, 0.25)
EXAMPLE_BASELINE = Scenario("baseline", EXAMPLE_SIZES, (0.5, 0.4, 0.3, 0.1), EXAMPLE_GROUPS)
EXAMPLE_SCENARIOS = (
    Scenario("scenario1", EXAMPLE_SIZES, (0.5, 0.3, 0.3, 0.1), EXAMPLE_GROUPS),
    Scenario("scenario2", EXAMPLE_SIZES, (0.4, 0.4, 0.3, 0.1), EXAMPLE_GROUPS),
    Scenario("scenario3", EXAMPLE_SIZES, (0.5, 0.4, 0.4, 0.1), EXAMPLE_GROUPS),
)
