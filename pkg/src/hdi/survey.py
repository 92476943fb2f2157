"""Survey microdata, sufficient statistics and Taylor-linearization variances."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .divergence import LIMIT_TOL, IndexFamily, canonical_alpha
from .divergence import logsumexp as _logsumexp
from .errors import (
    DimensionMismatch,
    EmptyGroup,
    InvalidParameter,
    NonFinite,
    SingletonStratum,
    ValidationError,
    ZeroMeanGroup,
)
from .grouped import GroupedSummary, ReferenceSpec, WeightingScheme, between_group_index


class SEMethod(str, enum.Enum):
    TAYLOR = "taylor"
    BRR = "brr"
    BOOTSTRAP = "boot"


@dataclass(frozen=True)
class SurveyRecord:
    stratum: object
    psu: object
    weight: float
    group: object
    outcome: float


@dataclass(frozen=True)
class VarianceEstimate:
    point: float
    se: float
    method: SEMethod
    replicates: np.ndarray | None = None

    def __post_init__(self):
        if self.se < 0 or math.isnan(self.se):
            raise ValidationError(f"standard error must be nonnegative, got {self.se}")
        is_rep = SEMethod(self.method) is not SEMethod.TAYLOR
        if is_rep != (self.replicates is not None):
            raise ValidationError("replicates are present exactly for replication methods")


class SurveyDataset:
    """Individual records of a stratified multistage sample.

    Columns are held as parallel numpy arrays.  PSU identifiers are nested
    within strata, so ``(stratum, psu)`` identifies a first-stage unit.
    ``groups`` fixes the group order; by default it is the order of first
    appearance in the records.
    """

    def __init__(self, stratum, psu, weight, group, outcome, groups=None):
        self.stratum = np.asarray([str(s) for s in stratum], dtype=object)
        self.psu = np.asarray([str(c) for c in psu], dtype=object)
        self.weight = np.asarray(weight, dtype=float).reshape(-1)
        self.group = np.asarray([str(g) for g in group], dtype=object)
        self.outcome = np.asarray(outcome, dtype=float).reshape(-1)
        n = self.weight.size
        if not (self.stratum.size == self.psu.size == self.group.size == self.outcome.size == n):
            raise DimensionMismatch("survey columns have different lengths")
        if n == 0:
            raise ValidationError("survey dataset is empty")
        if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.outcome))):
            raise NonFinite("weights and outcomes must be finite")
        if np.any(self.weight <= 0):
            raise ValidationError("sampling weights must be positive")
        if np.any(self.outcome < 0):
            raise ValidationError("outcomes must be nonnegative")

        if groups is None:
            _, first = np.unique(self.group, return_index=True)
            groups = tuple(self.group[np.sort(first)])
        self.groups = tuple(str(g) for g in groups)
        lookup = {g: k for k, g in enumerate(self.groups)}
        try:
            self.group_code = np.fromiter((lookup[g] for g in self.group), dtype=np.intp, count=n)
        except KeyError as exc:
            raise ValidationError(f"record group {exc.args[0]!r} is not a declared group")

        strata, self.stratum_code = np.unique(self.stratum, return_inverse=True)
        self.strata = tuple(strata)
        keys = np.char.add(np.char.add(self.stratum.astype(str), "\x1f"), self.psu.astype(str))
        psu_keys, self.psu_code = np.unique(keys, return_inverse=True)
        self.n_psu = psu_keys.size
        self.psu_stratum = np.empty(self.n_psu, dtype=np.intp)
        self.psu_stratum[self.psu_code] = self.stratum_code

    @classmethod
    def from_records(cls, records, groups=None):
        records = list(records)
        return cls(
            [r.stratum for r in records],
            [r.psu for r in records],
            [r.weight for r in records],
            [r.group for r in records],
            [r.outcome for r in records],
            groups=groups,
        )

    def __len__(self):
        return self.weight.size

    @property
    def m(self):
        return len(self.groups)

    @property
    def design(self):
        """Mapping stratum -> sorted tuple of PSU identifiers."""
        out = {}
        for s, c in zip(self.stratum, self.psu):
            out.setdefault(s, set()).add(c)
        return {s: tuple(sorted(v)) for s, v in sorted(out.items())}

    def psus_per_stratum(self):
        return np.bincount(self.psu_stratum, minlength=len(self.strata))

    def replace(self, *, stratum=None, weight=None, outcome=None):
        return SurveyDataset(
            self.stratum if stratum is None else stratum,
            self.psu,
            self.weight if weight is None else weight,
            self.group,
            self.outcome if outcome is None else outcome,
            groups=self.groups,
        )

    def is_binary(self):
        return bool(np.all((self.outcome == 0) | (self.outcome == 1)))

    def psu_group_totals(self):
        """``(A0, A1)``, each ``n_psu x m``: per-PSU weighted group sizes and outcome totals."""
        flat = self.psu_code * self.m + self.group_code
        size = self.n_psu * self.m
        a0 = np.bincount(flat, weights=self.weight, minlength=size).reshape(self.n_psu, self.m)
        a1 = np.bincount(flat, weights=self.weight * self.outcome, minlength=size).reshape(
            self.n_psu, self.m
        )
        return a0, a1


def collapse_singleton_strata(d):
    """Merge every one-PSU stratum into the next stratum in sorted order (the previous one for the last)."""
    counts = d.psus_per_stratum()
    if np.all(counts >= 2):
        return d
    if len(d.strata) < 2:
        raise SingletonStratum("cannot collapse: the design has a single stratum")
    target = list(range(len(d.strata)))
    for s, c in enumerate(counts):
        if c == 1:
            target[s] = s + 1 if s + 1 < len(d.strata) else s - 1
    # follow chains of consecutive singletons
    for s in range(len(target)):
        seen = set()
        while counts[target[s]] == 1 and target[s] != s and target[s] not in seen:
            seen.add(target[s])
            target[s] = target[target[s]]
    labels = np.asarray([d.strata[t] for t in target], dtype=object)
    return d.replace(stratum=labels[d.stratum_code])


@dataclass(frozen=True)
class SufficientStats:
    labels: tuple
    u0: np.ndarray
    u1: np.ndarray

    @property
    def n(self):
        return float(self.u0.sum())

    @property
    def y_tot(self):
        return float(self.u1.sum())

    @property
    def means(self):
        return self.u1 / self.u0

    @property
    def overall_mean(self):
        return self.y_tot / self.n

    def to_grouped(self):
        return GroupedSummary(self.labels, self.u0, self.means)


def compute_sufficient_stats(d):
    """Weighted group sizes ``U0_j`` and weighted outcome totals ``U1_j``."""
    u0 = np.bincount(d.group_code, weights=d.weight, minlength=d.m)
    u1 = np.bincount(d.group_code, weights=d.weight * d.outcome, minlength=d.m)
    empty = np.flatnonzero(np.bincount(d.group_code, minlength=d.m) == 0)
    if empty.size:
        raise EmptyGroup(f"declared group(s) with no records: {', '.join(d.groups[k] for k in empty)}")
    return SufficientStats(d.groups, u0, u1)


def index_from_stats(labels, u0, u1, scheme, family, alpha, reference=ReferenceSpec()):
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 <= 0):
        raise EmptyGroup("a group has zero total weight")
    g = GroupedSummary(labels, u0, np.asarray(u1, dtype=float) / u0)
    return between_group_index(g, scheme, family, alpha, reference)


def point_estimate(d, scheme, family, alpha, reference=ReferenceSpec()):
    st = compute_sufficient_stats(d)
    return index_from_stats(st.labels, st.u0, st.u1, scheme, family, alpha, reference)


# --- partial derivatives ------------------------------------------------------


def _ri_partials_pw(u0, u1, alpha):
    n = u0.sum()
    ybar = u1 / u0
    yall = u1.sum() / n
    log_y = np.log(ybar)
    if abs(alpha - 1.0) < LIMIT_TOL:
        d0 = (np.dot(u0, log_y) - n * log_y) / n**2
        d1 = (1.0 - yall / ybar) / (n * yall)
        return d0, d1
    if abs(alpha) < LIMIT_TOL:
        d0 = (1.0 - ybar / yall) / n
        d1 = -(np.dot(u1, log_y) - u1.sum() * log_y) / (n * yall) ** 2
        return d0, d1
    log_s = _logsumexp(np.log(u0) + (1.0 - alpha) * log_y)
    d0 = (1.0 / n - np.exp((1.0 - alpha) * log_y - log_s)) / (1.0 - alpha)
    d1 = (1.0 / (n * yall) - np.exp(-alpha * log_y - log_s)) / alpha
    return d0, d1


def _ri_partials_ew(u0, u1, alpha):
    m = u0.size
    ybar = u1 / u0
    sum_y = ybar.sum()
    log_y = np.log(ybar)
    if abs(alpha - 1.0) < LIMIT_TOL:
        d1 = (ybar / sum_y - 1.0 / m) / u1
    elif abs(alpha) < LIMIT_TOL:
        d1 = (log_y - np.dot(ybar, log_y) / sum_y) / (u0 * sum_y)
    else:
        log_s = _logsumexp((1.0 - alpha) * log_y)
        d1 = (ybar / sum_y - np.exp((1.0 - alpha) * log_y - log_s)) / (alpha * u1)
    return -ybar * d1, d1


def ri_partials(u0, u1, scheme, alpha):
    """Gradient of the between-group Renyi index with respect to ``(U0_k, U1_k)``."""
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    if np.any(u1 <= 0):
        raise ZeroMeanGroup("linearization needs every group mean > 0")
    if WeightingScheme(scheme) is WeightingScheme.POPULATION:
        return _ri_partials_pw(u0, u1, float(alpha))
    return _ri_partials_ew(u0, u1, float(alpha))


def sri_partials(u0, u1, scheme, alpha):
    alpha = canonical_alpha(float(alpha))
    if abs(alpha - 1.0) < LIMIT_TOL:
        a, b = 1.0, 0.0
    else:
        a, b = alpha, 1.0 - alpha
    d0a, d1a = ri_partials(u0, u1, scheme, a)
    d0b, d1b = ri_partials(u0, u1, scheme, b)
    return 0.5 * (d0a + d0b), 0.5 * (d1a + d1b)


def _numeric_partials(labels, u0, u1, scheme, family, alpha, reference, rel_step=1e-5):
    def f(a0, a1):
        return index_from_stats(labels, a0, a1, scheme, family, alpha, reference)

    m = u0.size
    d0, d1 = np.empty(m), np.empty(m)
    for k in range(m):
        for arr, out in ((u0, d0), (u1, d1)):
            h = rel_step * (arr[k] if arr[k] > 0 else max(arr.max(), 1.0))
            up, dn = arr.copy(), arr.copy()
            up[k] += h
            if arr[k] - h >= 0:
                dn[k] -= h
                width = 2 * h
            else:
                width = h
            a0u, a1u = (up, u1) if arr is u0 else (u0, up)
            a0d, a1d = (dn, u1) if arr is u0 else (u0, dn)
            out[k] = (f(a0u, a1u) - f(a0d, a1d)) / width
    return d0, d1


def index_partials(stats, scheme, family, alpha, reference=ReferenceSpec()):
    """``(dI/dU0_k, dI/dU1_k)`` for any index family.

    Renyi, symmetrized Renyi and their standardized forms use analytic
    derivatives (including the limiting branches); the remaining families
    fall back to central differences on the sufficient statistics.
    """
    family = IndexFamily(family)
    u0, u1 = stats.u0, stats.u1
    alpha = float(alpha)
    if family is IndexFamily.RENYI:
        return ri_partials(u0, u1, scheme, alpha)
    if family is IndexFamily.SYMMETRIZED_RENYI:
        return sri_partials(u0, u1, scheme, alpha)
    if family is IndexFamily.ATKINSON:
        ri = index_from_stats(stats.labels, u0, u1, scheme, IndexFamily.RENYI, alpha)
        d0, d1 = ri_partials(u0, u1, scheme, alpha)
        c = alpha * math.exp(-alpha * ri)
        return c * d0, c * d1
    if family is IndexFamily.STANDARDIZED_SRI:
        sri = index_from_stats(stats.labels, u0, u1, scheme, IndexFamily.SYMMETRIZED_RENYI, alpha)
        d0, d1 = sri_partials(u0, u1, scheme, alpha)
        weight = alpha if alpha >= 0.5 else 1.0 - alpha
        c = weight * math.exp(-weight * sri)
        return c * d0, c * d1
    return _numeric_partials(stats.labels, u0, u1, scheme, family, alpha, reference)


def linearization_scores(d, scheme, family, alpha, reference=ReferenceSpec()):
    """Per-record score variable ``w_i (dI/dU0_k + y_i dI/dU1_k)`` for the record's group ``k``."""
    st = compute_sufficient_stats(d)
    d0, d1 = index_partials(st, scheme, family, alpha, reference)
    k = d.group_code
    return d.weight * (d0[k] + d.outcome * d1[k])


def _prepare_design(d, singleton):
    if singleton == "collapse":
        return collapse_singleton_strata(d)
    if singleton != "error":
        raise InvalidParameter(f"singleton must be 'error' or 'collapse', got {singleton!r}")
    counts = d.psus_per_stratum()
    bad = [d.strata[s] for s in np.flatnonzero(counts < 2)]
    if bad:
        raise SingletonStratum(
            f"stratum/strata {', '.join(map(str, bad))} have a single PSU; "
            "use singleton='collapse' to merge them with an adjacent stratum"
        )
    return d


def total_variance(d, z):
    """Stratified with-replacement variance of the weighted total of ``z``.

    ``V = sum_s C_s/(C_s-1) sum_c (z_cs - zbar_s)^2`` with ``z_cs`` the PSU
    sums of ``z``.
    """
    psu_tot = np.bincount(d.psu_code, weights=z, minlength=d.n_psu)
    counts = np.bincount(d.psu_stratum, minlength=len(d.strata)).astype(float)
    if np.any(counts < 2):
        raise SingletonStratum("every stratum needs at least 2 PSUs")
    strat_mean = np.bincount(d.psu_stratum, weights=psu_tot) / counts
    dev2 = (psu_tot - strat_mean[d.psu_stratum]) ** 2
    ss = np.bincount(d.psu_stratum, weights=dev2, minlength=len(d.strata))
    return float(np.sum(counts / (counts - 1.0) * ss))


def taylor_se(d, scheme, family, alpha, reference=ReferenceSpec(), singleton="error"):
    """Linearization standard error of a between-group index."""
    d = _prepare_design(d, singleton)
    point = point_estimate(d, scheme, family, alpha, reference)
    z = linearization_scores(d, scheme, family, alpha, reference)
    v = total_variance(d, z)
    return VarianceEstimate(point, math.sqrt(max(v, 0.0)), SEMethod.TAYLOR)
