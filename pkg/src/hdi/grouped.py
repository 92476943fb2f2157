"""Between-group indices from group sizes and group means.

The Renyi and symmetrized Renyi families (and their standardized forms) use
closed forms written directly in terms of ``n_j`` and the group means; every
other family is evaluated by building the weighting masses ``p`` and the
burden masses ``q_j = p_j * ybar_j / reference`` and calling the generic
divergence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import divergence as dv
from .divergence import IndexFamily, LIMIT_TOL
from .errors import DimensionMismatch, InvalidParameter, NonFinite, ValidationError, ZeroMeanGroup


class WeightingScheme(str, enum.Enum):
    POPULATION = "pw"
    EQUAL = "ew"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower()
        aliases = {"population": cls.POPULATION, "equal": cls.EQUAL}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidParameter(f"unknown weighting scheme {text!r} (expected pw or ew)")


@dataclass(frozen=True)
class ReferenceSpec:
    """Denominator of the relative disparities ``r_j``.

    ``kind`` is ``"avg"`` (population average), ``"best"`` (least adverse
    group mean) or ``"target"`` (a fixed positive value).
    """

    kind: str = "avg"
    target: float | None = None

    def __post_init__(self):
        if self.kind not in ("avg", "best", "target"):
            raise InvalidParameter(f"unknown reference kind {self.kind!r}")
        if self.kind == "target":
            if self.target is None or not (self.target > 0 and math.isfinite(self.target)):
                raise InvalidParameter(f"fixed target must be a positive finite number, got {self.target}")

    @classmethod
    def average(cls):
        return cls("avg")

    @classmethod
    def least_adverse(cls):
        return cls("best")

    @classmethod
    def fixed(cls, t):
        return cls("target", float(t))

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text in ("avg", "average"):
            return cls.average()
        if text in ("best", "least-adverse", "min"):
            return cls.least_adverse()
        if text.startswith("target:"):
            try:
                return cls.fixed(float(text.split(":", 1)[1]))
            except ValueError:
                raise InvalidParameter(f"bad target reference {text!r}")
        raise InvalidParameter(f"unknown reference {text!r} (expected avg, best or target:<t>)")

    def __str__(self):
        return f"target:{self.target:.12g}" if self.kind == "target" else self.kind


@dataclass(frozen=True)
class GroupedSummary:
    group_labels: tuple
    sizes: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        labels = tuple(str(g) for g in self.group_labels)
        sizes = np.asarray(self.sizes, dtype=float).reshape(-1).copy()
        means = np.asarray(self.means, dtype=float).reshape(-1).copy()
        if not (len(labels) == sizes.size == means.size):
            raise DimensionMismatch(
                f"labels, sizes and means have lengths {len(labels)}, {sizes.size}, {means.size}"
            )
        if sizes.size < 2:
            raise ValidationError("at least 2 groups are required")
        if len(set(labels)) != len(labels):
            raise ValidationError("duplicate group label")
        if not (np.all(np.isfinite(sizes)) and np.all(np.isfinite(means))):
            raise NonFinite("sizes and means must be finite")
        if np.any(sizes <= 0):
            raise ValidationError("group sizes must be strictly positive")
        if np.any(means < 0):
            raise ValidationError("group means must be nonnegative")
        if not np.any(means > 0):
            raise ZeroMeanGroup("every group mean is zero")
        sizes.setflags(write=False)
        means.setflags(write=False)
        object.__setattr__(self, "group_labels", labels)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "means", means)

    @classmethod
    def from_stats(cls, labels, u0, u1):
        u0 = np.asarray(u0, dtype=float)
        return cls(labels, u0, np.asarray(u1, dtype=float) / u0)

    @property
    def m(self):
        return self.sizes.size

    @property
    def n(self):
        return float(self.sizes.sum())

    @property
    def overall_mean(self):
        return float(np.dot(self.sizes, self.means) / self.sizes.sum())

    def reference_value(self, reference):
        if reference.kind == "avg":
            return self.overall_mean
        if reference.kind == "best":
            return float(self.means[self.least_adverse_index()])
        return float(reference.target)

    def least_adverse_index(self):
        # np.argmin returns the first of tied minima
        return int(np.argmin(self.means))

    def least_adverse_label(self):
        return self.group_labels[self.least_adverse_index()]

    def weights(self, scheme):
        """Unnormalized group weights ``p`` for the scheme."""
        if WeightingScheme(scheme) is WeightingScheme.POPULATION:
            return self.sizes / self.sizes.sum()
        return np.full(self.m, 1.0 / self.m)

    def masses(self, scheme, reference=ReferenceSpec()):
        """``(p, q)`` with ``q_j = p_j * ybar_j / reference``."""
        ref = self.reference_value(reference)
        if ref <= 0:
            raise ZeroMeanGroup("reference value is zero (least adverse group has mean 0)")
        p = self.weights(scheme)
        return p, p * (self.means / ref)


# --- closed forms ---------------------------------------------------------------


def _centered_logs(g, scheme):
    """Logs of the normalized group weights and of the normalized burden shares."""
    if WeightingScheme(scheme) is WeightingScheme.POPULATION:
        w_raw = g.sizes
    else:
        w_raw = np.ones(g.m)
    total_w = w_raw.sum()
    burden = w_raw * g.means
    with np.errstate(divide="ignore"):
        log_w = np.log(w_raw) - math.log(total_w)
        log_v = np.log(burden) - math.log(burden.sum())
    return w_raw, total_w, log_w, log_v


def _require_positive_means(g, why):
    if np.any(g.means == 0):
        bad = [g.group_labels[i] for i in np.flatnonzero(g.means == 0)]
        raise ZeroMeanGroup(f"group(s) {', '.join(bad)} have mean 0; {why} needs log of the mean")


def _mld(g, scheme):
    _require_positive_means(g, "the alpha -> 1 limit")
    w_raw, total_w, _, _ = _centered_logs(g, scheme)
    ybar = float(np.dot(w_raw, g.means) / total_w)
    return float(-np.dot(w_raw, np.log(g.means)) / total_w + math.log(ybar))


def _theil(g, scheme):
    w_raw, total_w, _, _ = _centered_logs(g, scheme)
    ybar = float(np.dot(w_raw, g.means) / total_w)
    pos = g.means > 0
    s = float(np.dot(w_raw[pos] * g.means[pos], np.log(g.means[pos])))
    return s / (total_w * ybar) - math.log(ybar)


def _sti(g, scheme):
    _require_positive_means(g, "the symmetrized Theil limit")
    w_raw, total_w, _, _ = _centered_logs(g, scheme)
    ybar = float(np.dot(w_raw, g.means) / total_w)
    return float(np.dot(w_raw * (g.means - ybar), np.log(g.means)) / (2.0 * total_w * ybar))


def _log_moment_checked(log_w, log_v, e, g):
    try:
        return dv.log_moment(log_w, log_v, e)
    except dv.ZeroMassGroup:
        _require_positive_means(g, f"exponent {e:g}")
        raise


def between_group_ri(g, scheme, alpha):
    """Between-group Renyi index from sizes and means."""
    alpha = float(alpha)
    if abs(alpha - 1.0) < LIMIT_TOL:
        return max(_mld(g, scheme), 0.0)
    if abs(alpha) < LIMIT_TOL:
        return max(_theil(g, scheme), 0.0)
    _, _, log_w, log_v = _centered_logs(g, scheme)
    value = -_log_moment_checked(log_w, log_v, 1.0 - alpha, g) / (alpha * (1.0 - alpha))
    return max(value, 0.0)


def between_group_sri(g, scheme, alpha):
    """Between-group symmetrized Renyi index from sizes and means."""
    alpha = dv.canonical_alpha(float(alpha))
    if abs(alpha - 1.0) < LIMIT_TOL:
        return max(_sti(g, scheme), 0.0)
    _, _, log_w, log_v = _centered_logs(g, scheme)
    total = _log_moment_checked(log_w, log_v, 1.0 - alpha, g) + _log_moment_checked(
        log_w, log_v, alpha, g
    )
    return max(-total / (2.0 * alpha * (1.0 - alpha)), 0.0)


def between_group_index(g, scheme, family, alpha, reference=ReferenceSpec()):
    """Evaluate a between-group index on a grouped summary.

    Parameters
    ----------
    g : GroupedSummary
    scheme : WeightingScheme
        ``pw`` uses ``p_j = n_j / n``; ``ew`` uses ``p_j = 1 / m``.
    family : IndexFamily
    alpha : float
        Disparity-aversion parameter (``beta`` for the beta families).
    reference : ReferenceSpec
        Only matters for the families that are not reference invariant
        (``ge``, ``sge``, ``beta``).

    Returns
    -------
    float
    """
    family = IndexFamily(family)
    scheme = WeightingScheme(scheme)
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise NonFinite(f"parameter must be finite, got {alpha}")
    if family is IndexFamily.RENYI:
        return between_group_ri(g, scheme, alpha)
    if family is IndexFamily.SYMMETRIZED_RENYI:
        return between_group_sri(g, scheme, alpha)
    if family is IndexFamily.ATKINSON:
        if alpha <= 0:
            raise InvalidParameter(f"the Atkinson index needs alpha > 0, got {alpha}")
        return dv.atkinson_transform(between_group_ri(g, scheme, alpha), alpha)
    if family is IndexFamily.STANDARDIZED_SRI:
        return dv.symmetric_transform(between_group_sri(g, scheme, alpha), alpha)
    p, q = g.masses(scheme, reference)
    try:
        return dv.divergence(family, p, q, alpha)
    except dv.ZeroMassGroup as exc:
        if isinstance(exc, ZeroMeanGroup):
            raise
        raise ZeroMeanGroup(str(exc)) from exc


def generic_between_group_index(g, scheme, family, alpha, reference=ReferenceSpec()):
    """Same quantity as :func:`between_group_index`, always through the mass-function path."""
    p, q = g.masses(scheme, reference)
    return dv.divergence(family, p, q, alpha)


# Families whose value does not depend on the reference.
REFERENCE_INVARIANT = frozenset(
    {
        IndexFamily.RENYI,
        IndexFamily.SYMMETRIZED_RENYI,
        IndexFamily.REF_INVARIANT_SYM_GE,
        IndexFamily.SYMMETRIZED_BETA,
        IndexFamily.ATKINSON,
        IndexFamily.STANDARDIZED_SRI,
    }
)


def standardized_value(family, value, alpha):
    """Map an index value to ``[0, 1)`` where the family has a standard form.

    Directed Renyi values get the Atkinson transform (``alpha > 0`` only);
    symmetric families get the transform that is symmetric about ``1/2``.
    Already-standardized and unstandardizable families are returned as is.
    """
    family = IndexFamily(family)
    if family is IndexFamily.RENYI:
        return dv.atkinson_transform(value, alpha)
    if family in (IndexFamily.SYMMETRIZED_RENYI, IndexFamily.REF_INVARIANT_SYM_GE, IndexFamily.SYMMETRIZED_GE):
        return dv.symmetric_transform(value, alpha)
    return value
