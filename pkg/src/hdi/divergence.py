"""Divergences between nonnegative mass functions.

All functions accept plain sequences or :class:`MassFunction` objects and
return Python floats.  Masses need not sum to one.  Parameter values within
``LIMIT_TOL`` of the poles 0 and 1 are evaluated with the closed-form limits
(Kullback-Leibler, Itakura-Saito) instead of the ratio forms, which lose all
precision there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NonFinite,
    ValidationError,
    ZeroMassGroup,
)

LIMIT_TOL = 1e-6

# expm1 is replaced by exp(log w + t) - w above this exponent to avoid overflow
_EXPM1_CUTOFF = 30.0


class IndexFamily(str, enum.Enum):
    """Index families, valued by their CLI spelling."""

    RENYI = "ri"
    SYMMETRIZED_RENYI = "sri"
    GENERALIZED_ENTROPY = "ge"
    SYMMETRIZED_GE = "sge"
    REF_INVARIANT_SYM_GE = "risge"
    BETA = "beta"
    SYMMETRIZED_BETA = "sbeta"
    ATKINSON = "atkinson"
    STANDARDIZED_SRI = "ssri"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower()
        aliases = {
            "renyi": cls.RENYI,
            "symmetrized_renyi": cls.SYMMETRIZED_RENYI,
            "sa": cls.STANDARDIZED_SRI,
            "standardized_sri": cls.STANDARDIZED_SRI,
            "ref_invariant_sym_ge": cls.REF_INVARIANT_SYM_GE,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise InvalidParameter(f"unknown index family {text!r} (expected one of {names})")


@dataclass(frozen=True)
class MassFunction:
    """Nonnegative masses over ``m >= 2`` groups, at least one positive."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if v.size < 2:
            raise ValidationError(f"a mass function needs at least 2 groups, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise NonFinite("mass function contains non-finite values")
        if np.any(v < 0):
            raise ValidationError("mass function contains negative values")
        if not np.any(v > 0):
            raise ValidationError("mass function has no positive entry")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def total(self):
        return float(self.values.sum())

    def normalized(self):
        return self.values / self.values.sum()


def as_mass(x):
    return x if isinstance(x, MassFunction) else MassFunction(x)


def _pair(p, q):
    p, q = as_mass(p), as_mass(q)
    if len(p) != len(q):
        raise DimensionMismatch(f"mass functions have lengths {len(p)} and {len(q)}")
    return p, q


def _check_alpha(alpha):
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise NonFinite(f"parameter must be finite, got {alpha}")
    return alpha


def _near(alpha, pole):
    return abs(alpha - pole) < LIMIT_TOL


def canonical_alpha(alpha):
    """Representative of ``{alpha, 1 - alpha}`` used by symmetrized indices.

    Evaluating both members of the pair from the same float keeps the
    limit-branch choice, and so the value, exactly symmetric about 1/2.
    """
    return alpha if alpha >= 0.5 else 1.0 - alpha


def logsumexp(x):
    """Max-shifted ``ln sum exp(x)``; ``-inf`` for an empty or all ``-inf`` input."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -math.inf
    top = float(np.max(x))
    if not math.isfinite(top):
        return top
    return top + math.log(float(np.sum(np.exp(x - top))))


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _finite(value, what):
    if not math.isfinite(value):
        raise NonFinite(f"{what} evaluated to {value}")
    return value


# --- log-moment primitive -----------------------------------------------------


def log_moment(log_w, log_v, e):
    """``ln sum_j w_j**(1-e) * v_j**e`` for two probability vectors.

    Parameters
    ----------
    log_w, log_v : ndarray
        Logs of two probability vectors (each summing to one); ``-inf``
        marks a zero mass.
    e : float
        Exponent.

    Returns
    -------
    float
        The log of the mixed power sum.  The result is zero when ``w == v``
        and is computed relative to 1 (``log1p`` of an ``expm1`` sum) when
        close to it, so values of order ``e * (1 - e)`` keep full relative
        precision.  Far from zero it is a shifted log-sum-exp, which is
        overflow-free for large ``|e|``.

    Raises
    ------
    ZeroMassGroup
        When a zero mass is raised to a negative power.
    """
    log_w = np.asarray(log_w, dtype=float)
    log_v = np.asarray(log_v, dtype=float)
    zw = np.isneginf(log_w)
    zv = np.isneginf(log_v)
    if not (zw.any() or zv.any()):
        return _log_moment_positive(log_w, log_v, e)
    keep = ~(zw & zv)
    zw, zv, log_w, log_v = zw[keep], zv[keep], log_w[keep], log_v[keep]

    only_w_zero = zw & ~zv
    only_v_zero = zv & ~zw
    if only_w_zero.any() and 1.0 - e < 0:
        raise ZeroMassGroup("zero mass in the first distribution raised to a negative power")
    if only_v_zero.any() and e < 0:
        raise ZeroMassGroup("zero mass in the second distribution raised to a negative power")

    fin = ~(zw | zv)
    # terms contributed by zero-mass entries: 0 unless the exponent on the zero is 0
    zero_terms_w = np.exp(log_v[only_w_zero]) if e == 1.0 else np.zeros(0)
    zero_terms_v = np.exp(log_w[only_v_zero]) if e == 0.0 else np.zeros(0)

    x = (1.0 - e) * log_w[fin] + e * log_v[fin]
    all_terms = np.concatenate([x, _log(zero_terms_w), _log(zero_terms_v)])
    s = logsumexp(all_terms)
    if not math.isfinite(s) or abs(s) >= 0.5:
        return s

    # sum of terms minus one, written as deviations from the base weights
    if e >= 0.5:
        base, t = log_v[fin], (1.0 - e) * (log_w[fin] - log_v[fin])
        missing = np.exp(log_v[only_w_zero]).sum() - zero_terms_w.sum()
        missing += -zero_terms_v.sum()
    else:
        base, t = log_w[fin], e * (log_v[fin] - log_w[fin])
        missing = np.exp(log_w[only_v_zero]).sum() - zero_terms_v.sum()
        missing += -zero_terms_w.sum()
    big = t > _EXPM1_CUTOFF
    dev = np.where(big, np.exp(base + np.where(big, t, 0.0)) - np.exp(base),
                   np.exp(base) * np.expm1(np.where(big, 0.0, t)))
    return float(math.log1p(float(np.sum(dev)) - missing))


def _log_moment_positive(log_w, log_v, e):
    # log_moment without zero masses; this is the hot path of the closed forms
    x = (1.0 - e) * log_w + e * log_v
    top = float(x.max())
    s = top + math.log(float(np.exp(x - top).sum()))
    if abs(s) >= 0.5:
        return s
    if e >= 0.5:
        base, t = log_v, (1.0 - e) * (log_w - log_v)
    else:
        base, t = log_w, e * (log_v - log_w)
    big = t > _EXPM1_CUTOFF
    if big.any():
        dev = np.where(big, np.exp(base + np.where(big, t, 0.0)) - np.exp(base),
                       np.exp(base) * np.expm1(np.where(big, 0.0, t)))
    else:
        dev = np.exp(base) * np.expm1(t)
    return math.log1p(float(dev.sum()))


def _normalized_logs(p, q):
    pbar, qbar = p.normalized(), q.normalized()
    return pbar, qbar, _log(pbar), _log(qbar)


# --- generalized Renyi ----------------------------------------------------------


def _renyi_limit_one(pbar, qbar, lp, lq):
    # sum p log(p/q); undefined where q = 0 < p
    if np.any((qbar == 0) & (pbar > 0)):
        raise ZeroMassGroup("log ratio undefined: zero disease mass in a group with positive weight")
    m = pbar > 0
    return float(np.sum(pbar[m] * (lp[m] - lq[m])))


def _renyi_limit_zero(pbar, qbar, lp, lq):
    if np.any((pbar == 0) & (qbar > 0)):
        raise ZeroMassGroup("log ratio undefined: positive disease mass in a group with zero weight")
    m = qbar > 0
    return float(np.sum(qbar[m] * (lq[m] - lp[m])))


def _renyi_normalized(pbar, qbar, lp, lq, alpha):
    if _near(alpha, 1.0):
        return _renyi_limit_one(pbar, qbar, lp, lq)
    if _near(alpha, 0.0):
        return _renyi_limit_zero(pbar, qbar, lp, lq)
    return -log_moment(lp, lq, 1.0 - alpha) / (alpha * (1.0 - alpha))


def renyi_divergence(p, q, alpha):
    """Generalized Renyi (alpha-gamma) divergence ``R_alpha(p || q)``.

    Invariant to rescaling of either argument.  At ``alpha = 1`` this is the
    mean log deviation ``-sum p_j ln r_j`` and at ``alpha = 0`` the Theil
    index ``sum p_j r_j ln r_j`` (normalized masses, ``r = q/p``).
    """
    p, q = _pair(p, q)
    alpha = _check_alpha(alpha)
    value = _renyi_normalized(*_normalized_logs(p, q), alpha)
    return max(_finite(value, "Renyi divergence"), 0.0)


def symmetrized_renyi(p, q, alpha):
    """Average of ``R_alpha`` and ``R_{1-alpha}``; half of Jeffreys' divergence at the poles."""
    p, q = _pair(p, q)
    alpha = canonical_alpha(_check_alpha(alpha))
    pbar, qbar, lp, lq = _normalized_logs(p, q)
    if _near(alpha, 1.0):
        value = 0.5 * (_renyi_limit_one(pbar, qbar, lp, lq) + _renyi_limit_zero(pbar, qbar, lp, lq))
    else:
        value = -(log_moment(lp, lq, 1.0 - alpha) + log_moment(lp, lq, alpha)) / (
            2.0 * alpha * (1.0 - alpha)
        )
    return max(_finite(value, "symmetrized Renyi divergence"), 0.0)


def atkinson_transform(value, alpha):
    """``1 - exp(-alpha * value)`` for ``alpha > 0``."""
    if alpha <= 0:
        raise InvalidParameter(f"the Atkinson standardization needs alpha > 0, got {alpha}")
    return float(-math.expm1(-alpha * value))


def symmetric_transform(value, alpha):
    """Standardization that keeps symmetry about ``alpha = 1/2``.

    Uses ``alpha`` as the aversion weight for ``alpha >= 1/2`` and ``1 - alpha``
    below it.  For ``alpha < 0`` the literal piecewise rule is applied.
    """
    weight = alpha if alpha >= 0.5 else 1.0 - alpha
    return float(-math.expm1(-weight * value))


def atkinson_index(p, q, alpha):
    """Atkinson-type standardization ``1 - exp(-alpha R_alpha)``, in ``[0, 1)``."""
    alpha = _check_alpha(alpha)
    if alpha <= 0:
        raise InvalidParameter(f"the Atkinson index needs alpha > 0, got {alpha}")
    return atkinson_transform(renyi_divergence(p, q, alpha), alpha)


def standardized_sri(p, q, alpha):
    alpha = _check_alpha(alpha)
    return symmetric_transform(symmetrized_renyi(p, q, alpha), alpha)


# --- Kullback-Leibler, alpha and beta divergences --------------------------------


def kl_divergences(p, q):
    """Return ``(KL(p || q), KL(q || p))`` in the general (unnormalized) form.

    ``KL(p || q) = sum p_j (r_j - 1 - ln r_j)`` and
    ``KL(q || p) = sum p_j (1 - r_j + r_j ln r_j)`` with ``r = q / p``.
    """
    p, q = _pair(p, q)
    pv, qv = p.values, q.values
    if np.any(pv == 0):
        raise ZeroMassGroup("KL divergences need every p_j > 0")
    if np.any(qv == 0):
        raise ZeroMassGroup("KL(p || q) is undefined when some q_j = 0")
    u = np.log(qv) - np.log(pv)
    kl_pq = float(np.sum(pv * (np.expm1(u) - u)))
    kl_qp = float(np.sum(pv * (u * np.exp(u) - np.expm1(u))))
    return kl_pq, kl_qp


def itakura_saito(p, q):
    """``IS(p || q) = sum (r_j - 1 - ln r_j)``."""
    p, q = _pair(p, q)
    if np.any(p.values == 0) or np.any(q.values == 0):
        raise ZeroMassGroup("Itakura-Saito divergence needs strictly positive masses")
    u = np.log(q.values) - np.log(p.values)
    return float(np.sum(np.expm1(u) - u))


def _bracket(u, a):
    """``[a + (1-a) e^u - e^{(1-a) u}] / (a (1-a))`` evaluated without cancellation."""
    if _near(a, 1.0):
        return np.expm1(u) - u
    if _near(a, 0.0):
        return u * np.exp(u) - np.expm1(u)
    if a >= 0.5:
        return np.expm1(u) / a - np.expm1((1.0 - a) * u) / (a * (1.0 - a))
    return (-np.expm1(u) - np.exp(u) * np.expm1(-a * u) / a) / (1.0 - a)


def _alpha_divergence_values(pv, qv, alpha):
    both = (pv > 0) & (qv > 0)
    q_only = (pv == 0) & (qv > 0)
    p_only = (pv > 0) & (qv == 0)
    total = 0.0
    if p_only.any():
        if alpha >= 1.0 - LIMIT_TOL:
            raise ZeroMassGroup("alpha divergence undefined: q_j = 0 with alpha >= 1")
        total += float(np.sum(pv[p_only])) / (1.0 - alpha if not _near(alpha, 0.0) else 1.0)
    if q_only.any():
        if alpha <= LIMIT_TOL:
            raise ZeroMassGroup("alpha divergence undefined: p_j = 0 with alpha <= 0")
        total += float(np.sum(qv[q_only])) / (alpha if not _near(alpha, 1.0) else 1.0)
    u = np.log(qv[both]) - np.log(pv[both])
    total += float(np.sum(pv[both] * _bracket(u, alpha)))
    return total


def alpha_divergence(p, q, alpha):
    """Alpha divergence ``D_alpha(p || q)`` on the raw (unnormalized) masses.

    Positively homogeneous, ``D(cp || cq) = c D(p || q)``, but not scale
    invariant.  The poles give ``KL(p || q)`` (``alpha = 1``) and
    ``KL(q || p)`` (``alpha = 0``).
    """
    p, q = _pair(p, q)
    alpha = _check_alpha(alpha)
    value = _alpha_divergence_values(p.values, q.values, alpha)
    return max(_finite(value, "alpha divergence"), 0.0)


def symmetrized_ge(p, q, alpha):
    """``(D_alpha(p || q) + D_{1-alpha}(p || q)) / 2`` on raw masses."""
    p, q = _pair(p, q)
    alpha = canonical_alpha(_check_alpha(alpha))
    value = 0.5 * (
        _alpha_divergence_values(p.values, q.values, alpha)
        + _alpha_divergence_values(p.values, q.values, 1.0 - alpha)
    )
    return max(_finite(value, "symmetrized GE index"), 0.0)


def ref_invariant_sym_ge(p, q, alpha):
    """Symmetrized GE index on the normalized masses; reference invariant."""
    p, q = _pair(p, q)
    return symmetrized_ge(p.normalized(), q.normalized(), alpha)


def beta_divergence(p, q, beta):
    """Beta (Bregman) divergence ``B_beta(p || q)``.

    ``beta -> 0`` gives ``KL(q || p)``; ``beta -> 1`` gives Itakura-Saito.
    """
    p, q = _pair(p, q)
    beta = _check_alpha(beta)
    pv, qv = p.values, q.values
    if np.any(pv == 0):
        raise ZeroMassGroup("beta divergence needs every p_j > 0")
    pos = qv > 0
    total = 0.0
    if not pos.all():
        if beta >= 1.0 - LIMIT_TOL:
            raise ZeroMassGroup("beta divergence undefined: q_j = 0 with beta >= 1")
        denom = 1.0 if _near(beta, 0.0) else 1.0 - beta
        total += float(np.sum(pv[~pos] ** (1.0 - beta))) / denom
    u = np.log(qv[pos]) - np.log(pv[pos])
    weight = pv[pos] ** (1.0 - beta) if not _near(beta, 1.0) else np.ones(u.size)
    total += float(np.sum(weight * _bracket(u, beta)))
    return max(_finite(total, "beta divergence"), 0.0)


def symmetrized_beta(p, q, beta):
    """Symmetrized reference-invariant beta divergence ``SB_beta(pbar, qbar)``.

    Equal to ``[B_beta(pbar || qbar) + B_beta(qbar || pbar)] / 2``.
    """
    p, q = _pair(p, q)
    beta = _check_alpha(beta)
    if beta == 0.0:
        raise InvalidParameter("symmetrized beta divergence is undefined at beta = 0; use the KL limit")
    pbar, qbar = p.normalized(), q.normalized()
    if np.any(pbar == 0) or np.any(qbar == 0):
        raise ZeroMassGroup("symmetrized beta divergence needs strictly positive normalized masses")
    u = np.log(qbar) - np.log(pbar)
    terms = pbar ** (1.0 - beta) * np.expm1(u) * (-np.expm1(-beta * u)) / (2.0 * beta)
    return max(_finite(float(np.sum(terms)), "symmetrized beta divergence"), 0.0)


_DISPATCH = {
    IndexFamily.RENYI: renyi_divergence,
    IndexFamily.SYMMETRIZED_RENYI: symmetrized_renyi,
    IndexFamily.GENERALIZED_ENTROPY: alpha_divergence,
    IndexFamily.SYMMETRIZED_GE: symmetrized_ge,
    IndexFamily.REF_INVARIANT_SYM_GE: ref_invariant_sym_ge,
    IndexFamily.BETA: beta_divergence,
    IndexFamily.SYMMETRIZED_BETA: symmetrized_beta,
    IndexFamily.ATKINSON: atkinson_index,
    IndexFamily.STANDARDIZED_SRI: standardized_sri,
}


def divergence(family, p, q, alpha):
    """Evaluate ``family`` on the mass pair ``(p, q)``."""
    return _DISPATCH[IndexFamily(family)](p, q, alpha)
