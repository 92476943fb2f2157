"""Replication variance estimators and the no-disparity null simulation.

A replicate design is a matrix of PSU weight factors (replicates x PSUs)
plus a variance multiplier.  Replicate sufficient statistics are obtained by
multiplying the factor matrix into the per-PSU group totals, so evaluating
many (family, alpha) cells on one design is cheap.

Random streams are derived with ``numpy.random.SeedSequence`` from the
configured seed and a fixed spawn key per (replicate, stratum), drawn with
PCG64.  Results therefore do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard as sylvester_hadamard

from .errors import HadamardUnavailable, InvalidParameter, NonBinaryOutcome, NotTwoPsuDesign
from .grouped import ReferenceSpec
from .survey import (
    SEMethod,
    VarianceEstimate,
    _prepare_design,
    compute_sufficient_stats,
    index_from_stats,
)

# spawn-key tag for the null outcome stream; replicate streams use (r, s) keys
_NULL_STREAM = 0x6E756C6C


@dataclass(frozen=True)
class ReplicationConfig:
    n_reps: int = 500
    fay_coefficient: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.n_reps) < 1:
            raise InvalidParameter(f"n_reps must be >= 1, got {self.n_reps}")
        if not (0.0 <= self.fay_coefficient < 1.0):
            raise InvalidParameter(f"Fay coefficient must be in [0, 1), got {self.fay_coefficient}")
        if int(self.rng_seed) < 0:
            raise InvalidParameter("rng_seed must be a nonnegative integer")


# --- Hadamard matrices --------------------------------------------------------------


def _is_prime(q):
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    r = int(math.isqrt(q))
    return all(q % f for f in range(3, r + 1, 2))


def _jacobsthal(q):
    residues = np.zeros(q, dtype=int)
    residues[(np.arange(1, q) ** 2) % q] = 1
    chi = np.where(residues == 1, 1, -1)
    chi[0] = 0
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    return chi[idx]


def _paley_one(q):
    # q prime, q = 3 mod 4; order q + 1
    Q = _jacobsthal(q)
    S = np.zeros((q + 1, q + 1), dtype=int)
    S[0, 1:] = 1
    S[1:, 0] = -1
    S[1:, 1:] = Q
    return S + np.eye(q + 1, dtype=int)


def _paley_two(q):
    # q prime, q = 1 mod 4; order 2 (q + 1)
    Q = _jacobsthal(q)
    C = np.zeros((q + 1, q + 1), dtype=int)
    C[0, 1:] = 1
    C[1:, 0] = 1
    C[1:, 1:] = Q
    a = np.array([[1, 1], [1, -1]])
    b = np.array([[1, -1], [-1, -1]])
    return np.kron(C, a) + np.kron(np.eye(q + 1, dtype=int), b)


def hadamard(order):
    """A Hadamard matrix of the given order (entries +-1, ``H H^T = order I``).

    Built from Sylvester's construction, the two Paley constructions for
    prime ``q`` and Kronecker doubling.

    Raises
    ------
    HadamardUnavailable
        When none of those constructions reaches ``order``.
    """
    order = int(order)
    if order in (1, 2):
        return sylvester_hadamard(order)
    if order < 1 or order % 4:
        raise HadamardUnavailable(f"no Hadamard matrix of order {order}")
    if order & (order - 1) == 0:
        return sylvester_hadamard(order)
    q = order - 1
    if _is_prime(q) and q % 4 == 3:
        return _paley_one(q)
    q = order // 2 - 1
    if order % 2 == 0 and _is_prime(q) and q % 4 == 1:
        return _paley_two(q)
    try:
        return np.kron(sylvester_hadamard(2), hadamard(order // 2))
    except HadamardUnavailable:
        raise HadamardUnavailable(f"no construction available for a Hadamard matrix of order {order}")


def brr_order(n_strata):
    """Smallest constructible Hadamard order that is a multiple of 4 and >= ``n_strata``."""
    order = max(4, 4 * math.ceil(n_strata / 4))
    while True:
        try:
            hadamard(order)
            return order
        except HadamardUnavailable:
            order += 4


# --- replicate designs ------------------------------------------------------------


@dataclass
class ReplicateDesign:
    method: SEMethod
    factors: np.ndarray  # (R, n_psu)
    multiplier: float  # V = multiplier * sum_r (theta_r - theta_hat)^2

    def replicate_stats(self, d):
        a0, a1 = d.psu_group_totals()
        return self.factors @ a0, self.factors @ a1

    def estimate(self, d, scheme, family, alpha, reference=ReferenceSpec(), stats=None):
        if stats is None:
            stats = self.replicate_stats(d)
        u0r, u1r = stats
        full = compute_sufficient_stats(d)
        point = index_from_stats(full.labels, full.u0, full.u1, scheme, family, alpha, reference)
        reps = np.array(
            [
                index_from_stats(full.labels, u0r[r], u1r[r], scheme, family, alpha, reference)
                for r in range(u0r.shape[0])
            ]
        )
        v = self.multiplier * float(np.sum((reps - point) ** 2))
        return VarianceEstimate(point, math.sqrt(v), self.method, reps)


def brr_design(d, cfg=ReplicationConfig()):
    """Half-sample (optionally Fay-damped) replicate factors for a two-PSU-per-stratum design."""
    counts = d.psus_per_stratum()
    if np.any(counts != 2):
        bad = [d.strata[s] for s in np.flatnonzero(counts != 2)]
        raise NotTwoPsuDesign(
            f"BRR needs exactly 2 PSUs in every stratum; strata {', '.join(bad)} differ. "
            "Use the rescaled bootstrap instead."
        )
    n_strata = len(d.strata)
    order = brr_order(n_strata)
    H = hadamard(order)
    # make the first column constant; skipping it (when there is room) gives
    # every PSU the factor 2 - f in exactly half of the replicates
    H = H * H[:, :1]
    H = H[:, 1 : n_strata + 1] if order > n_strata else H[:, :n_strata]
    f = cfg.fay_coefficient
    first = np.zeros(d.n_psu, dtype=bool)
    for s in range(n_strata):
        # PSU codes are sorted within a stratum; the lower one is "first"
        first[np.flatnonzero(d.psu_stratum == s).min()] = True
    sign = H[:, d.psu_stratum] * np.where(first, 1, -1)[None, :]
    factors = np.where(sign > 0, 2.0 - f, f)
    return ReplicateDesign(SEMethod.BRR, factors, 1.0 / (order * (1.0 - f) ** 2))


def _stream(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def bootstrap_design(d, cfg=ReplicationConfig(), singleton="error"):
    """Rao-Wu rescaled bootstrap factors: ``C_s - 1`` PSUs drawn with replacement per stratum."""
    d = _prepare_design(d, singleton)
    R = int(cfg.n_reps)
    factors = np.zeros((R, d.n_psu))
    members = [np.flatnonzero(d.psu_stratum == s) for s in range(len(d.strata))]
    for r in range(R):
        for s, psus in enumerate(members):
            c = psus.size
            draws = _stream(cfg.rng_seed, r, s).integers(0, c, size=c - 1)
            factors[r, psus] = (c / (c - 1.0)) * np.bincount(draws, minlength=c)
    return ReplicateDesign(SEMethod.BOOTSTRAP, factors, 1.0 / R)


def brr_se(d, cfg, scheme, family, alpha, reference=ReferenceSpec()):
    return brr_design(d, cfg).estimate(d, scheme, family, alpha, reference)


def rescaled_bootstrap_se(d, cfg, scheme, family, alpha, reference=ReferenceSpec(), singleton="error"):
    d = _prepare_design(d, singleton)
    return bootstrap_design(d, cfg).estimate(d, scheme, family, alpha, reference)


# --- null simulation -----------------------------------------------------------------


def simulate_null_outcomes(d, seed):
    """Binary outcomes redrawn with the overall weighted prevalence as common probability."""
    if not d.is_binary():
        raise NonBinaryOutcome("the null simulation needs 0/1 outcomes")
    prevalence = float(np.dot(d.weight, d.outcome) / d.weight.sum())
    draws = _stream(seed, _NULL_STREAM).random(len(d)) < prevalence
    return d.replace(outcome=draws.astype(float))


def null_simulation(d, cfg, scheme, family, alpha, reference=ReferenceSpec(), singleton="error"):
    """Bootstrap replicate values of the index on data simulated under no disparities.

    Strata, PSUs and weights are kept; only outcomes are redrawn, so the
    disease shares match the population shares in expectation.
    """
    d = _prepare_design(d, singleton)
    null_data = simulate_null_outcomes(d, cfg.rng_seed)
    return bootstrap_design(null_data, cfg).estimate(null_data, scheme, family, alpha, reference).replicates


def overlap(observed, null):
    """Overlap of two replicate distributions, ``2 * min(A, 1 - A)``.

    ``A`` is the probability that a null draw is at least an observed draw
    (ties count half).  Identical distributions give 1 and fully separated
    ones give 0.
    """
    observed = np.sort(np.asarray(observed, dtype=float))
    null = np.asarray(null, dtype=float)
    below = np.searchsorted(observed, null, side="left")
    at_or_below = np.searchsorted(observed, null, side="right")
    a = float(np.sum(below + 0.5 * (at_or_below - below))) / (observed.size * null.size)
    return 2.0 * min(a, 1.0 - a)
