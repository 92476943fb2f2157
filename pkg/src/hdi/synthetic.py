"""Synthetic stratified cluster samples for examples, tests and benchmarks."""

import numpy as np

from .survey import SurveyDataset

# Prevalence (proportion) of moderate or severe periodontitis by race/ethnicity,
# US adults aged 45-74, 2001-04: White, Black, Mexican-American, Other.
RACE_ETHNICITY_GROUPS = ("white", "black", "mexican", "other")
RACE_ETHNICITY_PREVALENCE = (0.105, 0.221, 0.181, 0.203)
RACE_ETHNICITY_SHARES = (0.72, 0.11, 0.07, 0.10)
# sample composition with minority oversampling, as in NHANES
RACE_ETHNICITY_SAMPLE_SHARES = (0.45, 0.22, 0.23, 0.10)


def make_survey(
    n_strata=15,
    psus_per_stratum=2,
    records_per_psu=200,
    groups=RACE_ETHNICITY_GROUPS,
    prevalence=RACE_ETHNICITY_PREVALENCE,
    shares=RACE_ETHNICITY_SHARES,
    sample_shares=RACE_ETHNICITY_SAMPLE_SHARES,
    psu_effect_sd=0.15,
    weight_cv=0.4,
    binary=True,
    seed=0,
):
    """Draw a synthetic survey with known group prevalences.

    Sampled group membership follows ``sample_shares``; weights carry the
    factor ``shares / sample_shares`` so weighted group sizes estimate the
    population ``shares`` (pass ``sample_shares=None`` for proportional
    allocation).  The outcome probability of a record is its group
    prevalence times a lognormal PSU effect, which induces clustering.
    Weights also get lognormal noise with coefficient of variation
    ``weight_cv``.  With ``binary=False`` outcomes are gamma
    distributed with the given group means.
    """
    rng = np.random.default_rng(seed)
    groups = tuple(groups)
    prevalence = np.asarray(prevalence, dtype=float)
    shares = np.asarray(shares, dtype=float) / np.sum(shares)
    if sample_shares is None:
        sample_shares = shares
    sample_shares = np.asarray(sample_shares, dtype=float) / np.sum(sample_shares)
    n_psu = n_strata * psus_per_stratum
    n = n_psu * records_per_psu

    stratum = np.repeat(np.arange(n_strata), psus_per_stratum * records_per_psu)
    psu = np.tile(np.repeat(np.arange(psus_per_stratum), records_per_psu), n_strata)
    psu_flat = stratum * psus_per_stratum + psu
    effect = np.exp(psu_effect_sd * rng.standard_normal(n_psu) - psu_effect_sd**2 / 2)
    group_code = rng.choice(len(groups), size=n, p=sample_shares)
    mean = np.clip(prevalence[group_code] * effect[psu_flat], 0.0, 1.0)
    if binary:
        outcome = (rng.random(n) < mean).astype(float)
    else:
        outcome = rng.gamma(4.0, mean / 4.0)
    sigma2 = np.log1p(weight_cv**2)
    noise = np.exp(np.sqrt(sigma2) * rng.standard_normal(n) - sigma2 / 2)
    weight = noise * (shares / sample_shares)[group_code] * 1000.0
    return SurveyDataset(
        [f"s{s:02d}" for s in stratum],
        [f"p{c}" for c in psu],
        weight,
        np.asarray(groups, dtype=object)[group_code],
        outcome,
        groups=groups,
    )
