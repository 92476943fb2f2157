import numpy as np
import pytest

from hdi.divergence import IndexFamily
from hdi.errors import HadamardUnavailable, InvalidParameter, NonBinaryOutcome, NotTwoPsuDesign, SingletonStratum
from hdi.grouped import WeightingScheme
from hdi.replication import (
    ReplicationConfig,
    bootstrap_design,
    brr_design,
    brr_order,
    brr_se,
    hadamard,
    null_simulation,
    overlap,
    rescaled_bootstrap_se,
    simulate_null_outcomes,
)
from hdi.survey import SEMethod, SurveyDataset, point_estimate, taylor_se
from hdi.synthetic import make_survey

PW, EW = WeightingScheme.POPULATION, WeightingScheme.EQUAL
SSRI = IndexFamily.STANDARDIZED_SRI
SRI = IndexFamily.SYMMETRIZED_RENYI


@pytest.fixture(scope="module")
def race_survey():
    return make_survey(records_per_psu=400, seed=1)


def _rel(a, b):
    return abs(a - b) / max(a, b)


# --- Hadamard matrices ------------------------------------------------------------


@pytest.mark.parametrize("order", [1, 2, 4, 8, 12, 16, 20, 24, 28, 36, 44, 48, 60, 64, 68, 76, 84])
def test_hadamard_is_orthogonal(order):
    H = hadamard(order)
    assert H.shape == (order, order)
    assert set(np.unique(H)) <= {-1, 1}
    assert np.array_equal(H @ H.T, order * np.eye(order, dtype=H.dtype))


def test_hadamard_unavailable_orders():
    for order in (3, 6, 52):
        with pytest.raises(HadamardUnavailable):
            hadamard(order)


def test_brr_order():
    assert brr_order(1) == 4
    assert brr_order(15) == 16
    assert brr_order(16) == 16
    assert brr_order(49) == 56  # 52 has no construction here


# --- BRR --------------------------------------------------------------------------


def test_brr_factors_are_balanced():
    d = make_survey(n_strata=15, records_per_psu=10, seed=2)
    des = brr_design(d)
    assert des.factors.shape == (16, 30)
    # each PSU is in the half-sample in exactly half of the replicates
    assert np.array_equal(des.factors.mean(axis=0), np.ones(30))
    # the two PSUs of a stratum are always complementary
    for s in range(15):
        a, b = np.flatnonzero(d.psu_stratum == s)
        assert np.array_equal(des.factors[:, a] + des.factors[:, b], np.full(16, 2.0))
    assert des.multiplier == pytest.approx(1 / 16)


def test_brr_fay_factors_and_multiplier():
    d = make_survey(n_strata=5, records_per_psu=10, seed=2)
    des = brr_design(d, ReplicationConfig(fay_coefficient=0.5))
    assert set(np.unique(des.factors)) == {0.5, 1.5}
    assert des.multiplier == pytest.approx(1 / (8 * 0.25))


def test_brr_constant_outcome_has_zero_se():
    d = make_survey(n_strata=6, records_per_psu=20, seed=3)
    d = d.replace(outcome=np.full(len(d), 0.3))
    est = brr_se(d, ReplicationConfig(), PW, SRI, 2.0)
    assert est.se == pytest.approx(0.0, abs=1e-14)
    assert est.method is SEMethod.BRR and est.replicates.shape == (8,)


def test_brr_needs_two_psus():
    d = make_survey(n_strata=3, psus_per_stratum=3, records_per_psu=20, seed=3)
    with pytest.raises(NotTwoPsuDesign):
        brr_se(d, ReplicationConfig(), PW, SRI, 2.0)


def test_brr_close_to_taylor_on_four_strata():
    d = make_survey(n_strata=4, records_per_psu=400, binary=False, seed=5)
    for a in (0.5, 1.0, 2.0):
        t = taylor_se(d, PW, SRI, a).se
        b = brr_se(d, ReplicationConfig(), PW, SRI, a).se
        assert _rel(t, b) < 0.20


def test_fay_and_plain_brr_agree_with_large_bootstrap(race_survey):
    boot = rescaled_bootstrap_se(race_survey, ReplicationConfig(n_reps=5000, rng_seed=9), PW, SSRI, 1.0).se
    for f in (0.0, 0.5):
        b = brr_se(race_survey, ReplicationConfig(fay_coefficient=f), PW, SSRI, 1.0).se
        assert 0.5 < b / boot < 2.0


# --- rescaled bootstrap ------------------------------------------------------------


def test_bootstrap_factors_sum_to_psu_count_per_stratum():
    d = make_survey(n_strata=4, psus_per_stratum=3, records_per_psu=5, seed=1)
    des = bootstrap_design(d, ReplicationConfig(n_reps=50, rng_seed=4))
    for s in range(4):
        cols = np.flatnonzero(d.psu_stratum == s)
        assert np.allclose(des.factors[:, cols].sum(axis=1), 3.0)
        # counts of C-1 draws rescaled by C/(C-1)
        assert set(np.unique(des.factors[:, cols])) <= {0.0, 1.5, 3.0}


def test_bootstrap_is_deterministic_and_order_free():
    d = make_survey(n_strata=5, records_per_psu=30, seed=1)
    a = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=40, rng_seed=7), PW, SSRI, 2.0)
    b = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=40, rng_seed=7), PW, SSRI, 2.0)
    assert a.replicates.tobytes() == b.replicates.tobytes()
    # replicate r uses its own stream, so a longer run extends a shorter one
    longer = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=80, rng_seed=7), PW, SSRI, 2.0)
    assert np.array_equal(longer.replicates[:40], a.replicates)
    other = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=40, rng_seed=8), PW, SSRI, 2.0)
    assert not np.array_equal(other.replicates, a.replicates)


def test_bootstrap_constant_outcome_has_zero_se():
    d = make_survey(n_strata=4, records_per_psu=20, seed=3)
    d = d.replace(outcome=np.full(len(d), 2.0))
    est = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=30), EW, SSRI, 4.0)
    assert est.se == pytest.approx(0.0, abs=1e-14)


def test_bootstrap_singleton_stratum():
    d = SurveyDataset(["a", "a", "b"], ["1", "2", "1"], [1, 1, 1], ["x", "y", "x"], [0.2, 0.4, 0.3])
    with pytest.raises(SingletonStratum):
        rescaled_bootstrap_se(d, ReplicationConfig(n_reps=5), PW, SRI, 2.0)


def test_bootstrap_close_to_taylor_on_race_survey(race_survey):
    cfg = ReplicationConfig(n_reps=2000, rng_seed=11)
    des = bootstrap_design(race_survey, cfg)
    stats = des.replicate_stats(race_survey)
    for a in (0.5, 1.0, 2.0):
        t = taylor_se(race_survey, PW, SSRI, a).se
        b = des.estimate(race_survey, PW, SSRI, a, stats=stats).se
        assert _rel(t, b) < 0.15


def test_taylor_close_to_bootstrap_on_srs_like_design():
    d = make_survey(records_per_psu=300, psu_effect_sd=0.0, weight_cv=0.0, sample_shares=None, seed=4)
    boot = rescaled_bootstrap_se(d, ReplicationConfig(n_reps=2000, rng_seed=3), PW, SRI, 1.0).se
    assert _rel(taylor_se(d, PW, SRI, 1.0).se, boot) < 0.15


def test_config_validation():
    with pytest.raises(InvalidParameter):
        ReplicationConfig(n_reps=0)
    with pytest.raises(InvalidParameter):
        ReplicationConfig(fay_coefficient=1.0)


# --- null simulation ---------------------------------------------------------------


def test_null_outcomes_keep_design_and_prevalence():
    d = make_survey(n_strata=6, records_per_psu=300, seed=2)
    n = simulate_null_outcomes(d, seed=5)
    assert np.array_equal(n.weight, d.weight) and np.array_equal(n.psu_code, d.psu_code)
    assert set(np.unique(n.outcome)) <= {0.0, 1.0}
    prev = np.dot(d.weight, d.outcome) / d.weight.sum()
    assert np.dot(n.weight, n.outcome) / n.weight.sum() == pytest.approx(prev, abs=0.02)


def test_null_simulation_needs_binary_outcomes():
    d = make_survey(n_strata=3, records_per_psu=10, binary=False, seed=2)
    with pytest.raises(NonBinaryOutcome):
        null_simulation(d, ReplicationConfig(n_reps=5), PW, SSRI, 1.0)


def test_null_simulation_deterministic_and_small():
    d = make_survey(n_strata=6, records_per_psu=300, seed=2)
    cfg = ReplicationConfig(n_reps=100, rng_seed=12)
    a = null_simulation(d, cfg, PW, SSRI, 1.0)
    b = null_simulation(d, cfg, PW, SSRI, 1.0)
    assert a.tobytes() == b.tobytes()
    assert np.mean(a) < point_estimate(d, PW, SSRI, 1.0)


def test_overlap_extremes():
    x = np.arange(10.0)
    assert overlap(x, x) == pytest.approx(1.0)
    assert overlap(x, x + 100) == 0.0
    assert overlap(x + 100, x) == 0.0
    # half the null draws above every observed draw, half below
    assert overlap(np.array([5.0]), np.array([0.0, 10.0])) == pytest.approx(1.0)
