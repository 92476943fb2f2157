"""Reference-invariant health disparity indices with design-based standard errors."""

from .divergence import (
    IndexFamily,
    MassFunction,
    alpha_divergence,
    atkinson_index,
    beta_divergence,
    kl_divergences,
    renyi_divergence,
    standardized_sri,
    symmetrized_beta,
    symmetrized_renyi,
)
from .errors import HDIError
from .grouped import GroupedSummary, ReferenceSpec, WeightingScheme, between_group_index
from .replication import ReplicationConfig, brr_se, null_simulation, overlap, rescaled_bootstrap_se
from .scenario import Scenario, discrimination_report, run_sweep
from .survey import SurveyDataset, VarianceEstimate, compute_sufficient_stats, taylor_se

__version__ = "0.1.0"
