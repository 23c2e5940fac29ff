"""Distribution-free testers for additivity and linearity of f: R^n -> R.

Query-based testers with one-sided error and O((1/eps) log(1/eps)) query
complexity, a multivariate-Gaussian divergence toolkit backing their
analysis checks, and a likelihood-ratio distinguishing game reproducing
the Omega(n) sample lower bound for sample-based testers.
"""

__version__ = "0.1.0"

from .gauss_core import (
    GaussianDist,
    empirical_tv,
    kl_gaussians,
    log_density,
    pinsker_tv_bound,
    sample_gaussian,
    shared_cov_tv_bound,
)
from .oracle import (
    ConstantShiftLinear,
    CorruptedLinear,
    CorruptionRegion,
    CustomOracle,
    EqPolicy,
    FunctionOracle,
    LinearOracle,
    NoisyLinear,
    NormOracle,
    estimate_distance,
)
from .distro import (
    Empirical,
    Mixture,
    SampleDistribution,
    ShiftedGaussian,
    StandardGaussian,
    load_empirical,
)
from .tester import (
    OddOracle,
    TesterConfig,
    Verdict,
    force_negativity,
    query_g,
    run_df_additivity,
    run_df_linearity,
    run_gaussian_additivity,
    scaling_index,
    test_additivity,
)
from .lower_bound import (
    GameReport,
    LowerBoundConfig,
    SampleMatrix,
    build_instance,
    derive_delta,
    run_distinguish_game,
    tv_bound,
)

__all__ = [
    "GaussianDist",
    "sample_gaussian",
    "kl_gaussians",
    "pinsker_tv_bound",
    "shared_cov_tv_bound",
    "empirical_tv",
    "log_density",
    "FunctionOracle",
    "LinearOracle",
    "ConstantShiftLinear",
    "CorruptedLinear",
    "CorruptionRegion",
    "NoisyLinear",
    "NormOracle",
    "CustomOracle",
    "EqPolicy",
    "estimate_distance",
    "SampleDistribution",
    "StandardGaussian",
    "ShiftedGaussian",
    "Mixture",
    "Empirical",
    "load_empirical",
    "TesterConfig",
    "Verdict",
    "OddOracle",
    "scaling_index",
    "test_additivity",
    "query_g",
    "run_gaussian_additivity",
    "run_df_additivity",
    "run_df_linearity",
    "force_negativity",
    "LowerBoundConfig",
    "SampleMatrix",
    "GameReport",
    "build_instance",
    "derive_delta",
    "tv_bound",
    "run_distinguish_game",
]
