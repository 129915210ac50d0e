"""
Bayesian Quantile Regression - 잠재변수 기반 이상치 진단

ALD(asymmetric Laplace) location-scale mixture Gibbs sampler:
- β | v, σ  → 다변량 정규
- σ | β, v  → 역감마
- v_i | β, σ → GIG(ν = 1/2)

진단:
- 잠재변수 v_i 사후분포 비교로 이상치 확률 P(O_i = 1)
- KDE + 사다리꼴 적분으로 Kullback-Leibler divergence
"""

from bqr.common.ald import AldParams, MixtureConstants, QuantileLevel
from bqr.common.gibbs import Dataset, PosteriorChains, run_gibbs, summarize_chains
from bqr.common.outliers import OutlierReport, build_report
from bqr.config.fit_config import FitConfig, KdeSpec, PriorSpec, ScenarioSpec

__version__ = "0.1.0"

__all__ = [
    "AldParams",
    "Dataset",
    "FitConfig",
    "KdeSpec",
    "MixtureConstants",
    "OutlierReport",
    "PosteriorChains",
    "PriorSpec",
    "QuantileLevel",
    "ScenarioSpec",
    "build_report",
    "run_gibbs",
    "summarize_chains",
]
