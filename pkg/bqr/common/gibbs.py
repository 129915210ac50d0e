"""
Gibbs Sampler - ALD location-scale mixture 기반 Bayesian quantile regression

모형: y_i = x_i'β + θv_i + ψ√(σv_i)·z_i,  v_i ~ Exponential(mean σ)
사전분포: β ~ N(b₀, B₀), σ ~ IG(a, b)

Sweep 순서 (고정): v-block → β-block → σ-block
- v_i | β, σ ~ GIG(1/2, δ_i², ζ²)
- β | v, σ  ~ N(m, (B₀⁻¹ + Σ x_i x_i'/(ψ²σv_i))⁻¹)
- σ | β, v  ~ IG(a + 3n/2, b + Σ(y_i − x_i'β − θv_i)²/(2ψ²v_i) + Σv_i)
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.linalg import LinAlgError, cho_solve, cholesky

from bqr.common.ald import MixtureConstants, QuantileLevel, as_quantile
from bqr.common.rng import (
    GigHalfParams,
    RngStream,
    sample_gig_half,
    sample_inverse_gamma,
    sample_mvn_precision,
)
from bqr.config.fit_config import FitConfig
from bqr.errors import DataIngestError, FactorizationError
from bqr.utils.logging import BQRLogger
from bqr.utils.validation import numerical_rank

logger = BQRLogger("gibbs")

FloatArray = npt.NDArray[np.float64]

# 초기 v_i, σ 하한
INITIAL_FLOOR = 0.01


# =============================================================================
# Domain Types
# =============================================================================


@dataclass(frozen=True)
class Dataset:
    """응답 벡터 + 설계행렬 (+ 주입된 이상치 행 인덱스)"""

    y: FloatArray
    X: FloatArray
    column_names: list[str]
    targets: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float).reshape(-1)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DataIngestError(f"Design matrix must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DataIngestError(
                f"Response has {y.shape[0]} rows but design has {X.shape[0]}"
            )
        if len(self.column_names) != X.shape[1]:
            raise DataIngestError(
                f"{len(self.column_names)} column names for {X.shape[1]} columns"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", list(self.column_names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def validate(self) -> "Dataset":
        """n ≥ p ≥ 1, 유한값, full column rank 검증"""
        if self.p < 1:
            raise DataIngestError("Design matrix has no columns")
        if self.n < self.p:
            raise DataIngestError(f"n={self.n} rows is fewer than p={self.p} columns")
        if not np.all(np.isfinite(self.y)):
            row = int(np.flatnonzero(~np.isfinite(self.y))[0])
            raise DataIngestError("Response contains NaN or infinity", row=row)
        bad = ~np.isfinite(self.X)
        if np.any(bad):
            row, col = (int(i) for i in np.argwhere(bad)[0])
            raise DataIngestError(
                "Design contains NaN or infinity", row=row, column=self.column_names[col]
            )
        rank = numerical_rank(self.X)
        if rank < self.p:
            raise DataIngestError(
                f"Design matrix is rank deficient (rank {rank} < p={self.p}; "
                f"columns {self.column_names})"
            )
        return self

    def with_rows(
        self, y_rows: FloatArray, X_rows: FloatArray, targets: dict[str, int]
    ) -> "Dataset":
        """행 추가 (대상 인덱스 병합)"""
        return Dataset(
            y=np.concatenate([self.y, np.asarray(y_rows, dtype=float)]),
            X=np.vstack([self.X, np.asarray(X_rows, dtype=float)]),
            column_names=self.column_names,
            targets={**self.targets, **targets},
        )


@dataclass(frozen=True)
class PosteriorChains:
    """burn-in/thinning 이후 보존된 draw (생성 후 읽기 전용)"""

    beta: FloatArray
    sigma: FloatArray
    v: FloatArray
    tau: QuantileLevel
    column_names: list[str]
    config: FitConfig | None = None

    def __post_init__(self) -> None:
        for name in ("beta", "sigma", "v"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.beta.ndim != 2 or self.v.ndim != 2 or self.sigma.ndim != 1:
            raise ValueError("beta and v must be M×k matrices, sigma a length-M vector")
        if not (self.beta.shape[0] == self.sigma.shape[0] == self.v.shape[0]):
            raise ValueError("all chains must hold the same number of draws")

    @property
    def M(self) -> int:
        return self.sigma.shape[0]

    @property
    def n(self) -> int:
        return self.v.shape[1]

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    def beta_mean(self) -> FloatArray:
        return self.beta.mean(axis=0)

    def to_frame(self) -> pd.DataFrame:
        """draw 행렬 DataFrame (draw, β..., sigma, v_0..v_{n-1})"""
        frame = pd.DataFrame(self.beta, columns=self.column_names)
        frame.insert(0, "draw", np.arange(self.M))
        frame["sigma"] = self.sigma
        latent = pd.DataFrame(self.v, columns=[f"v_{i}" for i in range(self.n)])
        return pd.concat([frame, latent], axis=1)


class BetaConditional(NamedTuple):
    """β full conditional 정규분포 파라미터"""

    mean: FloatArray
    covariance: FloatArray


# =============================================================================
# Full conditionals
# =============================================================================


def _beta_precision(
    X: FloatArray,
    y: FloatArray,
    v: FloatArray,
    sigma: float,
    constants: MixtureConstants,
    prior_precision: FloatArray,
    prior_shift: FloatArray,
) -> tuple[FloatArray, FloatArray]:
    """
    β full conditional의 precision Cholesky factor와 평균

    Returns:
        (L lower factor of precision, mean)

    Raises:
        FactorizationError: precision이 수치적으로 양정치가 아닐 때
    """
    w = 1.0 / (constants.psi2 * sigma * v)
    precision = prior_precision + X.T @ (w[:, None] * X)
    rhs = prior_shift + X.T @ (w * (y - constants.theta * v))
    try:
        L = cholesky(precision, lower=True)
    except LinAlgError as e:
        raise FactorizationError(
            "Beta full-conditional precision is not positive definite",
            v_range=(float(np.min(v)), float(np.max(v))),
        ) from e
    return L, cho_solve((L, True), rhs)


def _prior_terms(config: FitConfig, p: int) -> tuple[FloatArray, FloatArray]:
    """(B₀⁻¹, B₀⁻¹b₀)"""
    b0, B0 = config.prior.resolve(p)
    factor = cholesky(B0, lower=True)
    prior_precision = cho_solve((factor, True), np.eye(p))
    return prior_precision, prior_precision @ b0


def full_conditional_beta(
    data: Dataset, v: FloatArray, sigma: float, config: FitConfig
) -> BetaConditional:
    """
    β | v, σ 정규 full conditional

    Args:
        data: 데이터셋
        v: 잠재변수 (> 0)
        sigma: 척도 (> 0)
        config: 적합 설정 (τ, 사전분포)

    Returns:
        BetaConditional(mean, covariance)
    """
    constants = config.quantile.constants
    prior_precision, prior_shift = _prior_terms(config, data.p)
    L, mean = _beta_precision(
        data.X, data.y, np.asarray(v, dtype=float), sigma, constants,
        prior_precision, prior_shift,
    )
    covariance = cho_solve((L, True), np.eye(data.p))
    return BetaConditional(mean=mean, covariance=covariance)


def full_conditional_sigma_params(
    data: Dataset, beta: FloatArray, v: FloatArray, config: FitConfig
) -> tuple[float, float]:
    """
    σ | β, v 역감마 full conditional 파라미터

    Returns:
        (shape = a + 3n/2, rate = b + Σ(r_i − θv_i)²/(2ψ²v_i) + Σv_i)
    """
    constants = config.quantile.constants
    return _sigma_params(
        data.X, data.y, np.asarray(beta, dtype=float), np.asarray(v, dtype=float),
        constants, config.prior.sigma_shape, config.prior.sigma_rate,
    )


def _sigma_params(
    X: FloatArray,
    y: FloatArray,
    beta: FloatArray,
    v: FloatArray,
    constants: MixtureConstants,
    prior_shape: float,
    prior_rate: float,
) -> tuple[float, float]:
    n = y.shape[0]
    if n == 0:
        return prior_shape, prior_rate
    resid = y - X @ beta - constants.theta * v
    shape = prior_shape + 1.5 * n
    rate = prior_rate + float(np.sum(resid**2 / (2.0 * constants.psi2 * v))) + float(
        np.sum(v)
    )
    return shape, rate


def full_conditional_v_params(
    y_i: float | FloatArray,
    x_i: FloatArray,
    beta: FloatArray,
    sigma: float,
    tau: QuantileLevel | float,
) -> GigHalfParams:
    """
    v_i | β, σ GIG(ν = 1/2) 파라미터

    δ_i² = (y_i − x_i'β)²/(ψ²σ),  ζ² = 2/σ + θ²/(ψ²σ)

    y_i/x_i에 전체 벡터/행렬을 주면 δ²가 관측치별 배열로 반환된다.
    """
    constants = as_quantile(tau).constants
    resid = np.asarray(y_i, dtype=float) - np.asarray(x_i, dtype=float) @ np.asarray(
        beta, dtype=float
    )
    delta2 = resid**2 / (constants.psi2 * sigma)
    zeta2 = 2.0 / sigma + constants.theta**2 / (constants.psi2 * sigma)
    return GigHalfParams(delta2=delta2 if np.ndim(delta2) else float(delta2), zeta2=zeta2)


# =============================================================================
# Sampler
# =============================================================================


def initial_state(data: Dataset) -> tuple[FloatArray, float, FloatArray]:
    """
    최소제곱 기반 초기값

    β⁽⁰⁾ = LS 해, σ⁽⁰⁾ = mean|r|, v⁽⁰⁾_i = max(|r_i|, 0.01)
    """
    beta0, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    abs_resid = np.abs(data.y - data.X @ beta0)
    sigma0 = max(float(abs_resid.mean()), INITIAL_FLOOR)
    v0 = np.maximum(abs_resid, INITIAL_FLOOR)
    return beta0, sigma0, v0


def run_gibbs(data: Dataset, config: FitConfig) -> PosteriorChains:
    """
    3-block Gibbs sampler 실행

    Args:
        data: 검증된 데이터셋
        config: 체인 길이, burn-in, thinning, seed, 사전분포

    Returns:
        PosteriorChains (M = (iterations − burn_in) // thin)

    Raises:
        FactorizationError: β precision 분해 실패 (sweep 인덱스 포함)
    """
    data.validate()
    start_time = time.time()
    tau = config.quantile
    constants = tau.constants
    rng = RngStream(seed=config.seed, stream_id=config.stream_id)
    X, y = data.X, data.y
    n, p = data.n, data.p

    logger.log_fit_start(tau.tau, n, p, config.iterations)

    prior_precision, prior_shift = _prior_terms(config, p)
    zeta2_scale = 2.0 + constants.theta**2 / constants.psi2

    M = config.retained
    beta_draws = np.empty((M, p))
    sigma_draws = np.empty(M)
    v_draws = np.empty((M, n))

    beta, sigma, v = initial_state(data)
    kept = 0
    for sweep in range(config.iterations):
        # v-block
        resid = y - X @ beta
        gig = GigHalfParams(
            delta2=resid**2 / (constants.psi2 * sigma), zeta2=zeta2_scale / sigma
        )
        v = sample_gig_half(gig, rng)

        # β-block
        try:
            L, mean = _beta_precision(
                X, y, v, sigma, constants, prior_precision, prior_shift
            )
        except FactorizationError as e:
            raise e.at_sweep(sweep) from e
        beta = sample_mvn_precision(mean, L, rng)

        # σ-block
        shape, rate = _sigma_params(
            X, y, beta, v, constants, config.prior.sigma_shape, config.prior.sigma_rate
        )
        sigma = sample_inverse_gamma(shape, rate, rng)

        offset = sweep - config.burn_in + 1
        if offset > 0 and offset % config.thin == 0 and kept < M:
            beta_draws[kept] = beta
            sigma_draws[kept] = sigma
            v_draws[kept] = v
            kept += 1

    chains = PosteriorChains(
        beta=beta_draws,
        sigma=sigma_draws,
        v=v_draws,
        tau=tau,
        column_names=data.column_names,
        config=config,
    )
    logger.log_fit_complete(
        tau.tau, chains.M, round(time.time() - start_time, 3), float(sigma_draws.mean())
    )
    return chains


def fit_taus(
    data: Dataset,
    config: FitConfig,
    taus: list[float],
    workers: int = 1,
) -> dict[float, PosteriorChains]:
    """
    여러 τ에 대해 적합 (τ별 독립 substream, 결과는 τ 순서)

    k번째 τ는 stream_id = config.stream_id + k 를 사용하므로
    worker 수와 완료 순서에 관계없이 결과가 같다.
    """
    configs = [
        config.for_tau(tau, stream_id=config.stream_id + k) for k, tau in enumerate(taus)
    ]
    data.validate()
    if workers <= 1 or len(configs) == 1:
        results = [run_gibbs(data, c) for c in configs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: run_gibbs(data, c), configs))
    return dict(zip(taus, results, strict=True))


# =============================================================================
# Summaries
# =============================================================================


def credible_summary(draws: FloatArray, credible_level: float = 0.95) -> FloatArray:
    """
    draw별 (mean, median, lower, upper): 등꼬리 구간, type-7 분위수

    Args:
        draws: (M,) 또는 (M, k)
        credible_level: 신용수준 (0, 1)

    Returns:
        (k, 4) 배열 (1차원 입력이면 (4,))
    """
    if not 0.0 < credible_level < 1.0:
        raise ValueError(f"credible_level must lie in (0, 1), got {credible_level}")
    arr = np.asarray(draws, dtype=float)
    if arr.shape[0] == 0:
        raise ValueError("cannot summarise an empty chain")
    alpha = (1.0 - credible_level) / 2.0
    lower, median, upper = np.quantile(
        arr, [alpha, 0.5, 1.0 - alpha], axis=0, method="linear"
    )
    return np.stack([arr.mean(axis=0), median, lower, upper], axis=-1)


def summarize_chains(
    chains: PosteriorChains, credible_level: float = 0.95
) -> pd.DataFrame:
    """
    파라미터별 사후 요약

    Returns:
        columns: tau, parameter, mean, median, lower, upper
        (β 계수들 + sigma)
    """
    stacked = np.column_stack([chains.beta, chains.sigma])
    summary = credible_summary(stacked, credible_level)
    frame = pd.DataFrame(summary, columns=["mean", "median", "lower", "upper"])
    frame.insert(0, "parameter", [*chains.column_names, "sigma"])
    frame.insert(0, "tau", chains.tau.tau)
    return frame


def sigma_curve(
    chains_by_tau: dict[float, PosteriorChains], credible_level: float = 0.95
) -> pd.DataFrame:
    """
    τ별 σ 사후 요약 (σ-vs-τ 곡선)

    Returns:
        columns: tau, mean, median, lower, upper
    """
    rows = []
    for tau, chains in sorted(chains_by_tau.items()):
        mean, median, lower, upper = credible_summary(chains.sigma, credible_level)
        rows.append(
            {"tau": tau, "mean": mean, "median": median, "lower": lower, "upper": upper}
        )
    return pd.DataFrame(rows, columns=["tau", "mean", "median", "lower", "upper"])
