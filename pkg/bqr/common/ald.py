"""
Asymmetric Laplace Core - check loss, ALD 밀도/모멘트, mixture 상수

모든 함수는 순수 함수이며 numpy 배열 입력을 그대로 받는다.
τ 검증은 QuantileLevel 생성 시 한 번만 수행한다.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
import pandas as pd

ArrayLike = float | npt.NDArray[np.float64]


@dataclass(frozen=True)
class QuantileLevel:
    """분위수 수준 τ ∈ (0, 1)"""

    tau: float

    def __post_init__(self) -> None:
        tau = float(self.tau)
        if not (0.0 < tau < 1.0) or not np.isfinite(tau):
            raise ValueError(f"Quantile level must lie in (0, 1), got {self.tau!r}")
        object.__setattr__(self, "tau", tau)

    def __float__(self) -> float:
        return self.tau

    @cached_property
    def constants(self) -> "MixtureConstants":
        return mixture_constants(self)


@dataclass(frozen=True)
class AldParams:
    """ALD(μ, σ, τ) 파라미터"""

    mu: float
    sigma: float
    tau: QuantileLevel

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"ALD scale must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class MixtureConstants:
    """location-scale mixture 상수 θ, ψ²"""

    theta: float
    psi2: float


def as_quantile(tau: "QuantileLevel | float") -> QuantileLevel:
    """float 또는 QuantileLevel을 QuantileLevel로 변환"""
    return tau if isinstance(tau, QuantileLevel) else QuantileLevel(tau)


def check_loss(u: ArrayLike, tau: QuantileLevel) -> ArrayLike:
    """
    check function ρ_τ(u) = u(τ − I(u < 0))

    Args:
        u: 잔차 (스칼라 또는 배열)
        tau: 분위수 수준

    Returns:
        u < 0 이면 u(τ − 1), 아니면 uτ (항상 ≥ 0)
    """
    t = tau.tau
    u = np.asarray(u, dtype=float)
    result = np.where(u < 0, u * (t - 1.0), u * t)
    return result if result.ndim else float(result)


def ald_log_density(y: ArrayLike, p: AldParams) -> ArrayLike:
    """
    ALD 로그 밀도 log[τ(1−τ)/σ] − ρ_τ((y−μ)/σ)
    """
    t = p.tau.tau
    log_norm = np.log(t * (1.0 - t) / p.sigma)
    result = log_norm - np.asarray(
        check_loss((np.asarray(y, dtype=float) - p.mu) / p.sigma, p.tau)
    )
    return result if np.ndim(result) else float(result)


def ald_cdf(y: ArrayLike, p: AldParams) -> ArrayLike:
    """ALD 누적분포함수 (μ에서 값 τ)"""
    t = p.tau.tau
    z = (np.asarray(y, dtype=float) - p.mu) / p.sigma
    below = t * np.exp((1.0 - t) * np.minimum(z, 0.0))
    above = 1.0 - (1.0 - t) * np.exp(-t * np.maximum(z, 0.0))
    result = np.where(z < 0, below, above)
    return result if result.ndim else float(result)


def ald_quantile(prob: ArrayLike, p: AldParams) -> ArrayLike:
    """ALD 분위수 함수, ald_quantile(τ) == μ"""
    t = p.tau.tau
    q = np.asarray(prob, dtype=float)
    with np.errstate(divide="ignore"):
        lower = p.mu + p.sigma / (1.0 - t) * np.log(q / t)
        upper = p.mu - p.sigma / t * np.log((1.0 - q) / (1.0 - t))
    result = np.where(q <= t, lower, upper)
    return result if result.ndim else float(result)


def ald_mean(p: AldParams) -> float:
    """E(Y) = μ + σθ(τ)"""
    return p.mu + p.sigma * p.tau.constants.theta


def variance_factor(tau: QuantileLevel) -> float:
    """Var(Y) = σ²T(τ) 의 T(τ) = (1−2τ+2τ²)/((1−τ)²τ²)"""
    t = tau.tau
    return (1.0 - 2.0 * t + 2.0 * t * t) / ((1.0 - t) ** 2 * t * t)


def ald_variance(p: AldParams) -> float:
    return p.sigma**2 * variance_factor(p.tau)


def mixture_constants(tau: QuantileLevel) -> MixtureConstants:
    """θ = (1−2τ)/(τ(1−τ)), ψ² = 2/(τ(1−τ))"""
    t = tau.tau
    denom = t * (1.0 - t)
    return MixtureConstants(theta=(1.0 - 2.0 * t) / denom, psi2=2.0 / denom)


def variance_curve(taus: list[float]) -> pd.DataFrame:
    """
    τ 격자에 대한 T(τ) 테이블 (분산 곡선 데이터)

    Returns:
        columns: tau, variance_factor
    """
    levels = [as_quantile(t) for t in taus]
    return pd.DataFrame(
        {
            "tau": [q.tau for q in levels],
            "variance_factor": [variance_factor(q) for q in levels],
        }
    )
