"""
Random Streams & Samplers - Gibbs sweep에 필요한 모든 분포의 난수 생성기

RngStream:
- (seed, stream_id) → Philox counter-based generator
- 같은 (seed, stream_id)는 같은 난수열을 재현
- 체인/replication마다 stream_id로 독립 substream 할당

GIG(ν = 1/2) 샘플링:
- X ~ InverseGaussian(mean = ζ/δ, shape = ζ²) 이면 1/X ~ GIG(1/2, δ², ζ²)
- inverse Gaussian은 Michael–Schucany–Haas 변환으로 생성
- δ² = 0 이면 Gamma(shape 1/2, rate ζ²/2)

모든 지수분포는 평균(mean) 파라미터로 다룬다 (rate 아님).
"""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.linalg import solve_triangular

from bqr.common.ald import AldParams

FloatArray = npt.NDArray[np.float64]

# 양수 support 하한 (underflow 시 0 대신 반환)
_TINY = np.finfo(np.float64).tiny
_MAX = np.finfo(np.float64).max


@dataclass
class RngStream:
    """시드 + substream 식별자로 결정되는 난수 스트림 (단일 소유자 전용)"""

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be unsigned integers")

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
            self._generator = np.random.Generator(np.random.Philox(seq))
        return self._generator

    def substream(self, stream_id: int) -> "RngStream":
        """같은 seed의 다른 substream"""
        return RngStream(seed=self.seed, stream_id=stream_id)


@dataclass(frozen=True)
class GigHalfParams:
    """GIG(ν = 1/2) 파라미터 δ² ≥ 0, ζ² > 0 (δ²는 관측치별 배열 가능)"""

    delta2: float | FloatArray
    zeta2: float

    def __post_init__(self) -> None:
        if not self.zeta2 > 0:
            raise ValueError(f"zeta2 must be positive, got {self.zeta2!r}")
        if np.any(np.asarray(self.delta2) < 0):
            raise ValueError("delta2 must be non-negative")


def _positive(x: FloatArray) -> FloatArray:
    """support (0, ∞) 안으로 clamp"""
    return np.clip(x, _TINY, _MAX)


def _msh_components(
    mean: FloatArray, shape: FloatArray, rng: RngStream
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """
    Michael–Schucany–Haas 변환의 두 근과 선택 indicator

    x_small · x_large = mean² 이므로 작은 근을 mean / (1 + φ + √(φ(φ+2)))
    로 계산하여 상쇄 오차를 피한다 (φ = mean·χ²₁ / (2·shape)).

    Returns:
        (x_small, x_large, take_small)
    """
    gen = rng.generator
    chi2 = gen.standard_normal(mean.shape) ** 2
    phi = mean * chi2 / (2.0 * shape)
    root = 1.0 + phi + np.sqrt(phi) * np.sqrt(phi + 2.0)
    x_small = mean / root
    x_large = mean * root
    u = gen.uniform(size=mean.shape)
    take_small = u <= mean / (mean + x_small)
    return x_small, x_large, take_small


def sample_inverse_gaussian(
    mean: float | FloatArray,
    shape: float | FloatArray,
    rng: RngStream,
    size: int | tuple[int, ...] | None = None,
) -> float | FloatArray:
    """
    Inverse Gaussian(mean, shape) 샘플링 (Michael–Schucany–Haas)

    Args:
        mean: 평균 (> 0)
        shape: shape λ (> 0), 분산 = mean³/shape
        rng: 난수 스트림
        size: 출력 크기 (None이면 mean/shape broadcast 크기)

    Returns:
        양수 draw
    """
    m = np.asarray(mean, dtype=float)
    lam = np.asarray(shape, dtype=float)
    out_shape = size if size is not None else np.broadcast(m, lam).shape
    m = np.broadcast_to(m, out_shape).astype(float)
    lam = np.broadcast_to(lam, out_shape).astype(float)

    x_small, x_large, take_small = _msh_components(m, lam, rng)
    draws = _positive(np.where(take_small, x_small, x_large))
    return draws if draws.ndim else float(draws)


def sample_gig_half(params: GigHalfParams, rng: RngStream) -> float | FloatArray:
    """
    GIG(ν = 1/2, δ², ζ²) 샘플링, 밀도 ∝ v^{-1/2} exp{−½(δ²/v + ζ²v)}

    δ² > 0: 1/v ~ InverseGaussian(ζ/δ, ζ²) 의 역수
    δ² = 0: Gamma(shape 1/2, rate ζ²/2)

    Returns:
        δ²와 같은 모양의 양수 draw
    """
    delta2 = np.asarray(params.delta2, dtype=float)
    zeta2 = float(params.zeta2)
    scalar = delta2.ndim == 0
    delta2 = np.atleast_1d(delta2)

    zero = delta2 <= 0.0
    delta = np.sqrt(np.where(zero, 1.0, delta2))
    zeta = np.sqrt(zeta2)
    ig_mean = zeta / delta

    # 1/x 를 직접 계산: 작은 근의 역수 = root/mean, 큰 근의 역수 = 1/(mean·root)
    x_small, x_large, take_small = _msh_components(
        ig_mean, np.full_like(ig_mean, zeta2), rng
    )
    draws = np.where(take_small, 1.0 / x_small, 1.0 / x_large)

    if np.any(zero):
        gamma_draws = rng.generator.gamma(0.5, 2.0 / zeta2, size=delta2.shape)
        draws = np.where(zero, gamma_draws, draws)

    draws = _positive(draws)
    return float(draws[0]) if scalar else draws


def sample_inverse_gamma(
    shape: float,
    rate: float,
    rng: RngStream,
    size: int | tuple[int, ...] | None = None,
) -> float | FloatArray:
    """InverseGamma(shape, rate): 1/Gamma(shape, rate)"""
    gamma_draws = rng.generator.gamma(shape, 1.0 / rate, size=size)
    draws = _positive(1.0 / np.asarray(gamma_draws))
    return draws if draws.ndim else float(draws)


def sample_exponential(
    mean: float | FloatArray,
    rng: RngStream,
    size: int | tuple[int, ...] | None = None,
) -> float | FloatArray:
    """Exponential(mean): numpy scale 파라미터가 곧 평균"""
    return rng.generator.exponential(scale=mean, size=size)


def sample_mvn(
    mean: FloatArray,
    covariance_factor: FloatArray,
    rng: RngStream,
) -> FloatArray:
    """
    다변량 정규 draw: mean + L·z (L: 공분산의 lower Cholesky factor)
    """
    mean = np.asarray(mean, dtype=float)
    z = rng.generator.standard_normal(mean.shape[0])
    return mean + np.asarray(covariance_factor, dtype=float) @ z


def sample_mvn_precision(
    mean: FloatArray,
    precision_factor: FloatArray,
    rng: RngStream,
) -> FloatArray:
    """
    precision의 lower Cholesky factor L (Q = LLᵀ)로 다변량 정규 draw

    mean + L⁻ᵀz 의 공분산은 Q⁻¹ (역행렬을 명시적으로 만들지 않음)
    """
    z = rng.generator.standard_normal(mean.shape[0])
    return mean + solve_triangular(precision_factor, z, lower=True, trans="T")


def sample_ald(
    p: AldParams, rng: RngStream, size: int | tuple[int, ...]
) -> FloatArray:
    """ALD(μ, σ, τ) 직접 draw (역 CDF)"""
    t = p.tau.tau
    u = rng.generator.uniform(size=size)
    lower = p.mu + p.sigma / (1.0 - t) * np.log(np.maximum(u, _TINY) / t)
    upper = p.mu - p.sigma / t * np.log(np.maximum(1.0 - u, _TINY) / (1.0 - t))
    return np.where(u <= t, lower, upper)


def sample_ald_mixture(
    p: AldParams, rng: RngStream, size: int | tuple[int, ...]
) -> FloatArray:
    """
    location-scale mixture로 ALD draw

    v ~ Exponential(mean σ), y | v ~ N(μ + θv, ψ²σv)
    """
    c = p.tau.constants
    v = rng.generator.exponential(scale=p.sigma, size=size)
    z = rng.generator.standard_normal(size=size)
    return p.mu + c.theta * v + np.sqrt(c.psi2 * p.sigma * v) * z
