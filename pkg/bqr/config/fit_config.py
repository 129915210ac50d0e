"""
Fit / Diagnose / Study Configuration Models
Pydantic 기반 실행 설정 스키마 정의
"""

from enum import Enum
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator, model_validator

from bqr.common.ald import QuantileLevel

# 진단에 필요한 최소 보존 draw 수
MIN_RETAINED_DRAWS = 100

SCENARIO_TAUS = [0.1, 0.5, 0.9]
CALIBRATION_TAUS = [0.25, 0.5, 0.75]
APPLICATION_TAUS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class PriorSpec(BaseModel):
    """β ~ N(b₀, B₀), σ ~ IG(shape, rate) 사전분포 설정

    beta_cov가 없으면 B₀ = beta_variance·I (기본 N(0, 100·I)).
    """

    beta_mean: float | list[float] = 0.0
    beta_variance: float = Field(default=100.0, gt=0)
    beta_cov: list[list[float]] | None = None
    sigma_shape: float = Field(default=1.5, gt=0)
    sigma_rate: float = Field(default=0.05, gt=0)

    @field_validator("beta_cov")
    @classmethod
    def validate_beta_cov(cls, v: list[list[float]] | None) -> list[list[float]] | None:
        """B₀ 대칭 양정치 검증"""
        if v is None:
            return v
        cov = np.asarray(v, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError("beta_cov must be a square matrix")
        if not np.allclose(cov, cov.T):
            raise ValueError("beta_cov must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            raise ValueError("beta_cov must be positive definite") from e
        return v

    def resolve(self, p: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """
        p차원 (b₀, B₀) 배열 생성

        Args:
            p: 회귀계수 개수

        Returns:
            (b₀ 길이 p 벡터, B₀ p×p 행렬)
        """
        if isinstance(self.beta_mean, list):
            if len(self.beta_mean) != p:
                raise ValueError(
                    f"beta_mean has length {len(self.beta_mean)}, expected {p}"
                )
            b0 = np.asarray(self.beta_mean, dtype=float)
        else:
            b0 = np.full(p, float(self.beta_mean))

        if self.beta_cov is not None:
            B0 = np.asarray(self.beta_cov, dtype=float)
            if B0.shape != (p, p):
                raise ValueError(f"beta_cov has shape {B0.shape}, expected {(p, p)}")
        else:
            B0 = self.beta_variance * np.eye(p)
        return b0, B0


class FitConfig(BaseModel):
    """Gibbs 체인 설정 (기본: 3000 iterations, 1000 burn-in, thin 1)"""

    tau: float = Field(default=0.5, gt=0, lt=1)
    iterations: int = Field(default=3000, gt=0)
    burn_in: int = Field(default=1000, ge=0)
    thin: int = Field(default=1, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    stream_id: int = Field(default=0, ge=0)
    prior: PriorSpec = Field(default_factory=PriorSpec)

    @model_validator(mode="after")
    def validate_chain_length(self) -> "FitConfig":
        """burn-in < iterations, 보존 draw ≥ 100"""
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if self.retained < MIN_RETAINED_DRAWS:
            raise ValueError(
                f"(iterations - burn_in) / thin = {self.retained} retained draws; "
                f"at least {MIN_RETAINED_DRAWS} are required"
            )
        return self

    @property
    def retained(self) -> int:
        """보존 draw 수 M"""
        return (self.iterations - self.burn_in) // self.thin

    @property
    def quantile(self) -> QuantileLevel:
        return QuantileLevel(self.tau)

    def for_tau(self, tau: float, stream_id: int | None = None) -> "FitConfig":
        """τ (및 substream)만 바꾼 설정 반환"""
        update: dict = {"tau": tau}
        if stream_id is not None:
            update["stream_id"] = stream_id
        return self.model_copy(update=update)


class BandwidthRule(str, Enum):
    """KDE bandwidth 규칙"""

    SILVERMAN = "silverman"
    FIXED = "fixed"


class KdeSpec(BaseModel):
    """정규 커널 KDE + 사다리꼴 적분 설정"""

    bandwidth_rule: BandwidthRule = BandwidthRule.SILVERMAN
    bandwidth: float | None = Field(default=None, gt=0)
    grid_points: int = Field(default=512, ge=64)
    density_floor: float = Field(default=1e-12, gt=0, le=1e-8)

    @model_validator(mode="after")
    def validate_fixed_bandwidth(self) -> "KdeSpec":
        if self.bandwidth_rule == BandwidthRule.FIXED and self.bandwidth is None:
            raise ValueError("fixed bandwidth rule requires a bandwidth value")
        return self


class ProbRule(str, Enum):
    """P(O_i = 1) 추정 방식"""

    PAIRWISE = "pairwise"
    MAXRULE = "maxrule"


class KlMode(str, Enum):
    """KL(f_i) 계산 방식"""

    ALL_OTHERS = "all"
    SINGLE = "single"


class DiagnoseConfig(BaseModel):
    """이상치 진단 설정"""

    prob_rule: ProbRule = ProbRule.PAIRWISE
    kl_mode: KlMode = KlMode.ALL_OTHERS
    kl_reference: int | None = Field(default=None, ge=0)
    flag_threshold: float = Field(default=0.10, ge=0, le=1)
    kde: KdeSpec = Field(default_factory=KdeSpec)


class ScenarioSpec(BaseModel):
    """이상치 주입 시나리오 정의

    시나리오 인코딩 (include_ast, include_star):
    1 = (False, False), 2 = (False, True), 3 = (True, True), 4 = (True, False)
    """

    n: int = Field(default=100, gt=0)
    betas: list[float] = Field(default_factory=lambda: [0.0, 1.0, -1.0, 2.0])
    noise_sd: float = Field(default=2.0, ge=0)
    include_star: bool = False
    include_ast: bool = False
    taus: list[float] = Field(default_factory=lambda: list(SCENARIO_TAUS))
    replications: int = Field(default=250, gt=0)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    fit: FitConfig = Field(default_factory=FitConfig)
    kde: KdeSpec = Field(default_factory=KdeSpec)
    prob_rule: ProbRule = ProbRule.MAXRULE
    max_failure_rate: float = Field(default=0.05, ge=0, le=1)

    @field_validator("betas")
    @classmethod
    def validate_betas(cls, v: list[float]) -> list[float]:
        """β₀..β₃ (절편 + 설명변수 3개)"""
        if len(v) != 4:
            raise ValueError("betas must hold the intercept and three slopes")
        return v

    @field_validator("taus")
    @classmethod
    def validate_taus(cls, v: list[float]) -> list[float]:
        return validate_tau_list(v)

    @classmethod
    def for_scenario(cls, scenario: int, **kwargs) -> "ScenarioSpec":
        """시나리오 번호(1~4)로 스펙 생성"""
        flags = SCENARIO_FLAGS.get(scenario)
        if flags is None:
            raise ValueError(f"Unknown scenario {scenario}; expected 1..4")
        include_ast, include_star = flags
        return cls(include_ast=include_ast, include_star=include_star, **kwargs)

    @property
    def scenario(self) -> int:
        """(include_ast, include_star) → 시나리오 번호"""
        for number, flags in SCENARIO_FLAGS.items():
            if flags == (self.include_ast, self.include_star):
                return number
        raise AssertionError("unreachable")


# scenario → (include_ast, include_star)
SCENARIO_FLAGS: dict[int, tuple[bool, bool]] = {
    1: (False, False),
    2: (False, True),
    3: (True, True),
    4: (True, False),
}


class CalibrationSpec(BaseModel):
    """이상치 없는 calibration 스터디 설정"""

    n_values: list[int] = Field(default_factory=lambda: [100, 300])
    taus: list[float] = Field(default_factory=lambda: list(CALIBRATION_TAUS))
    replications: int = Field(default=250, gt=0)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    fit: FitConfig = Field(default_factory=FitConfig)
    prob_rule: ProbRule = ProbRule.MAXRULE
    flag_threshold: float = Field(default=0.10, ge=0, le=1)
    max_failure_rate: float = Field(default=0.05, ge=0, le=1)

    @field_validator("taus")
    @classmethod
    def validate_taus(cls, v: list[float]) -> list[float]:
        return validate_tau_list(v)


class RunManifest(BaseModel):
    """CLI 실행 매니페스트 (manifest.json으로 저장)"""

    command: Literal["fit", "diagnose", "simulate", "calibrate", "curve"]
    input_path: Path | None = None
    response: str | None = None
    intercept: bool = True
    taus: list[float] = Field(default_factory=lambda: list(APPLICATION_TAUS))
    fit: FitConfig = Field(default_factory=FitConfig)
    diagnose: DiagnoseConfig = Field(default_factory=DiagnoseConfig)
    credible_level: float = Field(default=0.95, gt=0, lt=1)
    write_draws: bool = False
    scenarios: list[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    replications: int = Field(default=250, gt=0)
    n_values: list[int] = Field(default_factory=lambda: [100, 300])
    output_dir: Path = Path("bqr_output")
    workers: int | None = Field(default=None, gt=0)

    @field_validator("taus")
    @classmethod
    def validate_taus(cls, v: list[float]) -> list[float]:
        return validate_tau_list(v)

    @field_validator("scenarios")
    @classmethod
    def validate_scenarios(cls, v: list[int]) -> list[int]:
        unknown = [s for s in v if s not in SCENARIO_FLAGS]
        if unknown:
            raise ValueError(f"Unknown scenarios {unknown}; expected 1..4")
        return v

    @property
    def seed(self) -> int:
        return self.fit.seed


def validate_tau_list(taus: list[float]) -> list[float]:
    """τ 목록: 비어있지 않고, 모두 (0, 1), 중복 없음"""
    if not taus:
        raise ValueError("at least one quantile level is required")
    for t in taus:
        QuantileLevel(t)
    if len(set(taus)) != len(taus):
        raise ValueError(f"quantile levels must be distinct, got {taus}")
    return taus
