"""
Outlier Diagnostics - 잠재변수 v_i 사후분포 비교

1. 이상치 확률 P(O_i = 1) = 1/(n−1) Σ_{j≠i} P(v_i > v_j | data)
   - pairwise: 같은 draw 인덱스끼리 비교 (기본)
   - maxrule: v_j 체인 전체의 최댓값과 비교 (보수적)
2. KL(f_i) = 1/(n−1) Σ_{j≠i} K(f_i, f_j)
   - 정규 커널 KDE (Silverman bandwidth) + 사다리꼴 적분
"""

import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import gaussian_kde, iqr, rankdata

from bqr.common.ald import QuantileLevel
from bqr.common.gibbs import PosteriorChains
from bqr.config.fit_config import BandwidthRule, KdeSpec, KlMode, ProbRule
from bqr.errors import DegenerateChainError
from bqr.utils.logging import BQRLogger

logger = BQRLogger("outliers")

FloatArray = npt.NDArray[np.float64]

# KDE 격자 하한 (양수 support 체인)
SUPPORT_FLOOR = 1e-12
# 격자 범위 = [min − 3h, max + 3h]
GRID_PADDING = 3.0
DEFAULT_FLAG_THRESHOLD = 0.10


@dataclass(frozen=True)
class OutlierReport:
    """한 τ에 대한 관측치별 이상치 확률 / 평균 KL"""

    tau: QuantileLevel
    prob: FloatArray
    kl: FloatArray
    flagged: npt.NDArray[np.bool_]
    kl_reference: int | None = None
    prob_rule: ProbRule = ProbRule.PAIRWISE
    flag_threshold: float = DEFAULT_FLAG_THRESHOLD
    relative_kl: FloatArray | None = field(default=None)

    @property
    def n(self) -> int:
        return self.prob.shape[0]

    def to_frame(self) -> pd.DataFrame:
        """columns: row_index, probability, mean_kl, relative_kl, flagged"""
        relative = (
            self.relative_kl if self.relative_kl is not None else np.full(self.n, np.nan)
        )
        return pd.DataFrame(
            {
                "row_index": np.arange(self.n),
                "probability": self.prob,
                "mean_kl": self.kl,
                "relative_kl": relative,
                "flagged": self.flagged,
            }
        )


# =============================================================================
# Exceedance probability
# =============================================================================


def _check_index(chains: PosteriorChains, *indices: int) -> None:
    for idx in indices:
        if not 0 <= idx < chains.n:
            raise IndexError(f"observation index {idx} out of range [0, {chains.n})")


def exceedance_probability_pairwise(chains: PosteriorChains, i: int) -> float:
    """
    (1/(n−1)) Σ_{j≠i} (1/M) Σ_l 1[v_i^(l) > v_j^(l)]

    Raises:
        ValueError: n < 2
    """
    if chains.n < 2:
        raise ValueError("exceedance probability needs at least two observations")
    _check_index(chains, i)
    v = chains.v
    exceed = v[:, [i]] > v
    return float(exceed.sum() / (chains.M * (chains.n - 1)))


def pairwise_exceedance(chains: PosteriorChains, i: int, j: int) -> float:
    """aligned-draw P̂(v_i > v_j)"""
    _check_index(chains, i, j)
    return float(np.mean(chains.v[:, i] > chains.v[:, j]))


def exceedance_probability_maxrule(chains: PosteriorChains, i: int, j: int) -> float:
    """(1/M) Σ_l 1[v_i^(l) > max_k v_j^(k)]"""
    _check_index(chains, i, j)
    if i == j:
        raise ValueError("maxrule exceedance needs two distinct observations")
    return float(np.mean(chains.v[:, i] > chains.v[:, j].max()))


def all_exceedance_probabilities(
    chains: PosteriorChains, rule: ProbRule = ProbRule.PAIRWISE
) -> FloatArray:
    """
    모든 관측치의 P(O_i = 1)

    pairwise: 각 draw에서 v_i보다 엄격히 작은 v_j 개수 = min-rank − 1
    maxrule: 열별 최댓값 정렬 후 searchsorted (v_i ≤ max v_i 이므로 j = i 항은 0)
    """
    n, M = chains.n, chains.M
    if n < 2:
        raise ValueError("exceedance probability needs at least two observations")
    v = chains.v

    if rule == ProbRule.PAIRWISE:
        below = rankdata(v, axis=1, method="min") - 1.0
        return below.sum(axis=0) / (M * (n - 1))

    column_max = np.sort(v.max(axis=0))
    below = np.searchsorted(column_max, v, side="left")
    return below.sum(axis=0) / (M * (n - 1))


# =============================================================================
# Kullback-Leibler divergence
# =============================================================================


def silverman_bandwidth(draws: FloatArray) -> float:
    """0.9 · min(sd, IQR/1.34) · M^(−1/5)"""
    sd = float(np.std(draws, ddof=1))
    spread = float(iqr(draws)) / 1.34
    scale = min(sd, spread) if spread > 0 else sd
    return 0.9 * scale * draws.shape[0] ** (-0.2)


def _bandwidth(draws: FloatArray, spec: KdeSpec, label: str) -> float:
    if draws.shape[0] < 2 or np.ptp(draws) == 0:
        raise DegenerateChainError(f"Chain {label} has zero variance; KDE is undefined")
    if spec.bandwidth_rule == BandwidthRule.FIXED:
        return float(spec.bandwidth)
    return silverman_bandwidth(draws)


@dataclass(frozen=True)
class ChainDensity:
    """체인 하나의 KDE (bandwidth + gaussian_kde, 리포트당 1회 생성)"""

    draws: FloatArray
    bandwidth: float
    kde: gaussian_kde

    @classmethod
    def build(cls, draws: FloatArray, spec: KdeSpec, label: str) -> "ChainDensity":
        draws = np.asarray(draws, dtype=float)
        bandwidth = _bandwidth(draws, spec, label)
        # gaussian_kde의 factor = h / sd
        kde = gaussian_kde(draws, bw_method=bandwidth / float(np.std(draws, ddof=1)))
        return cls(draws=draws, bandwidth=bandwidth, kde=kde)


def _pair_grid(first: ChainDensity, second: ChainDensity, spec: KdeSpec) -> FloatArray:
    """[min − 3h, max + 3h] 공유 격자 (두 체인에 대해 대칭)"""
    a, b = first.draws, second.draws
    h_max = max(first.bandwidth, second.bandwidth)
    lo = min(a.min(), b.min()) - GRID_PADDING * h_max
    hi = max(a.max(), b.max()) + GRID_PADDING * h_max
    if a.min() > 0 and b.min() > 0:
        lo = max(lo, SUPPORT_FLOOR)
    return np.linspace(lo, hi, spec.grid_points)


def _divergence(f_p: FloatArray, f_q: FloatArray, grid: FloatArray, floor: float) -> float:
    integrand = np.where(
        f_p > 0, np.log(np.maximum(f_p, floor) / np.maximum(f_q, floor)) * f_p, 0.0
    )
    return max(float(trapezoid(integrand, grid)), 0.0)


def _evaluate_pair(
    first: ChainDensity, second: ChainDensity, spec: KdeSpec
) -> tuple[FloatArray, FloatArray, FloatArray]:
    grid = _pair_grid(first, second, spec)
    f_first = first.kde(grid)
    if first.bandwidth == second.bandwidth and np.array_equal(first.draws, second.draws):
        return grid, f_first, f_first
    return grid, f_first, second.kde(grid)


def pair_divergences(
    first: ChainDensity, second: ChainDensity, spec: KdeSpec
) -> tuple[float, float]:
    """
    (K(f_i, f_j), K(f_j, f_i)): 격자가 대칭이므로 한 번의 KDE 평가로 양방향 계산
    """
    grid, f_i, f_j = _evaluate_pair(first, second, spec)
    floor = spec.density_floor
    return _divergence(f_i, f_j, grid, floor), _divergence(f_j, f_i, grid, floor)


def kl_divergence_samples(
    draws_i: FloatArray,
    draws_j: FloatArray,
    spec: KdeSpec,
    labels: tuple[str, str] = ("i", "j"),
) -> float:
    """
    K(f_i, f_j) = ∫ log(f̂_i/f̂_j) f̂_i dx (두 샘플의 KDE)

    - bandwidth: 체인별 개별 계산
    - 격자: [min − 3h, max + 3h] 공유, spec.grid_points 노드
      (두 체인이 모두 양수면 하한을 1e−12로 절단)
    - f̂_j는 density_floor로 하한 처리, 음수 결과는 0으로 clamp
    """
    first = ChainDensity.build(draws_i, spec, labels[0])
    second = ChainDensity.build(draws_j, spec, labels[1])
    grid, f_i, f_j = _evaluate_pair(first, second, spec)
    return _divergence(f_i, f_j, grid, spec.density_floor)


def kl_divergence_kde(
    chains: PosteriorChains, i: int, j: int, spec: KdeSpec | None = None
) -> float:
    """관측치 i, j의 잠재변수 체인 간 K(f_i, f_j)"""
    _check_index(chains, i, j)
    if i == j:
        raise ValueError("KL divergence needs two distinct observations")
    return kl_divergence_samples(
        chains.v[:, i], chains.v[:, j], spec or KdeSpec(), labels=(f"v_{i}", f"v_{j}")
    )


def mean_kl(
    chains: PosteriorChains,
    i: int,
    mode: KlMode = KlMode.ALL_OTHERS,
    reference: int | None = None,
    spec: KdeSpec | None = None,
) -> float:
    """
    KL(f_i)

    Args:
        mode: ALL_OTHERS면 j ≠ i 평균, SINGLE이면 reference 하나와의 divergence
        reference: SINGLE 모드의 기준 관측치
    """
    spec = spec or KdeSpec()
    if mode == KlMode.SINGLE:
        if reference is None:
            raise ValueError("single-reference mode requires a reference index")
        return kl_divergence_kde(chains, i, reference, spec)
    others = [j for j in range(chains.n) if j != i]
    return float(np.mean([kl_divergence_kde(chains, i, j, spec) for j in others]))


def relative_kl(
    kl: FloatArray, targets: list[int], exclude: list[int] | None = None
) -> FloatArray:
    """
    KL / (비대상 관측치 KL 평균)

    Args:
        kl: 관측치별 KL
        targets: 분모에서 제외할 대상 관측치 (이상치)
        exclude: 분모에서 추가로 제외할 관측치 (예: 기준 관측치)

    Returns:
        관측치별 상대 KL
    """
    kl = np.asarray(kl, dtype=float)
    mask = np.ones(kl.shape[0], dtype=bool)
    mask[list(targets)] = False
    if exclude:
        mask[list(exclude)] = False
    baseline = float(kl[mask].mean()) if mask.any() else np.nan
    if not baseline > 0:
        return np.full(kl.shape[0], np.nan)
    return kl / baseline


# =============================================================================
# Report
# =============================================================================


def default_reference(prob: FloatArray) -> int:
    """확률이 중앙값에 가장 가까운 관측치 (동률이면 작은 인덱스)"""
    prob = np.asarray(prob, dtype=float)
    return int(np.argmin(np.abs(prob - np.median(prob))))


def _all_kl(
    chains: PosteriorChains,
    mode: KlMode,
    reference: int | None,
    spec: KdeSpec,
    workers: int,
) -> FloatArray:
    """
    관측치별 KL

    체인별 KDE는 리포트당 한 번만 생성. all 모드는 i < j 쌍마다
    K(f_i, f_j), K(f_j, f_i)를 같은 격자 평가로 함께 계산한다.
    """
    n = chains.n
    if mode == KlMode.SINGLE:
        if reference is None:
            raise ValueError("single-reference mode requires a reference index")
        _check_index(chains, reference)
        ref: int = reference

    densities = [ChainDensity.build(chains.v[:, i], spec, f"v_{i}") for i in range(n)]

    if mode == KlMode.SINGLE:

        def one(i: int) -> float:
            if i == ref:
                return 0.0
            return pair_divergences(densities[i], densities[ref], spec)[0]

        return np.array(_map(one, list(range(n)), workers))

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def one_pair(pair: tuple[int, int]) -> tuple[float, float]:
        i, j = pair
        return pair_divergences(densities[i], densities[j], spec)

    matrix = np.zeros((n, n))
    for (i, j), (k_ij, k_ji) in zip(pairs, _map(one_pair, pairs, workers)):
        matrix[i, j] = k_ij
        matrix[j, i] = k_ji
    # 대각 제외, j 오름차순 평균 (mean_kl과 같은 합산 순서)
    return np.array([float(np.mean(matrix[i, np.arange(n) != i])) for i in range(n)])


def _map(func: Callable[[Any], Any], items: list[Any], workers: int) -> list[Any]:
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def build_report(
    chains: PosteriorChains,
    prob_rule: ProbRule = ProbRule.PAIRWISE,
    kl_mode: KlMode = KlMode.ALL_OTHERS,
    spec: KdeSpec | None = None,
    kl_reference: int | None = None,
    flag_threshold: float = DEFAULT_FLAG_THRESHOLD,
    targets: list[int] | None = None,
    workers: int = 1,
) -> OutlierReport:
    """
    모든 관측치에 대한 이상치 리포트

    Args:
        chains: 사후 체인
        prob_rule: pairwise / maxrule
        kl_mode: ALL_OTHERS / SINGLE (kl_reference 없으면 default_reference)
        spec: KDE 설정
        flag_threshold: prob > threshold 이면 flag (기본 0.10)
        targets: 상대 KL 분모에서 제외할 관측치
        workers: 관측치 단위 병렬 처리 worker 수

    Returns:
        OutlierReport
    """
    spec = spec or KdeSpec()
    start_time = time.time()
    prob = all_exceedance_probabilities(chains, prob_rule)
    if kl_mode == KlMode.SINGLE and kl_reference is None:
        kl_reference = default_reference(prob)
    kl = _all_kl(chains, kl_mode, kl_reference, spec, workers)
    exclude = [kl_reference] if kl_mode == KlMode.SINGLE else None
    report = OutlierReport(
        tau=chains.tau,
        prob=prob,
        kl=kl,
        flagged=prob > flag_threshold,
        kl_reference=kl_reference if kl_mode == KlMode.SINGLE else None,
        prob_rule=prob_rule,
        flag_threshold=flag_threshold,
        relative_kl=relative_kl(kl, targets or [], exclude),
    )
    logger.log_report_complete(
        chains.tau.tau, report.n, int(report.flagged.sum()), float(prob.max())
    )
    logger.debug("Report timing", elapsed_sec=round(time.time() - start_time, 3))
    return report


def top_outliers(report: OutlierReport, k: int = 5) -> pd.DataFrame:
    """확률 내림차순 (동률은 KL 내림차순) 상위 k개 관측치"""
    frame = report.to_frame()
    return frame.sort_values(
        ["probability", "mean_kl"], ascending=[False, False], kind="mergesort"
    ).head(k)
