"""
Simulation Harness - 합성 설계 생성, 이상치 주입, 반복 적합 및 요약

calibration: 이상치 없음, n ∈ {100, 300}, τ ∈ {0.25, 0.5, 0.75}
scenarios: n = 100, 이상치 ∗/⋆ 주입, τ ∈ {0.1, 0.5, 0.9}

  y = β₀ + β₁x₁ + β₂x₂ + β₃x₃ + ε,  x_k ~ U(0, 10),  ε ~ N(0, 2²)
  ∗ = (y=30, x₁=x̄₁, x₂=20, x₃=x̄₃),  ⋆ = (y=0, x₁=20, x₂=x̄₂, x₃=x̄₃)

난수 스트림 배치 (master_seed 고정):
- replication r의 데이터: stream_id = r · STREAM_STRIDE
- replication r의 k번째 τ 적합: stream_id = r · STREAM_STRIDE + 1 + k
- replication r의 KL 기준 관측치: stream_id = r · STREAM_STRIDE + STREAM_STRIDE − 1
데이터 스트림이 시나리오와 무관하므로 같은 r의 시나리오들은 같은 기저 데이터를 공유한다.
"""

import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from bqr.common.gibbs import Dataset, fit_taus
from bqr.common.outliers import all_exceedance_probabilities, build_report
from bqr.common.rng import RngStream
from bqr.config.fit_config import CalibrationSpec, KlMode, ScenarioSpec
from bqr.errors import BQRError, StudyAbortedError
from bqr.utils.logging import BQRLogger

logger = BQRLogger("simulation")

STREAM_STRIDE = 64
COLUMN_NAMES = ["intercept", "x1", "x2", "x3"]
TARGET_AST = "ast"
TARGET_STAR = "star"
# 이상치가 아닌 관측치들의 평균 확률
TARGET_BASELINE = "baseline"

AST_RESPONSE, AST_X2 = 30.0, 20.0
STAR_RESPONSE, STAR_X1 = 0.0, 20.0

SUMMARY_COLUMNS = ["scenario", "tau", "target", "mean", "median", "q2.5", "q97.5"]


@dataclass
class ReplicationSummary:
    """시나리오 스터디 결과 (τ·대상별 분위수 요약 + β̂ 분포)"""

    probabilities: pd.DataFrame
    relative_kl: pd.DataFrame
    betas: pd.DataFrame
    records: pd.DataFrame
    failures: pd.DataFrame
    provenance: dict[str, Any] = field(default_factory=dict)


@dataclass
class CalibrationSummary:
    """calibration 스터디 결과"""

    summary: pd.DataFrame
    records: pd.DataFrame
    observations: pd.DataFrame
    failures: pd.DataFrame
    provenance: dict[str, Any] = field(default_factory=dict)


# =============================================================================
# Data generation
# =============================================================================


def generate_base_data(spec: ScenarioSpec, rng: RngStream) -> Dataset:
    """
    이상치 없는 기저 데이터 생성

    Args:
        spec: 시나리오 스펙 (n, betas, noise_sd)
        rng: 데이터 난수 스트림

    Returns:
        Dataset (columns: intercept, x1, x2, x3)
    """
    gen = rng.generator
    covariates = gen.uniform(0.0, 10.0, size=(spec.n, 3))
    X = np.column_stack([np.ones(spec.n), covariates])
    noise = gen.normal(0.0, 1.0, size=spec.n) * spec.noise_sd
    y = X @ np.asarray(spec.betas, dtype=float) + noise
    return Dataset(y=y, X=X, column_names=list(COLUMN_NAMES))


def inject_outliers(data: Dataset, spec: ScenarioSpec) -> Dataset:
    """
    ∗ / ⋆ 이상치 행 추가 (∗ 먼저, 그 다음 ⋆)

    x̄_k는 주입 전 원본 행 기준 평균이며 추가된 행 인덱스는 Dataset.targets에 기록된다.
    """
    if not (spec.include_ast or spec.include_star):
        return data

    means = data.X.mean(axis=0)
    rows_y: list[float] = []
    rows_X: list[np.ndarray] = []
    targets: dict[str, int] = {}

    if spec.include_ast:
        row = means.copy()
        row[2] = AST_X2
        targets[TARGET_AST] = data.n + len(rows_y)
        rows_y.append(AST_RESPONSE)
        rows_X.append(row)

    if spec.include_star:
        row = means.copy()
        row[1] = STAR_X1
        targets[TARGET_STAR] = data.n + len(rows_y)
        rows_y.append(STAR_RESPONSE)
        rows_X.append(row)

    return data.with_rows(np.array(rows_y), np.vstack(rows_X), targets)


# =============================================================================
# Replications
# =============================================================================


def _quantile_summary(values: pd.Series) -> dict[str, float]:
    arr = values.to_numpy(dtype=float)
    q_lo, median, q_hi = np.quantile(arr, [0.025, 0.5, 0.975], method="linear")
    return {
        "mean": float(arr.mean()),
        "median": float(median),
        "q2.5": float(q_lo),
        "q97.5": float(q_hi),
    }


def _run_replication(spec: ScenarioSpec, replication: int) -> tuple[list[dict], list[dict]]:
    """replication 하나: 데이터 생성 → 주입 → τ별 적합 → 리포트"""
    base_stream = replication * STREAM_STRIDE
    base = generate_base_data(spec, RngStream(spec.master_seed, base_stream))
    data = inject_outliers(base, spec).validate()

    ref_rng = RngStream(spec.master_seed, base_stream + STREAM_STRIDE - 1).generator
    reference = int(ref_rng.integers(0, spec.n))
    targets = dict(data.targets)

    fit_config = spec.fit.model_copy(update={"seed": spec.master_seed})
    fit_config = fit_config.for_tau(spec.taus[0], stream_id=base_stream + 1)
    chains_by_tau = fit_taus(data, fit_config, spec.taus)

    records: list[dict] = []
    betas: list[dict] = []
    clean = np.arange(spec.n)
    for tau, chains in chains_by_tau.items():
        report = build_report(
            chains,
            prob_rule=spec.prob_rule,
            kl_mode=KlMode.SINGLE,
            spec=spec.kde,
            kl_reference=reference,
            targets=list(targets.values()),
        )
        baseline_kl = np.delete(report.kl[clean], reference)
        record = {
            "scenario": spec.scenario,
            "replication": replication,
            "tau": tau,
            "reference": reference,
            "baseline_probability": float(report.prob[clean].mean()),
            "max_baseline_probability": float(report.prob[clean].max()),
            "baseline_kl": float(baseline_kl.mean()),
        }
        for name, index in targets.items():
            record[f"{name}_probability"] = float(report.prob[index])
            record[f"{name}_kl"] = float(report.kl[index])
            record[f"{name}_relative_kl"] = float(report.relative_kl[index])
        records.append(record)

        estimates = chains.beta_mean()
        for coef, value in zip(chains.column_names, estimates, strict=True):
            betas.append(
                {
                    "scenario": spec.scenario,
                    "replication": replication,
                    "tau": tau,
                    "coefficient": coef,
                    "estimate": float(value),
                }
            )
    return records, betas


def _run_replications(
    replications: int,
    task: Callable[[int], Any],
    scenario: int,
    workers: int,
    max_failure_rate: float,
) -> tuple[list[tuple[int, Any]], list[dict]]:
    """
    replication 병렬 실행, 실패는 기록 후 스킵, 결과는 replication 순서로 정렬

    Raises:
        StudyAbortedError: 실패 비율 > max_failure_rate
    """

    def guarded(r: int) -> tuple[int, Any, Exception | None]:
        try:
            return r, task(r), None
        except (BQRError, ValueError, np.linalg.LinAlgError) as e:
            return r, None, e

    if workers <= 1:
        outcomes = [guarded(r) for r in range(replications)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(guarded, range(replications)))

    results: list[tuple[int, Any]] = []
    failures: list[dict] = []
    for r, value, error in sorted(outcomes, key=lambda o: o[0]):
        if error is not None:
            logger.log_replication_failed(scenario, r, error)
            failures.append(
                {
                    "scenario": scenario,
                    "replication": r,
                    "error_type": type(error).__name__,
                    "error_message": str(error),
                }
            )
        else:
            results.append((r, value))

    if len(failures) > max_failure_rate * replications:
        raise StudyAbortedError(
            f"{len(failures)} of {replications} replications failed "
            f"(limit {max_failure_rate:.0%})"
        )
    return results, failures


def _provenance(spec: ScenarioSpec | CalibrationSpec) -> dict[str, Any]:
    """요약에 함께 기록하는 적합 설정"""
    return {
        "spec": spec.model_dump(mode="json"),
        "iterations": spec.fit.iterations,
        "burn_in": spec.fit.burn_in,
        "thin": spec.fit.thin,
        "prior": spec.fit.prior.model_dump(mode="json"),
    }


def run_study(spec: ScenarioSpec, workers: int = 1) -> ReplicationSummary:
    """
    이상치 주입 시나리오 실행

    Args:
        spec: 시나리오 스펙
        workers: replication 병렬 worker 수

    Returns:
        ReplicationSummary
    """
    start_time = time.time()
    results, failures = _run_replications(
        spec.replications,
        lambda r: _run_replication(spec, r),
        spec.scenario,
        workers,
        spec.max_failure_rate,
    )

    record_rows = [row for _, (records, _) in results for row in records]
    beta_rows = [row for _, (_, betas) in results for row in betas]
    records = pd.DataFrame(record_rows)
    betas = pd.DataFrame(
        beta_rows, columns=["scenario", "replication", "tau", "coefficient", "estimate"]
    )

    prob_rows: list[dict] = []
    kl_rows: list[dict] = []
    target_names = [
        name
        for name, present in ((TARGET_AST, spec.include_ast), (TARGET_STAR, spec.include_star))
        if present
    ]
    for tau in spec.taus:
        subset = records[records["tau"] == tau] if not records.empty else records
        if subset.empty:
            continue
        key = {"scenario": spec.scenario, "tau": tau}
        prob_rows.append(
            {**key, "target": TARGET_BASELINE,
             **_quantile_summary(subset["baseline_probability"])}
        )
        for name in target_names:
            prob_rows.append(
                {**key, "target": name, **_quantile_summary(subset[f"{name}_probability"])}
            )
            kl_rows.append(
                {**key, "target": name,
                 **_quantile_summary(subset[f"{name}_relative_kl"])}
            )

    logger.log_study_complete(
        f"scenario_{spec.scenario}",
        spec.replications,
        len(failures),
        round(time.time() - start_time, 3),
    )
    return ReplicationSummary(
        probabilities=pd.DataFrame(prob_rows, columns=SUMMARY_COLUMNS),
        relative_kl=pd.DataFrame(kl_rows, columns=SUMMARY_COLUMNS),
        betas=betas,
        records=records,
        failures=pd.DataFrame(
            failures, columns=["scenario", "replication", "error_type", "error_message"]
        ),
        provenance=_provenance(spec),
    )


# =============================================================================
# Calibration
# =============================================================================


def _run_calibration_replication(
    spec: CalibrationSpec, n: int, replication: int
) -> tuple[list[dict], list[dict]]:
    scenario = ScenarioSpec(n=n, taus=spec.taus, master_seed=spec.master_seed)
    base_stream = replication * STREAM_STRIDE
    data = generate_base_data(scenario, RngStream(spec.master_seed, base_stream)).validate()

    fit_config = spec.fit.model_copy(update={"seed": spec.master_seed})
    fit_config = fit_config.for_tau(spec.taus[0], stream_id=base_stream + 1)
    chains_by_tau = fit_taus(data, fit_config, spec.taus)

    records: list[dict] = []
    observations: list[dict] = []
    for tau, chains in chains_by_tau.items():
        prob = all_exceedance_probabilities(chains, spec.prob_rule)
        records.append(
            {
                "n": n,
                "replication": replication,
                "tau": tau,
                "mean_probability": float(prob.mean()),
                "max_probability": float(prob.max()),
                "flagged": int(np.sum(prob > spec.flag_threshold)),
            }
        )
        if replication == 0:
            observations.extend(
                {"n": n, "tau": tau, "row_index": i, "probability": float(p)}
                for i, p in enumerate(prob)
            )
    return records, observations


def run_calibration_study(spec: CalibrationSpec, workers: int = 1) -> CalibrationSummary:
    """
    이상치가 없을 때 P(O_i = 1) 분포

    Returns:
        CalibrationSummary
        - summary: (n, τ)별 replication 평균확률 분포 + max < threshold 비율
        - observations: 첫 replication의 관측치별 확률 (n, τ마다)
    """
    start_time = time.time()
    record_rows: list[dict] = []
    observation_rows: list[dict] = []
    failure_rows: list[dict] = []

    for n in spec.n_values:
        results, failures = _run_replications(
            spec.replications,
            lambda r, n=n: _run_calibration_replication(spec, n, r),
            0,
            workers,
            spec.max_failure_rate,
        )
        for _, (records, observations) in results:
            record_rows.extend(records)
            observation_rows.extend(observations)
        failure_rows.extend({**f, "n": n} for f in failures)

    records = pd.DataFrame(
        record_rows,
        columns=["n", "replication", "tau", "mean_probability", "max_probability", "flagged"],
    )
    summary_rows = []
    for n in spec.n_values:
        for tau in spec.taus:
            subset = records[(records["n"] == n) & (records["tau"] == tau)]
            if subset.empty:
                continue
            summary_rows.append(
                {
                    "n": n,
                    "tau": tau,
                    **_quantile_summary(subset["mean_probability"]),
                    "max_probability": float(subset["max_probability"].max()),
                    "share_below_threshold": float(
                        (subset["max_probability"] < spec.flag_threshold).mean()
                    ),
                }
            )

    logger.log_study_complete(
        "calibration",
        spec.replications * len(spec.n_values),
        len(failure_rows),
        round(time.time() - start_time, 3),
    )
    return CalibrationSummary(
        summary=pd.DataFrame(summary_rows),
        records=records,
        observations=pd.DataFrame(observation_rows),
        failures=pd.DataFrame(
            failure_rows,
            columns=["scenario", "replication", "error_type", "error_message", "n"],
        ),
        provenance=_provenance(spec),
    )
