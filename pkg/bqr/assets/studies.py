"""
Study Assets - 시뮬레이션 스터디를 Dagster asset으로 실행

- scenario_study: 시나리오(1~4) 파티션별 이상치 주입 스터디
- calibration_study: 이상치 없는 calibration 스터디 (n ∈ {100, 300})
"""

import time
from typing import Any

import pandas as pd
from dagster import AssetExecutionContext, MetadataValue, Output, asset

from bqr.common.simulation import run_calibration_study, run_study
from bqr.partitions.scenarios import parse_scenario_key, scenario_partitions_def
from bqr.resources.study import StudyOutputResource, StudySettingsResource
from bqr.utils.logging import BQRLogger


def _summary_metadata(df: pd.DataFrame) -> MetadataValue:
    """요약 테이블 행을 JSON 메타데이터로 변환"""
    return MetadataValue.json(
        [{k: (round(v, 6) if isinstance(v, float) else v) for k, v in row.items()}
         for row in df.to_dict(orient="records")]
    )


@asset(
    name="scenario_study",
    partitions_def=scenario_partitions_def,
    group_name="simulation",
    description="이상치 주입 시나리오별 replication 스터디 (τ ∈ {0.1, 0.5, 0.9})",
    compute_kind="numpy",
    tags={"study": "scenario"},
)
def scenario_study(
    context: AssetExecutionContext,
    output: StudyOutputResource,
    study: StudySettingsResource,
) -> Output[dict[str, Any]]:
    logger = BQRLogger("assets.scenario_study")
    start_time = time.time()

    partition = context.partition_key
    spec = study.scenario_spec(parse_scenario_key(partition))
    logger.info(
        "Scenario study started",
        scenario=spec.scenario,
        replications=spec.replications,
        master_seed=spec.master_seed,
    )

    summary = run_study(spec, workers=study.workers)

    name = "scenario_study"
    paths = {
        "probabilities": output.write_frame(summary.probabilities, name, "probabilities.csv", partition),
        "relative_kl": output.write_frame(summary.relative_kl, name, "relative_kl.csv", partition),
        "betas": output.write_frame(summary.betas, name, "betas.csv", partition),
        "replications": output.write_frame(summary.records, name, "replications.csv", partition),
        "failures": output.write_frame(summary.failures, name, "failures.csv", partition),
        "provenance": output.write_provenance(summary.provenance, name, partition),
    }
    elapsed_sec = round(time.time() - start_time, 3)

    context.log.info(
        "Scenario study completed: %s",
        partition,
        extra={
            "scenario": spec.scenario,
            "failures": len(summary.failures),
            "elapsed_sec": elapsed_sec,
        },
    )

    metadata = {
        "scenario": MetadataValue.int(spec.scenario),
        "replications": MetadataValue.int(spec.replications),
        "failures": MetadataValue.int(len(summary.failures)),
        "elapsed_sec": MetadataValue.float(elapsed_sec),
        "output_dir": MetadataValue.path(str(output.study_dir(name, partition))),
        "probabilities": _summary_metadata(summary.probabilities),
    }
    if not summary.relative_kl.empty:
        metadata["relative_kl"] = _summary_metadata(summary.relative_kl)

    return Output(
        value={"scenario": spec.scenario, "paths": paths, "failures": len(summary.failures)},
        metadata=metadata,
    )


@asset(
    name="calibration_study",
    group_name="simulation",
    description="이상치 없는 설계에서 P(O_i = 1) 분포 (τ ∈ {0.25, 0.5, 0.75})",
    compute_kind="numpy",
    tags={"study": "calibration"},
)
def calibration_study(
    context: AssetExecutionContext,
    output: StudyOutputResource,
    study: StudySettingsResource,
) -> Output[dict[str, Any]]:
    start_time = time.time()
    spec = study.calibration_spec()

    summary = run_calibration_study(spec, workers=study.workers)

    name = "calibration_study"
    paths = {
        "summary": output.write_frame(summary.summary, name, "summary.csv"),
        "replications": output.write_frame(summary.records, name, "replications.csv"),
        "observations": output.write_frame(summary.observations, name, "observations.csv"),
        "failures": output.write_frame(summary.failures, name, "failures.csv"),
        "provenance": output.write_provenance(summary.provenance, name),
    }
    elapsed_sec = round(time.time() - start_time, 3)

    context.log.info(
        "Calibration study completed",
        extra={"n_values": spec.n_values, "elapsed_sec": elapsed_sec},
    )

    return Output(
        value={"paths": paths, "failures": len(summary.failures)},
        metadata={
            "replications": MetadataValue.int(spec.replications),
            "failures": MetadataValue.int(len(summary.failures)),
            "elapsed_sec": MetadataValue.float(elapsed_sec),
            "summary": _summary_metadata(summary.summary),
        },
    )
