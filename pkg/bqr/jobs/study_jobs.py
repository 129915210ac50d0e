"""
Study Job Definitions
"""

from dagster import AssetSelection, define_asset_job

from bqr.hooks.study_hooks import study_failure_hook, study_success_hook
from bqr.partitions.scenarios import scenario_partitions_def

# 시나리오 1~4 (파티션별 실행)
simulation_study_job = define_asset_job(
    name="simulation_study_job",
    description="이상치 주입 시나리오 스터디",
    selection=AssetSelection.assets("scenario_study"),
    partitions_def=scenario_partitions_def,
    hooks={study_success_hook, study_failure_hook},
    tags={"study": "scenario"},
)

# 이상치 없는 calibration 스터디
calibration_job = define_asset_job(
    name="calibration_job",
    description="이상치 없는 설계의 확률 calibration 스터디",
    selection=AssetSelection.assets("calibration_study"),
    hooks={study_success_hook, study_failure_hook},
    tags={"study": "calibration"},
)
