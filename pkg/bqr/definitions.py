"""
Dagster Code Location - 시뮬레이션 스터디

실행:
    dagster dev -m bqr.definitions

환경변수:
    BQR_OUTPUT_DIR: 결과 디렉토리 (기본 bqr_output)
    BQR_THREADS: replication 병렬 worker 수
    BQR_STUDY_CONFIG: 스터디 YAML 템플릿 (선택)
"""

import os

from dagster import Definitions

from bqr.assets.studies import calibration_study, scenario_study
from bqr.config.settings import get_settings
from bqr.jobs.study_jobs import calibration_job, simulation_study_job
from bqr.resources.study import StudyOutputResource, StudySettingsResource
from bqr.utils.logging import BQRLogger

logger = BQRLogger("definitions")


def build_definitions() -> Definitions:
    """스터디 asset / job / resource 를 묶은 Definitions 빌드"""
    settings = get_settings()
    resources = {
        "output": StudyOutputResource(base_dir=str(settings.output_dir)),
        "study": StudySettingsResource(
            workers=settings.threads or 1,
            config_path=os.getenv("BQR_STUDY_CONFIG", ""),
        ),
    }
    assets = [scenario_study, calibration_study]
    jobs = [simulation_study_job, calibration_job]
    logger.info("Loaded study definitions", assets=len(assets), jobs=len(jobs))
    return Definitions(assets=assets, jobs=jobs, resources=resources)


defs = build_definitions()
