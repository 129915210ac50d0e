"""
Study Resources - 스터디 설정 및 결과 저장 (로컬 디렉토리)
"""

import json
from pathlib import Path
from typing import Any

import pandas as pd
from dagster import ConfigurableResource, InitResourceContext
from pydantic import Field

from bqr.config.config_loader import ConfigLoader
from bqr.config.fit_config import (
    CALIBRATION_TAUS,
    SCENARIO_TAUS,
    CalibrationSpec,
    FitConfig,
    ScenarioSpec,
)
from bqr.utils.csv_io import write_csv, write_manifest


class StudyOutputResource(ConfigurableResource):
    """스터디 결과 CSV/JSON을 로컬 디렉토리에 저장하는 Dagster Resource"""

    base_dir: str = Field(default="bqr_output", description="결과 루트 디렉토리")

    def setup_for_execution(self, context: InitResourceContext) -> None:
        """Resource 초기화 (루트 디렉토리 생성)"""
        Path(self.base_dir).mkdir(parents=True, exist_ok=True)

    def _build_path(self, study: str, partition: str | None, filename: str) -> Path:
        """
        결과 경로 생성

        Args:
            study: 스터디 이름 (scenario_study / calibration_study)
            partition: 파티션 키 (없으면 None)
            filename: 파일명

        Returns:
            {base_dir}/{study}/scenario={partition}/{filename}
        """
        return self.study_dir(study, partition) / filename

    def study_dir(self, study: str, partition: str | None = None) -> Path:
        """스터디(/파티션) 결과 디렉토리"""
        path = Path(self.base_dir) / study
        if partition is not None:
            path = path / f"scenario={partition}"
        return path

    def write_frame(
        self,
        df: pd.DataFrame,
        study: str,
        filename: str,
        partition: str | None = None,
    ) -> str:
        """DataFrame을 고정 포맷 CSV로 저장하고 경로 반환"""
        return str(write_csv(df, self._build_path(study, partition, filename)))

    def write_provenance(
        self, payload: dict[str, Any], study: str, partition: str | None = None
    ) -> str:
        """적합 설정(provenance) JSON 저장"""
        return str(
            write_manifest(payload, self._build_path(study, partition, "provenance.json"))
        )

    def read_provenance(self, study: str, partition: str | None = None) -> dict[str, Any]:
        path = self._build_path(study, partition, "provenance.json")
        return json.loads(path.read_text(encoding="utf-8"))


class StudySettingsResource(ConfigurableResource):
    """스터디 공통 설정 (YAML 템플릿 또는 필드값)"""

    replications: int = Field(default=20, gt=0, description="replication 수")
    master_seed: int = Field(default=0, ge=0, description="마스터 seed")
    iterations: int = Field(default=3000, gt=0)
    burn_in: int = Field(default=1000, ge=0)
    thin: int = Field(default=1, gt=0)
    workers: int = Field(default=1, gt=0, description="replication 병렬 worker 수")
    config_path: str = Field(
        default="", description="YAML 스터디 템플릿 (지정 시 fit 설정을 템플릿에서 읽음)"
    )

    def fit_config(self) -> FitConfig:
        """체인 설정 (템플릿의 fit 블록 > 필드값)"""
        base: dict[str, Any] = {}
        if self.config_path:
            base = ConfigLoader().load_raw(Path(self.config_path)).get("fit", {})
        fields = {"iterations": self.iterations, "burn_in": self.burn_in, "thin": self.thin}
        return FitConfig(**{**fields, **base, "seed": self.master_seed})

    def scenario_spec(self, scenario: int) -> ScenarioSpec:
        return ScenarioSpec.for_scenario(
            scenario,
            taus=list(SCENARIO_TAUS),
            replications=self.replications,
            master_seed=self.master_seed,
            fit=self.fit_config(),
        )

    def calibration_spec(self) -> CalibrationSpec:
        return CalibrationSpec(
            taus=list(CALIBRATION_TAUS),
            replications=self.replications,
            master_seed=self.master_seed,
            fit=self.fit_config(),
        )
