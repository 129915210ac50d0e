"""
Environment Settings
BQR_* 환경변수 (및 .env 파일) 기반 런타임 설정
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class BQRSettings(BaseSettings):
    """런타임 설정

    - BQR_THREADS: τ / replication fan-out 상한 (없으면 τ당 worker 1개)
    - BQR_LOG_LEVEL: 로그 레벨
    - BQR_OUTPUT_DIR: Dagster 스터디 결과 디렉토리
    """

    model_config = SettingsConfigDict(
        env_prefix="BQR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    threads: int | None = Field(default=None, gt=0)
    log_level: str = "INFO"
    output_dir: Path = Path("bqr_output")

    def worker_count(self, tasks: int) -> int:
        """fan-out worker 수: min(tasks, BQR_THREADS)"""
        if tasks <= 0:
            return 1
        if self.threads is None:
            return tasks
        return max(1, min(tasks, self.threads))


@lru_cache
def get_settings() -> BQRSettings:
    return BQRSettings()
