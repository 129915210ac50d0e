"""
Configuration Loader
YAML 실행 설정을 로드하고 환경변수를 해석

지원하는 구조:
1. `run:` 키 아래의 설정
2. 최상위에 바로 작성된 설정
"""

import logging
import os
import re
from pathlib import Path
from typing import Any

import yaml

from bqr.config.fit_config import RunManifest

logger = logging.getLogger(__name__)


class ConfigLoader:
    """실행 설정 로더"""

    def __init__(self, config_dir: Path | None = None):
        """
        Args:
            config_dir: 설정 파일 디렉토리 (기본: 패키지 studies/)
        """
        self.config_dir = config_dir or Path(__file__).parent.parent / "studies"

    def _resolve_env_vars(self, value: Any) -> Any:
        """
        설정값에서 ${VAR:default} 패턴의 환경변수 해석

        Examples:
            ${BQR_SEED:7} -> 환경변수 BQR_SEED 값 또는 "7"
            ${GINI_CSV} -> 환경변수 GINI_CSV 값 또는 빈 문자열
        """
        if isinstance(value, str):
            pattern = r"\$\{([^}:]+)(?::([^}]*))?\}"

            def replacer(match: re.Match) -> str:
                var_name = match.group(1)
                default = match.group(2) if match.group(2) is not None else ""
                return os.environ.get(var_name, default)

            return re.sub(pattern, replacer, value)

        elif isinstance(value, dict):
            return {k: self._resolve_env_vars(v) for k, v in value.items()}

        elif isinstance(value, list):
            return [self._resolve_env_vars(item) for item in value]

        return value

    def load_raw(self, config_path: Path) -> dict[str, Any]:
        """
        YAML 파일을 환경변수 해석까지 마친 dict로 로드

        Args:
            config_path: YAML 설정 파일 경로 (상대경로면 config_dir 기준도 탐색)
        """
        path = Path(config_path)
        if not path.exists() and (self.config_dir / path).exists():
            path = self.config_dir / path

        with open(path, encoding="utf-8") as f:
            raw_config = yaml.safe_load(f) or {}

        # "run" 키 아래의 설정 추출
        run_data = raw_config.get("run", raw_config)
        resolved = self._resolve_env_vars(run_data)
        logger.info("Loaded run config: %s", path)
        return resolved

    def load_manifest(
        self, config_path: Path, overrides: dict[str, Any] | None = None
    ) -> RunManifest:
        """
        YAML 설정 + CLI 오버라이드로 RunManifest 생성

        Args:
            config_path: YAML 설정 파일 경로
            overrides: 우선 적용할 값 (중첩 dict는 병합)

        Returns:
            RunManifest 인스턴스
        """
        data = self.load_raw(config_path)
        if overrides:
            data = merge_overrides(data, overrides)
        return RunManifest(**data)

    def list_templates(self) -> list[Path]:
        """패키지에 포함된 설정 템플릿 목록"""
        if not self.config_dir.exists():
            return []
        return sorted(
            p for p in self.config_dir.glob("*.yaml") if not p.name.startswith("_")
        )


def merge_overrides(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """중첩 dict 병합 (overrides 우선)"""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged
