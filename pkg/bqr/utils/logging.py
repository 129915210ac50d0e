"""
BQR Logging Utilities
"""

import logging
import sys
from typing import Any

from dagster import get_dagster_logger


class BQRLogger:
    """적합/진단/시뮬레이션 로깅 유틸리티"""

    def __init__(self, name: str = "bqr"):
        self._name = name
        self._dagster_logger = None
        self._fallback_logger = None

    @property
    def logger(self) -> logging.Logger:
        """Dagster 로거 또는 폴백 로거 반환"""
        try:
            if self._dagster_logger is None:
                self._dagster_logger = get_dagster_logger(self._name)
            return self._dagster_logger
        except Exception:
            # Dagster 컨텍스트 외부에서 실행 시 폴백
            if self._fallback_logger is None:
                self._fallback_logger = self._create_fallback_logger()
            return self._fallback_logger

    def _create_fallback_logger(self) -> logging.Logger:
        """폴백 로거 생성 (핸들러는 최상위 "bqr" 로거에만 부착)"""
        root = logging.getLogger("bqr")
        if not root.handlers:
            handler = logging.StreamHandler(sys.stdout)
            handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
                )
            )
            root.addHandler(handler)
            if root.level == logging.NOTSET:
                root.setLevel(logging.INFO)
        if self._name == "bqr":
            return root
        return logging.getLogger(f"bqr.{self._name}")

    def info(self, message: str, **kwargs: Any) -> None:
        """INFO 레벨 로그"""
        self.logger.info(self._format_message(message, kwargs))

    def warning(self, message: str, **kwargs: Any) -> None:
        """WARNING 레벨 로그"""
        self.logger.warning(self._format_message(message, kwargs))

    def error(self, message: str, **kwargs: Any) -> None:
        """ERROR 레벨 로그"""
        self.logger.error(self._format_message(message, kwargs))

    def debug(self, message: str, **kwargs: Any) -> None:
        """DEBUG 레벨 로그"""
        self.logger.debug(self._format_message(message, kwargs))

    def _format_message(self, message: str, context: dict[str, Any]) -> str:
        """컨텍스트 정보를 포함한 메시지 포맷팅"""
        if not context:
            return message
        context_str = " | ".join(f"{k}={v}" for k, v in context.items())
        return f"{message} | {context_str}"

    def log_fit_start(self, tau: float, n: int, p: int, iterations: int) -> None:
        """Gibbs 적합 시작 로그"""
        self.info("Fit started", tau=tau, n=n, p=p, iterations=iterations)

    def log_fit_complete(
        self, tau: float, retained: int, elapsed_sec: float, sigma_mean: float
    ) -> None:
        """Gibbs 적합 완료 로그"""
        self.info(
            "Fit completed",
            tau=tau,
            retained=retained,
            elapsed_sec=elapsed_sec,
            sigma_mean=f"{sigma_mean:.6g}",
        )

    def log_report_complete(
        self, tau: float, n: int, flagged: int, max_probability: float
    ) -> None:
        """이상치 리포트 완료 로그"""
        self.info(
            "Outlier report completed",
            tau=tau,
            n=n,
            flagged=flagged,
            max_probability=f"{max_probability:.4f}",
        )

    def log_replication_failed(
        self, scenario: int, replication: int, error: Exception
    ) -> None:
        """replication 실패 로그 (스킵 후 계속 진행)"""
        self.warning(
            "Replication failed",
            scenario=scenario,
            replication=replication,
            error_type=type(error).__name__,
            error_message=str(error),
        )

    def log_study_complete(
        self, study: str, replications: int, failures: int, elapsed_sec: float
    ) -> None:
        """시뮬레이션 스터디 완료 로그"""
        self.info(
            "Study completed",
            study=study,
            replications=replications,
            failures=failures,
            elapsed_sec=elapsed_sec,
        )

    def log_validation_result(
        self, source: str, passed: bool, summary: dict[str, Any]
    ) -> None:
        """검증 결과 로그"""
        level = "info" if passed else "warning"
        getattr(self, level)(
            "Validation completed",
            **{**summary, "source": source, "passed": passed},
        )

    def log_error(self, command: str, stage: str, error: Exception) -> None:
        """에러 로그"""
        self.error(
            f"BQR error in {stage}",
            command=command,
            error_type=type(error).__name__,
            error_message=str(error),
        )


def set_log_level(level: str | int) -> None:
    """bqr / dagster 로거 레벨 일괄 설정 (CLI --log-level, BQR_LOG_LEVEL)"""
    if isinstance(level, str):
        level = level.upper()
    for name in ("bqr", "dagster"):
        logging.getLogger(name).setLevel(level)
