"""
Dataset Validation Utilities
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from scipy.linalg import qr

# QR 피벗 기반 rank 판정 상대 허용오차
RANK_TOLERANCE = 1e-10


@dataclass
class ValidationResult:
    """검증 결과"""

    is_valid: bool
    rule_name: str
    column: str | None = None
    message: str = ""
    failed_count: int = 0
    failed_rows: list[int] = field(default_factory=list)


@dataclass
class ValidationReport:
    """전체 검증 리포트"""

    total_rows: int
    passed: bool
    results: list[ValidationResult] = field(default_factory=list)

    @property
    def failed_rules(self) -> list[ValidationResult]:
        return [r for r in self.results if not r.is_valid]

    @property
    def first_failure(self) -> ValidationResult | None:
        failed = self.failed_rules
        return failed[0] if failed else None

    @property
    def summary(self) -> dict[str, Any]:
        return {
            "total_rows": self.total_rows,
            "passed": self.passed,
            "total_rules": len(self.results),
            "passed_rules": len([r for r in self.results if r.is_valid]),
            "failed_rules": len(self.failed_rules),
        }


def numerical_rank(matrix: np.ndarray, tolerance: float = RANK_TOLERANCE) -> int:
    """
    pivoted QR로 수치 rank 계산

    |R_kk| > tolerance·|R_00| 인 대각원소 개수
    """
    if matrix.size == 0:
        return 0
    r = qr(matrix, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return 0
    return int(np.sum(diag > tolerance * diag[0]))


class DatasetValidator:
    """회귀 입력 DataFrame 검증 클래스"""

    def __init__(self, df: pd.DataFrame):
        self.df = df
        self.results: list[ValidationResult] = []

    def check_row_count(self, min_count: int = 1) -> "DatasetValidator":
        """행 수 체크"""
        row_count = len(self.df)
        is_valid = row_count >= min_count

        self.results.append(
            ValidationResult(
                is_valid=is_valid,
                rule_name="row_count",
                message=f"n={row_count} rows, at least {min_count} required"
                if not is_valid
                else "",
            )
        )
        return self

    def check_column_present(self, column: str) -> "DatasetValidator":
        """컬럼 존재 체크"""
        is_valid = column in self.df.columns

        self.results.append(
            ValidationResult(
                is_valid=is_valid,
                rule_name="column_present",
                column=column,
                message=f"Missing column '{column}'" if not is_valid else "",
            )
        )
        return self

    def check_numeric(self, column: str) -> "DatasetValidator":
        """숫자 파싱 체크 (첫 실패 행을 기록)"""
        raw = self.df[column]
        parsed = pd.to_numeric(raw, errors="coerce")
        failed_mask = parsed.isna() & raw.notna()
        failed_count = int(failed_mask.sum())
        is_valid = failed_count == 0

        self.results.append(
            ValidationResult(
                is_valid=is_valid,
                rule_name="numeric",
                column=column,
                message=f"Non-numeric value {raw[failed_mask].iloc[0]!r}"
                if not is_valid
                else "",
                failed_count=failed_count,
                failed_rows=[int(i) for i in np.flatnonzero(failed_mask.to_numpy())[:5]],
            )
        )
        return self

    def check_finite(self, column: str) -> "DatasetValidator":
        """결측/무한대 체크"""
        values = pd.to_numeric(self.df[column], errors="coerce").to_numpy(dtype=float)
        failed_mask = ~np.isfinite(values)
        failed_count = int(failed_mask.sum())
        is_valid = failed_count == 0

        self.results.append(
            ValidationResult(
                is_valid=is_valid,
                rule_name="finite",
                column=column,
                message=f"Found {failed_count} missing or infinite values"
                if not is_valid
                else "",
                failed_count=failed_count,
                failed_rows=[int(i) for i in np.flatnonzero(failed_mask)[:5]],
            )
        )
        return self

    def check_full_rank(
        self, design: np.ndarray, column_names: list[str]
    ) -> "DatasetValidator":
        """설계행렬 full column rank 체크"""
        n, p = design.shape
        rank = numerical_rank(design) if n >= p else min(n, p)
        is_valid = n >= p and rank == p

        self.results.append(
            ValidationResult(
                is_valid=is_valid,
                rule_name="full_rank",
                message=f"Design matrix with columns {column_names} has rank {rank} < p={p} (n={n})"
                if not is_valid
                else "",
            )
        )
        return self

    def validate(self) -> ValidationReport:
        """
        전체 검증 실행

        Returns:
            ValidationReport
        """
        passed = all(r.is_valid for r in self.results)

        return ValidationReport(
            total_rows=len(self.df),
            passed=passed,
            results=self.results,
        )

    def reset(self) -> "DatasetValidator":
        """검증 결과 초기화"""
        self.results = []
        return self
