"""
CSV / JSON I/O

- 입력: UTF-8, 헤더 1행, 콤마 구분, 소수점 '.'
- 출력: 모든 실수는 17 유효자리(%.17g)로 기록되어 재파싱 시 원래 float와 정확히 같다
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml
from pandas.errors import EmptyDataError, ParserError

from bqr.common.gibbs import Dataset
from bqr.errors import DataIngestError
from bqr.utils.logging import BQRLogger
from bqr.utils.validation import DatasetValidator

logger = BQRLogger("csv_io")

FLOAT_FORMAT = "%.17g"
INTERCEPT_COLUMN = "intercept"
DATA_DIR = Path(__file__).parent.parent / "data"


def load_csv(path: Path | str, response: str, intercept: bool = True) -> Dataset:
    """
    회귀 데이터셋 로드

    Args:
        path: CSV 파일 경로
        response: 응답변수 컬럼명
        intercept: 설계행렬 앞에 절편 컬럼 추가 여부

    Returns:
        검증된 Dataset (설명변수는 파일 컬럼 순서, 응답 컬럼 제외)

    Raises:
        DataIngestError: 빈 파일, 0행, 비숫자 값, 결측, 응답 컬럼 없음, rank 부족
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, skipinitialspace=True, encoding="utf-8")
    except EmptyDataError as e:
        raise DataIngestError(f"{path} is empty") from e
    except (ParserError, UnicodeDecodeError) as e:
        raise DataIngestError(f"Could not parse {path}: {e}") from e

    df.columns = [str(c).strip() for c in df.columns]
    predictors = [c for c in df.columns if c != response]

    validator = DatasetValidator(df).check_row_count(1).check_column_present(response)
    report = validator.validate()
    if not report.passed:
        failure = report.first_failure
        raise DataIngestError(failure.message, column=failure.column)

    validator.reset()
    for column in [response, *predictors]:
        validator.check_numeric(column)
    for column in [response, *predictors]:
        validator.check_finite(column)
    report = validator.validate()
    logger.log_validation_result(str(path), report.passed, report.summary)
    if not report.passed:
        failure = report.first_failure
        row = failure.failed_rows[0] if failure.failed_rows else None
        raise DataIngestError(failure.message, row=row, column=failure.column)

    # 문자열 → float 직접 변환 (최근접 반올림, 10진 표기 그대로 재현)
    numeric = df[[response, *predictors]].astype(float)
    y = numeric[response].to_numpy()
    X = numeric[predictors].to_numpy().reshape(len(df), len(predictors))
    names = list(predictors)
    if intercept:
        X = np.column_stack([np.ones(len(df)), X])
        names = [INTERCEPT_COLUMN, *names]

    rank_report = DatasetValidator(df).check_full_rank(X, names).validate()
    if not rank_report.passed:
        raise DataIngestError(rank_report.first_failure.message)

    data = Dataset(y=y, X=X, column_names=names).validate()
    logger.info("Dataset loaded", path=str(path), n=data.n, p=data.p, response=response)
    return data


def write_csv(frame: pd.DataFrame, path: Path | str) -> Path:
    """
    DataFrame을 고정 포맷 CSV로 저장

    Returns:
        저장된 파일 경로
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("CSV written", path=str(path), rows=len(frame))
    return path


def read_csv(path: Path | str) -> pd.DataFrame:
    """write_csv 출력 재파싱 (round-trip 정밀도)"""
    return pd.read_csv(path, float_precision="round_trip")


def tau_label(tau: float) -> str:
    """파일명용 τ 표기 (예: 0.5 → '0.5', 0.25 → '0.25')"""
    return repr(float(tau))


def write_manifest(payload: dict[str, Any], path: Path | str) -> Path:
    """실행 매니페스트 JSON 저장 (키 정렬, 재실행 시 동일 바이트)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )
    return path


def load_example(intercept: bool = True) -> Dataset:
    """
    번들 예제 데이터셋 로드 (data/gini_schema.yaml 기준)

    Raises:
        DataIngestError: 파일이 스키마의 행 수/컬럼과 다를 때
    """
    with open(DATA_DIR / "gini_schema.yaml", encoding="utf-8") as f:
        schema = yaml.safe_load(f)["dataset"]

    path = DATA_DIR / schema["file"]
    header = pd.read_csv(path, nrows=0).columns.tolist()
    expected = [column["name"] for column in schema["columns"]]
    if header != expected:
        raise DataIngestError(f"{path.name} columns {header} do not match schema {expected}")

    data = load_csv(path, schema["response"], intercept=intercept)
    if data.n != schema["rows"]:
        raise DataIngestError(f"{path.name} has {data.n} rows, schema expects {schema['rows']}")
    return data
