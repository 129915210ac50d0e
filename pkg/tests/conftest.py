"""
공용 pytest fixtures
"""

import numpy as np
import pandas as pd
import pytest

from bqr.common.ald import QuantileLevel
from bqr.common.gibbs import Dataset, PosteriorChains
from bqr.common.rng import RngStream
from bqr.common.simulation import generate_base_data
from bqr.config.fit_config import FitConfig, ScenarioSpec
from bqr.utils.csv_io import write_csv


def make_chains(v: np.ndarray, tau: float = 0.5) -> PosteriorChains:
    """잠재변수 행렬(M×n)만으로 PosteriorChains 생성"""
    v = np.asarray(v, dtype=float)
    M = v.shape[0]
    return PosteriorChains(
        beta=np.zeros((M, 1)),
        sigma=np.ones(M),
        v=v,
        tau=QuantileLevel(tau),
        column_names=["intercept"],
    )


def linear_dataset(
    n: int, seed: int = 1, intercept: float = 1.0, slope: float = 2.0
) -> Dataset:
    """y = intercept + slope·x + N(0, 1),  x ~ U(−5, 5)"""
    gen = np.random.default_rng(seed)
    x = gen.uniform(-5.0, 5.0, size=n)
    y = intercept + slope * x + gen.standard_normal(n)
    X = np.column_stack([np.ones(n), x])
    return Dataset(y=y, X=X, column_names=["intercept", "x"])


@pytest.fixture
def small_config() -> FitConfig:
    """빠른 테스트용 짧은 체인 (M = 200)"""
    return FitConfig(iterations=400, burn_in=200, seed=11)


@pytest.fixture
def linear_data() -> Dataset:
    return linear_dataset(200)


@pytest.fixture
def toy_chains() -> PosteriorChains:
    """n = 3, M = 4 (손으로 열거 가능한 비교)"""
    v = np.array(
        [
            [1.0, 2.0, 0.5],
            [5.0, 4.0, 0.1],
            [3.0, 4.0, 1.0],
            [2.0, 1.0, 0.2],
        ]
    )
    return make_chains(v)


@pytest.fixture
def regression_csv(tmp_path):
    """CLI / ingest 테스트용 작은 CSV (n = 25)"""
    gen = np.random.default_rng(5)
    x1 = gen.uniform(0.0, 10.0, size=25)
    x2 = gen.uniform(0.0, 10.0, size=25)
    y = 1.0 + 0.5 * x1 - 0.3 * x2 + gen.standard_normal(25)
    path = tmp_path / "data.csv"
    pd.DataFrame({"y": y, "x1": x1, "x2": x2}).to_csv(path, index=False)
    return path


@pytest.fixture
def clean_scenario_csv(tmp_path):
    """이상치 없는 시나리오 1 데이터 CSV (n = 100, y + x1..x3)"""
    data = generate_base_data(ScenarioSpec(n=100), RngStream(2024))
    frame = pd.DataFrame(data.X[:, 1:], columns=data.column_names[1:])
    frame.insert(0, "y", data.y)
    path = tmp_path / "scenario1.csv"
    write_csv(frame, path)
    return path
