"""CSV 적재 / 저장 및 데이터셋 검증"""

import json

import numpy as np
import pandas as pd
import pytest

from bqr.utils.csv_io import (
    load_csv,
    load_example,
    read_csv,
    tau_label,
    write_csv,
    write_manifest,
)
from bqr.errors import DataIngestError
from bqr.utils.validation import DatasetValidator, numerical_rank


def write_text(tmp_path, text: str, name: str = "input.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# =============================================================================
# load_csv
# =============================================================================


class TestLoadCsv:
    def test_intercept_prepended(self, regression_csv):
        data = load_csv(regression_csv, "y")
        assert data.column_names == ["intercept", "x1", "x2"]
        assert data.n == 25
        np.testing.assert_array_equal(data.X[:, 0], np.ones(25))

    def test_without_intercept(self, regression_csv):
        data = load_csv(regression_csv, "y", intercept=False)
        assert data.column_names == ["x1", "x2"]

    def test_response_in_any_position(self, tmp_path):
        path = write_text(tmp_path, "a,y,b\n1,2,3\n2,1,5\n3,7,2\n4,4,4\n")
        data = load_csv(path, "y")
        np.testing.assert_array_equal(data.y, [2.0, 1.0, 7.0, 4.0])
        assert data.column_names == ["intercept", "a", "b"]

    def test_values_parsed_exactly(self, tmp_path):
        path = write_text(tmp_path, "y,x\n0.1,1e-3\n0.30000000000000004,2\n0.7,5\n")
        data = load_csv(path, "y")
        assert data.y[1] == 0.30000000000000004
        assert data.X[0, 1] == 1e-3

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataIngestError, match="empty"):
            load_csv(write_text(tmp_path, ""), "y")

    def test_header_only(self, tmp_path):
        with pytest.raises(DataIngestError, match="rows"):
            load_csv(write_text(tmp_path, "y,x\n"), "y")

    def test_missing_response(self, regression_csv):
        with pytest.raises(DataIngestError, match="gini") as info:
            load_csv(regression_csv, "gini")
        assert info.value.column == "gini"

    def test_non_numeric_cell_reports_location(self, tmp_path):
        path = write_text(tmp_path, "y,x1\n1,2\n2,3\n3,abc\n4,5\n")
        with pytest.raises(DataIngestError, match="abc") as info:
            load_csv(path, "y")
        assert info.value.row == 2
        assert info.value.column == "x1"

    def test_missing_cell(self, tmp_path):
        path = write_text(tmp_path, "y,x1\n1,2\n,3\n3,4\n")
        with pytest.raises(DataIngestError) as info:
            load_csv(path, "y")
        assert info.value.row == 1
        assert info.value.column == "y"

    def test_infinite_value(self, tmp_path):
        path = write_text(tmp_path, "y,x1\n1,2\n2,inf\n3,4\n")
        with pytest.raises(DataIngestError, match="infinite"):
            load_csv(path, "y")

    def test_rank_deficient_design(self, tmp_path):
        path = write_text(tmp_path, "y,a,b\n1,1,2\n2,2,4\n3,3,6\n5,4,8\n")
        with pytest.raises(DataIngestError, match="rank"):
            load_csv(path, "y")

    def test_fewer_rows_than_columns(self, tmp_path):
        path = write_text(tmp_path, "y,a,b\n1,1,2\n2,3,1\n")
        with pytest.raises(DataIngestError):
            load_csv(path, "y")


class TestExampleData:
    def test_bundled_dataset_matches_schema(self):
        data = load_example()
        assert data.n == 81
        assert data.p == 5
        assert data.column_names == ["intercept", "educ", "incpc", "y2000", "y2010"]
        assert ((data.y > 0) & (data.y < 1)).all()

    def test_year_dummies_are_exclusive(self):
        data = load_example(intercept=False)
        dummies = data.X[:, 2:]
        assert set(np.unique(dummies)) <= {0.0, 1.0}
        assert (dummies.sum(axis=1) <= 1).all()


# =============================================================================
# Writers
# =============================================================================


class TestWriters:
    def test_floats_survive_rewrite(self, tmp_path):
        values = np.random.default_rng(0).normal(size=50) * 1e-7
        frame = pd.DataFrame({"draw": np.arange(50), "value": values})
        path = write_csv(frame, tmp_path / "nested" / "out.csv")
        np.testing.assert_array_equal(read_csv(path)["value"].to_numpy(), values)

    def test_output_is_deterministic(self, tmp_path):
        frame = pd.DataFrame({"a": [0.1, 1 / 3], "b": ["x", "y"]})
        first = write_csv(frame, tmp_path / "a.csv").read_bytes()
        second = write_csv(frame, tmp_path / "b.csv").read_bytes()
        assert first == second
        assert b"\r\n" not in first

    def test_tau_label(self):
        assert tau_label(0.5) == "0.5"
        assert tau_label(0.25) == "0.25"

    def test_manifest_sorted_keys(self, tmp_path):
        path = write_manifest({"b": 1, "a": {"d": 2, "c": 3}}, tmp_path / "manifest.json")
        text = path.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": {"c": 3, "d": 2}, "b": 1}


# =============================================================================
# DatasetValidator
# =============================================================================


class TestDatasetValidator:
    def test_passing_report(self):
        df = pd.DataFrame({"y": ["1", "2"], "x": ["3", "4"]})
        report = (
            DatasetValidator(df)
            .check_row_count(1)
            .check_column_present("y")
            .check_numeric("x")
            .check_finite("x")
            .validate()
        )
        assert report.passed
        assert report.first_failure is None
        assert report.summary["total_rules"] == 4

    def test_failures_collected(self):
        df = pd.DataFrame({"x": ["1", "two", "3", None]})
        report = DatasetValidator(df).check_numeric("x").check_finite("x").validate()
        assert not report.passed
        numeric, finite = report.results
        assert numeric.failed_rows == [1]
        assert finite.failed_count == 2
        assert report.summary["failed_rules"] == 2

    def test_reset(self):
        validator = DatasetValidator(pd.DataFrame({"x": []})).check_row_count(1)
        assert not validator.validate().passed
        assert validator.reset().validate().passed

    def test_full_rank_check(self):
        df = pd.DataFrame({"x": range(4)})
        design = np.column_stack([np.ones(4), np.arange(4.0), 2 * np.arange(4.0)])
        report = DatasetValidator(df).check_full_rank(design, ["c", "a", "b"]).validate()
        assert not report.passed
        assert "rank 2" in report.first_failure.message


class TestNumericalRank:
    def test_full_rank(self):
        X = np.random.default_rng(1).normal(size=(20, 4))
        assert numerical_rank(X) == 4

    def test_collinear_columns(self):
        x = np.random.default_rng(2).normal(size=20)
        X = np.column_stack([np.ones(20), x, 3 * x - 1])
        assert numerical_rank(X) == 2

    def test_empty_and_zero(self):
        assert numerical_rank(np.zeros((0, 0))) == 0
        assert numerical_rank(np.zeros((3, 2))) == 0
