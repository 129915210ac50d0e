"""BQRLogger 메시지 포맷 / 로그 레벨"""

import logging

import pytest

from bqr.utils.logging import BQRLogger, set_log_level


class TestBQRLogger:
    def test_context_is_appended(self):
        logger = BQRLogger("outliers")
        message = logger._format_message("Fit started", {"tau": 0.5, "n": 25})
        assert message == "Fit started | tau=0.5 | n=25"

    def test_message_without_context(self):
        assert BQRLogger()._format_message("Study completed", {}) == "Study completed"


class TestLogLevel:
    @pytest.fixture(autouse=True)
    def restore_levels(self):
        saved = {name: logging.getLogger(name).level for name in ("bqr", "dagster")}
        yield
        for name, level in saved.items():
            logging.getLogger(name).setLevel(level)

    def test_level_name_is_case_insensitive(self):
        set_log_level("debug")
        assert logging.getLogger("bqr").level == logging.DEBUG
        assert logging.getLogger("dagster").level == logging.DEBUG

    def test_numeric_level(self):
        set_log_level(logging.WARNING)
        assert logging.getLogger("bqr").level == logging.WARNING
