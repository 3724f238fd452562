"""
Unit tests for the package logger: console handler, file handler and levels.
"""

import logging
from unittest.mock import patch

import pytest

from scripts.pgt_modules.utils import LOGGER_NAMESPACE, make_run_id, setup_logger

pytestmark = pytest.mark.logging


@pytest.fixture
def mock_config(tmp_path):
    with patch("scripts.pgt_modules.utils.config") as mock_config:
        mock_config.logs_dir = tmp_path / "logs"
        mock_config.log_level = "INFO"
        mock_config.log_to_file = False
        yield mock_config


class TestSetupLogger:
    def test_run_id_is_eight_characters(self):
        run_id = make_run_id()

        assert len(run_id) == 8
        assert run_id != make_run_id()

    def test_console_handler_only_by_default(self, mock_config):
        logger = setup_logger("abcd1234", command="expected")

        assert logger.name == LOGGER_NAMESPACE
        assert logger.propagate is False
        assert len(logger.handlers) == 1
        assert logger.handlers[0].level == logging.INFO

    def test_debug_level_override(self, mock_config):
        logger = setup_logger("abcd1234", level="DEBUG")

        assert logger.handlers[0].level == logging.DEBUG

    def test_repeated_setup_does_not_duplicate_handlers(self, mock_config):
        setup_logger("run1")
        logger = setup_logger("run2")

        assert len(logger.handlers) == 1

    def test_plain_stream_handler_without_rich(self, mock_config):
        logger = setup_logger("abcd1234", use_rich=False)

        assert type(logger.handlers[0]) is logging.StreamHandler

    def test_file_logging_writes_execution_log(self, mock_config):
        # Arrange
        logger = setup_logger("abcd1234", command="verify", enable_file_logging=True)

        # Act
        logging.getLogger("scripts.pgt_modules.verify").info("lemma1: 10 passed, 0 failed")
        for handler in logger.handlers:
            handler.flush()

        # Assert
        log_file = mock_config.logs_dir / "abcd1234" / "verify" / "execution.log"
        assert log_file.exists()
        content = log_file.read_text()
        assert "lemma1: 10 passed, 0 failed" in content
        assert "scripts.pgt_modules.verify - INFO" in content

    def test_config_enables_file_logging(self, mock_config):
        mock_config.log_to_file = True

        logger = setup_logger("efgh5678", command="sweep")

        assert any(isinstance(h, logging.FileHandler) for h in logger.handlers)
        for handler in logger.handlers:
            handler.close()
