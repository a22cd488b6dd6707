"""
Unit tests for src/python/modules/logging/python_logging_framework.py

Covers both formatters, logger initialisation (console, file, root mode) and
the metadata-carrying log helpers.
"""

import json
import logging

import pytest

from src.python.modules.logging.python_logging_framework import (
    RECOMMENDED_METADATA_KEYS,
    JSONFormatter,
    SpecFormatter,
    get_logger,
    initialise_logger,
    log_debug,
    log_error,
    log_info,
    log_warning,
    validate_metadata_keys,
)


def _record(msg="Test message", metadata=None, level=logging.INFO):
    record = logging.LogRecord(
        name="test", level=level, pathname="test.py", lineno=1, msg=msg, args=(), exc_info=None
    )
    record.script_name = "gqkva"
    if metadata is not None:
        record.extra_metadata = metadata
    return record


@pytest.fixture
def isolated_logger():
    """A uniquely named logger with its handlers removed afterwards."""
    names = []

    def make(name, **kwargs):
        names.append(name)
        return initialise_logger(script_name=name, **kwargs)

    yield make
    for name in names:
        log = logging.getLogger(name)
        for handler in list(log.handlers):
            handler.close()
            log.removeHandler(handler)


# ---------------------------------------------------------------------------
# Formatters
# ---------------------------------------------------------------------------


class TestSpecFormatter:
    """Tests for SpecFormatter."""

    def test_contains_level_script_and_message(self):
        """Text lines carry the UTC timestamp, level, script and message."""
        line = SpecFormatter().format(_record())
        assert "[INFO]" in line
        assert "[gqkva]" in line
        assert line.endswith("Test message")
        assert " UTC] " in line

    def test_metadata_rendered_as_key_value(self):
        """Metadata is appended as key=value pairs with floats rounded."""
        line = SpecFormatter().format(_record(metadata={"Scheme": "MQA", "Duration": 0.1234567}))
        assert line.endswith("[Scheme=MQA Duration=0.123457]")


class TestJSONFormatter:
    """Tests for JSONFormatter."""

    def test_one_object_per_record(self):
        """Each record becomes one JSON object with an offset-aware timestamp."""
        payload = json.loads(JSONFormatter().format(_record(metadata={"Seed": 3})))
        assert payload["level"] == "INFO"
        assert payload["script"] == "gqkva"
        assert payload["message"] == "Test message"
        assert payload["metadata"] == {"Seed": 3}
        assert payload["timestamp"].endswith("+00:00")

    def test_empty_metadata(self):
        assert json.loads(JSONFormatter().format(_record()))["metadata"] == {}


# ---------------------------------------------------------------------------
# Initialisation
# ---------------------------------------------------------------------------


class TestInitialiseLogger:
    """Tests for initialise_logger."""

    def test_console_handler_only(self, isolated_logger):
        """Without a file path only the console handler is attached."""
        log = isolated_logger("gqkva-test-console")
        assert len(log.handlers) == 1
        assert isinstance(log.handlers[0], logging.StreamHandler)
        assert log.propagate is False

    def test_file_handler_receives_debug(self, tmp_path, isolated_logger):
        """The file handler records DEBUG even when the console level is higher."""
        path = tmp_path / "logs" / "run.log"
        log = isolated_logger("gqkva-test-file", log_level=logging.WARNING, log_file_path=path)
        log_debug(log, "detail", {"Step": 4})
        for handler in log.handlers:
            handler.flush()
        text = path.read_text(encoding="utf-8")
        assert "detail" in text and "Step=4" in text

    def test_json_format(self, tmp_path, isolated_logger):
        """json_format switches the file output to JSON lines."""
        path = tmp_path / "run.jsonl"
        log = isolated_logger("gqkva-test-json", json_format=True, log_file_path=path)
        log_info(log, "hello", {"Command": "count"})
        for handler in log.handlers:
            handler.flush()
        payload = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
        assert payload["metadata"] == {"Command": "count"}

    def test_unwritable_file_falls_back_to_console(self, tmp_path, isolated_logger, capsys):
        """An unusable log file path falls back to console-only logging."""
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        log = isolated_logger("gqkva-test-fallback", log_file_path=blocker / "run.log")
        assert len(log.handlers) == 1
        assert "Failed to initialise file logging" in capsys.readouterr().err

    def test_repeat_calls_do_not_duplicate_handlers(self, isolated_logger):
        """Reinitialising replaces handlers and updates the level."""
        isolated_logger("gqkva-test-repeat")
        log = isolated_logger("gqkva-test-repeat", log_level=logging.DEBUG)
        assert len(log.handlers) == 1
        assert log.level == logging.DEBUG

    def test_root_mode_propagates(self, isolated_logger):
        """configure_root attaches handlers to the root logger."""
        log = isolated_logger("gqkva-test-root", configure_root=True)
        assert log.propagate is True
        assert log.handlers == []
        assert logging.getLogger().handlers


class TestGetLogger:
    """Tests for get_logger."""

    def test_script_name_is_module_name(self):
        """The script name is the module path."""
        log = get_logger("src.python.gqkva.verify")
        assert log.script_name == "src.python.gqkva.verify"


# ---------------------------------------------------------------------------
# Metadata and helpers
# ---------------------------------------------------------------------------


class TestMetadata:
    """Tests for metadata key validation."""

    def test_recommended_keys(self):
        assert {"Scheme", "Seed", "Step", "Path"} <= RECOMMENDED_METADATA_KEYS

    def test_recommended_keys_are_silent(self, capsys):
        """Recommended keys produce no warning."""
        validate_metadata_keys({"Scheme": "MHA", "Seed": 0})
        assert capsys.readouterr().err == ""

    def test_unknown_keys_warn(self, capsys):
        """Unknown keys produce a warning on stderr."""
        validate_metadata_keys({"Colour": "red"})
        assert "Non-standard metadata keys: ['Colour']" in capsys.readouterr().err

    def test_helpers_validate_keys(self, capsys, isolated_logger):
        """The log helpers validate keys even when the record is filtered."""
        log = isolated_logger("gqkva-test-validate", log_level=logging.CRITICAL)
        log_warning(log, "odd", {"Colour": "red"})
        assert "Colour" in capsys.readouterr().err


class TestLogHelpers:
    """Tests for the log_* helpers."""

    @pytest.mark.parametrize(
        "helper,level",
        [
            (log_debug, logging.DEBUG),
            (log_info, logging.INFO),
            (log_warning, logging.WARNING),
            (log_error, logging.ERROR),
        ],
    )
    def test_level_and_metadata(self, caplog, helper, level):
        """Each helper logs at its level and attaches metadata."""
        log = get_logger("gqkva.helpers")
        with caplog.at_level(logging.DEBUG, logger="gqkva.helpers"):
            helper(log, "message", {"Scheme": "GQA-2"})
        record = caplog.records[-1]
        assert record.levelno == level
        assert record.extra_metadata == {"Scheme": "GQA-2"}
        assert record.script_name == "gqkva.helpers"
