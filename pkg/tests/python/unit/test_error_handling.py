"""
Unit tests for src/python/modules/utils/error_handling.py

Exit-code mapping, the logging context manager and decorator, and the guarded
command runner used by the CLI.
"""

import logging

import pytest

from src.python.gqkva.errors import (
    CheckpointError,
    ConfigurationError,
    DimensionError,
    DivergedTrainingError,
    InvariantFailure,
    SchemeSyntaxError,
)
from src.python.modules.utils.error_handling import (
    ExitCode,
    error_handler,
    exit_code_for,
    run_guarded,
    with_error_handling,
)


class TestExitCode:
    """Tests for ExitCode."""

    def test_values(self):
        """Exit codes run from 0 to 5 in declaration order."""
        assert [int(c) for c in ExitCode] == [0, 1, 2, 3, 4, 5]


class TestExitCodeFor:
    """Tests for exit_code_for."""

    @pytest.mark.parametrize(
        "exc,code",
        [
            (ConfigurationError("bad"), ExitCode.USAGE),
            (SchemeSyntaxError("bad"), ExitCode.USAGE),
            (InvariantFailure("bad"), ExitCode.INVARIANT_FAILURE),
            (DivergedTrainingError(3), ExitCode.DIVERGED),
            (CheckpointError("bad"), ExitCode.IO_ERROR),
            (DimensionError("bad"), ExitCode.FAILURE),
            (FileNotFoundError("gone"), ExitCode.IO_ERROR),
            (RuntimeError("boom"), ExitCode.FAILURE),
        ],
    )
    def test_mapping(self, exc, code):
        """Each error class maps to its exit code."""
        assert exit_code_for(exc) == int(code)


class TestErrorHandler:
    """Tests for the error_handler context manager."""

    def test_logs_and_reraises(self, caplog):
        """The message and exception are logged and the exception propagates."""
        with caplog.at_level(logging.ERROR):
            with pytest.raises(ValueError):
                with error_handler("Failed to write report"):
                    raise ValueError("disk full")
        assert "Failed to write report: disk full" in caplog.text

    def test_swallows_when_asked(self, caplog):
        """reraise=False suppresses the exception at the requested level."""
        with caplog.at_level(logging.WARNING):
            with error_handler("Skipped", reraise=False, log_level=logging.WARNING):
                raise ValueError("nothing to do")
        assert caplog.records[-1].levelno == logging.WARNING

    def test_custom_logger(self, caplog):
        """Records go to the logger passed in."""
        log = logging.getLogger("gqkva.custom")
        with caplog.at_level(logging.ERROR, logger="gqkva.custom"):
            with error_handler("Oops", reraise=False, log=log):
                raise KeyError("k")
        assert caplog.records[-1].name == "gqkva.custom"

    def test_no_exception_is_silent(self, caplog):
        """Nothing is logged when the block succeeds."""
        with error_handler("unused"):
            pass
        assert caplog.records == []


class TestWithErrorHandling:
    """Tests for the with_error_handling decorator."""

    def test_default_message_names_function(self, caplog):
        """The default message names the wrapped function."""
        @with_error_handling()
        def load_weights():
            raise OSError("missing")

        with caplog.at_level(logging.ERROR):
            with pytest.raises(OSError):
                load_weights()
        assert "Error in load_weights: missing" in caplog.text

    def test_preserves_metadata_and_result(self):
        """The wrapper keeps the name, docstring and return value."""
        @with_error_handling("never")
        def add(a, b):
            """Adds."""
            return a + b

        assert add(2, 3) == 5
        assert add.__name__ == "add"
        assert add.__doc__ == "Adds."


class TestRunGuarded:
    """Tests for run_guarded."""

    def test_returns_command_status(self):
        """A normal return passes through unchanged."""
        assert run_guarded(lambda: 3, "verify") == 3

    def test_maps_exception_and_logs(self, caplog):
        """An escaping error is logged and mapped to its exit code."""
        def command():
            raise DivergedTrainingError(7, "loss is nan")

        with caplog.at_level(logging.ERROR):
            assert run_guarded(command, "gqkva train") == int(ExitCode.DIVERGED)
        assert "gqkva train failed: Training diverged at step 7: loss is nan" in caplog.text

    def test_interrupt_is_failure(self):
        """Ctrl-C is reported as a generic failure."""
        def command():
            raise KeyboardInterrupt

        assert run_guarded(command, "gqkva bench") == int(ExitCode.FAILURE)
