"""Exception hierarchy for the gqkva toolkit.

Every exception carries the process exit status the CLI should return for it.
"""

from __future__ import annotations

from ..modules.utils.error_handling import ExitCode


class GqkvaError(Exception):
    """Base class for all toolkit errors."""

    exit_code = ExitCode.FAILURE


class DimensionError(GqkvaError, ValueError):
    """Tensor shapes are incompatible with an operation or a configuration."""


class DTypeError(GqkvaError, TypeError):
    """Tensor element types differ where they must agree."""


class NonFiniteError(GqkvaError, ArithmeticError):
    """An operation produced NaN or infinity."""


class ConfigurationError(GqkvaError, ValueError):
    """A scheme, model or run configuration violates a constraint."""

    exit_code = ExitCode.USAGE


class SchemeSyntaxError(ConfigurationError):
    """A scheme string does not parse under the canonical grammar."""


class InputError(GqkvaError, ValueError):
    """Caller-supplied data is out of range (labels, datasets)."""

    exit_code = ExitCode.USAGE


class InsufficientDataError(GqkvaError, ValueError):
    """Not enough records to compute a statistic."""


class CheckpointError(GqkvaError):
    """A checkpoint or dataset file is malformed or inconsistent with its header."""

    exit_code = ExitCode.IO_ERROR


class InvariantFailure(GqkvaError):
    """One or more invariant checks failed."""

    exit_code = ExitCode.INVARIANT_FAILURE


class DivergedTrainingError(GqkvaError):
    """The training loss became non-finite."""

    exit_code = ExitCode.DIVERGED

    def __init__(self, step: int, detail: str = "") -> None:
        self.step = step
        message = f"Training diverged at step {step}"
        super().__init__(f"{message}: {detail}" if detail else message)
