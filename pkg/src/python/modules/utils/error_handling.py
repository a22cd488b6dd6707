"""Error handling utilities shared by command-line entry points.

Maps exceptions to process exit codes and provides the logging context manager
used around each command.
"""

from __future__ import annotations

import functools
import logging
from contextlib import contextmanager
from enum import IntEnum
from typing import Any, Callable, Iterator, Optional, TypeVar

logger: logging.Logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


class ExitCode(IntEnum):
    """Process exit statuses. Each failure class has its own code."""

    OK = 0
    FAILURE = 1
    USAGE = 2
    INVARIANT_FAILURE = 3
    DIVERGED = 4
    IO_ERROR = 5


def exit_code_for(exc: BaseException) -> int:
    """Return the exit status for ``exc``.

    Exceptions may declare an ``exit_code`` attribute; ``OSError`` maps to
    ``IO_ERROR``; anything else is a generic ``FAILURE``.
    """
    code = getattr(exc, "exit_code", None)
    if code is not None:
        return int(code)
    if isinstance(exc, OSError):
        return int(ExitCode.IO_ERROR)
    return int(ExitCode.FAILURE)


@contextmanager
def error_handler(
    error_message: str,
    reraise: bool = True,
    log_level: int = logging.ERROR,
    log: Optional[logging.Logger] = None,
) -> Iterator[None]:
    """
    Context manager that logs any exception as ``"<error_message>: <exc>"``.

    Example:
        with error_handler("Failed to write report", reraise=False):
            write_report(path)
    """
    try:
        yield
    except Exception as e:
        (log or logger).log(log_level, f"{error_message}: {e}")
        if reraise:
            raise


def with_error_handling(error_message: Optional[str] = None) -> Callable[[F], F]:
    """Decorator form of ``error_handler`` that always re-raises."""

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with error_handler(error_message or f"Error in {func.__name__}"):
                return func(*args, **kwargs)

        return wrapper  # type: ignore[return-value]

    return decorator


def run_guarded(
    command: Callable[[], int],
    description: str,
    log: Optional[logging.Logger] = None,
) -> int:
    """Run ``command`` and convert an escaping exception into an exit status.

    ``command`` returns its own exit status on normal completion.
    """
    try:
        return int(command())
    except KeyboardInterrupt:
        (log or logger).error(f"{description}: interrupted")
        return int(ExitCode.FAILURE)
    except Exception as e:
        (log or logger).error(f"{description} failed: {e}")
        return exit_code_for(e)


__all__ = [
    "ExitCode",
    "exit_code_for",
    "error_handler",
    "with_error_handling",
    "run_guarded",
]
