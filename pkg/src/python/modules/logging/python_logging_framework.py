"""
python_logging_framework.py

Structured logging helpers shared by the gqkva toolkit.

Plain-text and JSON-lines formatters with UTC millisecond timestamps, optional
metadata attached to each record, console and file handlers with a console-only
fallback, and thin ``log_*`` wrappers that carry the metadata through ``extra``.

Key Features:
- Millisecond-precision UTC timestamps
- Plain text (``key=value`` metadata) or one JSON object per line
- Console handler always, file handler on request
- Recommended metadata keys for experiment runs (scheme, seed, step, ...)
"""

from __future__ import annotations

import json
import logging
import os
import socket
import sys
from datetime import datetime, timezone
from logging import DEBUG, INFO, FileHandler, Formatter, Logger, LogRecord, StreamHandler
from pathlib import Path
from typing import Any, Dict, Optional

RECOMMENDED_METADATA_KEYS = {
    "Command",
    "Scheme",
    "Preset",
    "Seed",
    "Step",
    "Epoch",
    "Duration",
    "Path",
}


def _script_name(record: LogRecord) -> str:
    return getattr(record, "script_name", getattr(record, "name", os.path.basename(sys.argv[0])))


def _render_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class SpecFormatter(Formatter):
    """Plain-text formatter: ``[time] [level] [script] [host] [pid] message [k=v ...]``."""

    def format(self, record: LogRecord) -> str:
        dt = datetime.fromtimestamp(record.created, timezone.utc)
        timestamp = dt.strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]
        metadata = record.__dict__.get("extra_metadata", {})
        metadata_str = " ".join(f"{k}={_render_value(v)}" for k, v in metadata.items())
        line = (
            f"[{timestamp} UTC] [{record.levelname}] [{_script_name(record)}] "
            f"[{socket.gethostname()}] [{os.getpid()}] {record.getMessage()}"
        )
        return line + (f" [{metadata_str}]" if metadata_str else "")


class JSONFormatter(Formatter):
    """One JSON object per record, suitable for line-delimited log files."""

    def format(self, record: LogRecord) -> str:
        dt = datetime.fromtimestamp(record.created, timezone.utc)
        payload = {
            "timestamp": dt.isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "script": _script_name(record),
            "host": socket.gethostname(),
            "pid": os.getpid(),
            "message": record.getMessage(),
            "metadata": record.__dict__.get("extra_metadata", {}),
        }
        return json.dumps(payload, ensure_ascii=False, default=str)


def _create_file_handler(
    file_path: Path, file_level: int, formatter: Formatter
) -> FileHandler | None:
    """Create a file handler, falling back to console-only logging on failure."""
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        handler = FileHandler(file_path, encoding="utf-8")
        handler.setLevel(file_level)
        handler.setFormatter(formatter)
        return handler
    except OSError as e:
        print(f"[WARNING] Failed to initialise file logging: {e}", file=sys.stderr)
        return None


def _create_console_handler(console_level: int, formatter: Formatter) -> StreamHandler:
    handler = StreamHandler(sys.stderr)
    handler.setLevel(console_level)
    handler.setFormatter(formatter)
    return handler


def get_logger(name: str) -> Logger:
    """Return a library logger that propagates to whatever the entry point configured."""
    logger = logging.getLogger(name)
    setattr(logger, "script_name", name)
    return logger


def initialise_logger(
    script_name: str | None = None,
    log_level: int = INFO,
    json_format: bool = False,
    console_level: int | None = None,
    log_file_path: str | Path | None = None,
    file_level: int = DEBUG,
    configure_root: bool = False,
) -> Logger:
    """
    Initialise and configure a logger instance.

    Args:
        script_name: Name used in every record. Defaults to ``argv[0]``.
        log_level: Logger level (e.g. ``logging.INFO``).
        json_format: Use ``JSONFormatter`` instead of ``SpecFormatter``.
        console_level: Console handler level. Defaults to ``log_level``.
        log_file_path: Optional file to receive records at ``file_level``.
        file_level: File handler level.
        configure_root: Attach handlers to the root logger so library loggers
            obtained with ``get_logger`` share them. Existing root handlers are kept.

    Returns:
        Logger: the named logger.
    """
    script_name = script_name or os.path.basename(sys.argv[0])
    handler_console_level = log_level if console_level is None else console_level
    formatter: Formatter = JSONFormatter() if json_format else SpecFormatter()
    target = logging.getLogger() if configure_root else logging.getLogger(script_name)

    if not target.handlers:
        target.addHandler(_create_console_handler(handler_console_level, formatter))
        if log_file_path:
            file_handler = _create_file_handler(Path(log_file_path), file_level, formatter)
            if file_handler:
                target.addHandler(file_handler)
                handler_console_level = min(handler_console_level, file_level)
        target.setLevel(min(log_level, handler_console_level))
    elif not configure_root:
        target.setLevel(log_level)

    if configure_root:
        logger = logging.getLogger(script_name)
        logger.setLevel(logging.NOTSET)
        logger.propagate = True
    else:
        logger = target
        logger.propagate = False
    setattr(logger, "script_name", script_name)
    return logger


def validate_metadata_keys(metadata: Dict[str, Any]) -> None:
    """Warn on stderr when metadata uses keys outside ``RECOMMENDED_METADATA_KEYS``."""
    invalid_keys = set(metadata) - RECOMMENDED_METADATA_KEYS
    if invalid_keys:
        print(f"[WARNING] Non-standard metadata keys: {sorted(invalid_keys)}", file=sys.stderr)


def _extra(logger: Logger, metadata: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    if metadata:
        validate_metadata_keys(metadata)
    return {
        "extra_metadata": metadata or {},
        "script_name": getattr(logger, "script_name", logger.name),
    }


def log_debug(logger: Logger, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Log a DEBUG level message with optional metadata."""
    logger.debug(message, extra=_extra(logger, metadata))


def log_info(logger: Logger, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Log an INFO level message with optional metadata."""
    logger.info(message, extra=_extra(logger, metadata))


def log_warning(logger: Logger, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Log a WARNING level message with optional metadata."""
    logger.warning(message, extra=_extra(logger, metadata))


def log_error(logger: Logger, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Log an ERROR level message with optional metadata."""
    logger.error(message, extra=_extra(logger, metadata))
