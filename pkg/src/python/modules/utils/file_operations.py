"""Artifact file helpers: directory creation and atomic writes.

Reports, checkpoints and training logs are written through these helpers so a
reader never observes a half-written file: content goes to a sibling ``.tmp``
file which is then renamed over the target.
"""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Iterable, Union

logger = logging.getLogger(__name__)


def ensure_directory(path: Union[str, Path]) -> Path:
    """Ensure directory exists, creating it if necessary.

    Raises:
        IOError: If directory cannot be created.
    """
    dir_path = Path(path)
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
        return dir_path
    except OSError as e:
        raise IOError(f"Failed to create directory '{path}': {e}") from e


def is_writable(path: Union[str, Path]) -> bool:
    """Return True when ``path`` (a directory) exists or can be created and accepts files."""
    dir_path = Path(path)
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
        marker = dir_path / f".write_test_{int(time.time() * 1000000)}"
        marker.write_bytes(b"")
        marker.unlink()
        return True
    except OSError:
        return False


def atomic_write_bytes(path: Union[str, Path], chunks: Union[bytes, Iterable[bytes]]) -> Path:
    """Write ``chunks`` to ``path`` via a temporary sibling and an atomic rename.

    Args:
        path: Destination file. Parent directories are created.
        chunks: A single ``bytes`` object or an iterable of them, written in order.

    Returns:
        The destination path.

    Raises:
        IOError: If the write or rename fails. The temporary file is removed.
    """
    file_path = Path(path)
    ensure_directory(file_path.parent)
    temp_path = file_path.with_name(file_path.name + ".tmp")
    parts = [chunks] if isinstance(chunks, (bytes, bytearray)) else chunks
    try:
        with open(temp_path, "wb") as fh:
            for part in parts:
                fh.write(part)
        temp_path.replace(file_path)
    except OSError as e:
        temp_path.unlink(missing_ok=True)
        raise IOError(f"Failed to write '{path}': {e}") from e
    logger.debug(f"Wrote {file_path}")
    return file_path


def atomic_write_text(path: Union[str, Path], content: str, encoding: str = "utf-8") -> Path:
    """Text counterpart of ``atomic_write_bytes``. Newlines are written verbatim."""
    return atomic_write_bytes(path, content.encode(encoding))


__all__ = [
    "ensure_directory",
    "is_writable",
    "atomic_write_bytes",
    "atomic_write_text",
]
