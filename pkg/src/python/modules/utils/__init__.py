"""Shared utility modules for the gqkva toolkit.

Error-to-exit-code mapping and atomic artifact writes used by the CLI, report
emitters and checkpoint code.
"""

__version__ = "1.0.0"
__all__ = ["error_handling", "file_operations"]
