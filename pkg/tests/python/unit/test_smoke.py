"""Smoke tests to ensure every gqkva module imports without errors."""

from importlib import import_module

import pytest

MODULES = [
    "src.python.gqkva",
    "src.python.gqkva.__main__",
    "src.python.gqkva.cli",
    "src.python.gqkva.constants",
    "src.python.gqkva.errors",
    "src.python.gqkva.verify",
    "src.python.gqkva.core.tensor",
    "src.python.gqkva.core.ops",
    "src.python.gqkva.core.tape",
    "src.python.gqkva.core.gradcheck",
    "src.python.gqkva.attention.scheme",
    "src.python.gqkva.attention.layer",
    "src.python.gqkva.attention.accounting",
    "src.python.gqkva.attention.oracle",
    "src.python.gqkva.model.config",
    "src.python.gqkva.model.vit",
    "src.python.gqkva.model.checkpoint",
    "src.python.gqkva.training.data",
    "src.python.gqkva.training.loss",
    "src.python.gqkva.training.optimizer",
    "src.python.gqkva.training.trainer",
    "src.python.gqkva.bench.timing",
    "src.python.gqkva.bench.report",
    "src.python.gqkva.bench.reference",
    "src.python.modules.logging.python_logging_framework",
    "src.python.modules.utils.error_handling",
    "src.python.modules.utils.file_operations",
]


@pytest.mark.parametrize("module_name", MODULES)
def test_module_imports(module_name):
    """Verify module can be imported without errors."""
    try:
        import_module(module_name)
    except ImportError as exc:
        pytest.fail(f"Failed to import {module_name}: {exc}")


def test_package_version():
    """The package exposes the release version."""
    package = import_module("src.python.gqkva")
    assert package.__version__ == "1.0.0"
