from setuptools import setup, find_namespace_packages
from pathlib import Path


def get_version():
    """Read version from VERSION file."""
    return Path("VERSION").read_text().strip()


setup(
    # Package name used for installation via pip
    name="gqkva",
    # Version of the package (read from VERSION file)
    version=get_version(),
    # Short description of the package
    description="Grouped query/key/value attention: schemes, micro-ViT training and benchmarks",
    # License
    license="Apache-2.0",
    # The toolkit plus the shared logging and utility modules it imports
    packages=find_namespace_packages(
        include=["src.python.gqkva*", "src.python.modules.logging", "src.python.modules.utils"]
    ),
    # Runtime dependencies
    install_requires=[
        "numpy>=2.2.0,<3.0.0",
        "tqdm>=4.68.1,<5.0.0",
    ],
    entry_points={
        "console_scripts": ["gqkva=src.python.gqkva.cli:main"],
    },
    # Metadata for PyPI or internal documentation
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    # Minimum required Python version (PEP 604 union types require 3.10+)
    python_requires=">=3.10",
)
