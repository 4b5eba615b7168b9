"""Setup for pyontoevolution python package."""

from setuptools import setup

# Configuration is in pyproject.toml
setup()
