"""Run pyontoevolution as a module."""

from .cli import main

main()
