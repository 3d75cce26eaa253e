from __future__ import annotations
"""Einstiegspunkt: python run_workbench.py <command> [...]"""
import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
