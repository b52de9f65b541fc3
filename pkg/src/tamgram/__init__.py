"""Compiler and analysis toolkit for the Tamgram protocol modelling language."""
from __future__ import annotations

__version__ = "0.1.0"
