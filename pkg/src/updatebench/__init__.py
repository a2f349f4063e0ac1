"""Batch toolchain for mining, learning and scoring method-level code updates."""

__version__ = "0.1.0"
