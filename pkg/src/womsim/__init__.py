"""Witness operator measurements: entanglement witnesses as minimal tomography."""

__version__ = "0.1.0"
