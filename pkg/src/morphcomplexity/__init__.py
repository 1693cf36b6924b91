"""Measuring the paradigm-size / irregularity trade-off of inflectional systems."""

__version__ = "0.1.0"
