"""Data-quality insights for tabular data from closed-form Shapley values."""

__version__ = "0.1.0"
