"""Classical workbench for predicting and benchmarking decoded quantum interferometry."""

__version__ = "0.1.0"
