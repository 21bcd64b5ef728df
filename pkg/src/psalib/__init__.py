"""Exact chart-level computer algebra for left-symmetric products,
Lie algebroids, and skew-pairing structures on anchored bundles."""

__version__ = "0.1.0"
