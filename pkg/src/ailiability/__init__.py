"""Liability-risk and insurance pricing engine for AI binary classifiers."""

__version__ = "0.1.0"
