"""Hybrid homodyne/photodetection Bell tests on truncated Fock spaces."""

__version__ = "0.1.0"
