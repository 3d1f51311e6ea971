"""Compositional discovery and verification of multi-agent workflow nets."""

__version__ = "0.1.0"
