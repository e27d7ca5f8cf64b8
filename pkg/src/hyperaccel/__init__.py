"""Exact two-term hypergeometric recursions and the series accelerations they give."""

__version__ = "0.1.0"
