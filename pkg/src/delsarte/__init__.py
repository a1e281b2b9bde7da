"""Delsarte linear-programming bounds for antipodal spherical codes."""

__version__ = "0.1.0"
