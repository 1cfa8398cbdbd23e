"""Exact 2-typical FGL arithmetic and Borel cohomology charts."""

__version__ = "0.1.0"
