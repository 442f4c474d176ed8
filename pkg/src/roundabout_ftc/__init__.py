"""Fuzzy signal control for a four-approach, two-lane roundabout."""

__version__ = "0.1.0"
