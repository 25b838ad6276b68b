"""Interval predicates, interval relations and refinement checking over finite discrete time."""

__version__ = "0.1.0"
