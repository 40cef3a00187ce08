"""Two-stage temporal dependency parsing: span tagging, then tree ranking."""

__version__ = "0.1.0"
