"""Dense-matrix quantum information laboratory."""

__version__ = "0.1.0"
