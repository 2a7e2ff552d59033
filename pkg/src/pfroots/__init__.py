"""Enumerate all AC power-flow steady states via a bilinear algebraization and homotopy continuation."""

__version__ = "0.1.0"
