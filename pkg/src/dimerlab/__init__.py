"""Domino tilings of Temperleyan regions, their height functions, and the Gaussian free field."""

__version__ = "0.1.0"
