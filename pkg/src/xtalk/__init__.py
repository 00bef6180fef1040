"""Crosstalk noise simulation, attacks and defences on shared quantum devices."""
__version__ = "0.1.0"
