"""Vehicular ISAC beamforming: trajectory-driven radar targets, full-digital
and hybrid trade-off designs, and the experiments around them."""

__version__ = "0.1.0"
