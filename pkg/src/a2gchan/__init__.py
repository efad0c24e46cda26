"""Calibration and validation toolkit for UAV air-to-ground mmWave path-loss campaigns."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
