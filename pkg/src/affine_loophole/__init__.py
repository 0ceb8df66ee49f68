"""Affine relations between quantum state classes and the detector errors that exploit them."""

__version__ = "0.1.0"
