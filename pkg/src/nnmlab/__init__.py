"""Nonlinear normal modes of a clamped beam.

FEM simulation, stepped-sine force appropriation, and data-driven modal
identification with a physics-constrained autoencoder.
"""

__version__ = "0.1.0"
