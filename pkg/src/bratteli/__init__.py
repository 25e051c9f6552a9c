"""Invariant-measure analysis for Bratteli diagrams and Vershik dynamics."""

__version__ = "0.1.0"

from .diagram import BratteliDiagram, HeightVector, StochasticMatrix
from .verdict import Status, Verdict

__all__ = ["BratteliDiagram", "HeightVector", "StochasticMatrix",
           "Status", "Verdict", "__version__"]
