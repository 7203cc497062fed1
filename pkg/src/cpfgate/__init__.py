"""Numerical model of a photon-photon controlled-phase-flip gate mediated by
a single atom in a one-sided optical cavity."""

from .errors import ErrorParams
from .protocol import CPF, GateChannel, Quadrature, run_ideal, run_with_errors
from .qcore import DensityMatrix, Operator, StateVector, ket

__version__ = "0.1.0"

__all__ = ["CPF", "DensityMatrix", "ErrorParams", "GateChannel", "Operator", "Quadrature",
           "StateVector", "ket", "run_ideal", "run_with_errors"]
