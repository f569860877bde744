"""Two-qubit thermal machines driven by correlated collisional reservoirs."""

__version__ = "0.1.0"
