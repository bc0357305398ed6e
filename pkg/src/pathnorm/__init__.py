"""Weighted path norms, constructive approximation and generalization bounds
for residual ReLU networks."""

__version__ = "0.1.0"
