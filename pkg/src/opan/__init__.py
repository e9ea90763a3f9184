"""Classification and numerical study of constant-coefficient homogeneous operators."""

__version__ = "0.1.0"
