"""Type-level word embedding export from transformer encoders."""

__version__ = "0.1.0"
