"""IrGL compiler and reference interpreter."""

__version__ = "0.1.0"
