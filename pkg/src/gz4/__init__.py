"""Weight-4 higher Green's functions and mirror K3 period pipelines."""

__version__ = "0.1.0"
