"""Numerical engine for the Fourier sine / Fourier cosine / Kontorovich-Lebedev polyconvolution."""

__version__ = "0.1.0"
