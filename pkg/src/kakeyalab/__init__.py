"""Laboratory for Kakeya-set constructions and their Fourier-analytic uses."""

__version__ = "0.1.0"
