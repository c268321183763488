"""Single-image 2x superresolution with sparse mixing estimators over shearlet and wavelet frames."""

__version__ = "0.1.0"
