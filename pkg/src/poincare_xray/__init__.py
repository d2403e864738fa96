"""X-ray transform on the Poincaré disk: geometry, exact SVD, inversion and range tests."""

__version__ = "0.1.0"
