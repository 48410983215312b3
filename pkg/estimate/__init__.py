"""Covariance estimators and periodograms for gridded data records."""
