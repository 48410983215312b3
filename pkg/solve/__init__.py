"""Dual solvers for exact, soft-constrained and hard-constrained covariance matching."""
