"""Wiener-system texture identification and synthesis."""
