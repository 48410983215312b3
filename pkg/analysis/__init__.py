"""Soft/hard weight maps, singular-part bounds and the closed-form 1-D oracle."""
