"""Uniform torus grids, fast-transform quadrature and grid field I/O."""
