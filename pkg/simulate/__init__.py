"""2-D recursive-filter field simulation and the estimation study harness."""
