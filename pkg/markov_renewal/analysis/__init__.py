"""Numerical operations on measure matrices, one module per pipeline stage."""
