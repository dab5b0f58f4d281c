"""Exact rational MIP solving with safe cutting planes and checkable certificates."""
