"""Thermal motional-state ensembles of lattice-trapped atoms."""
