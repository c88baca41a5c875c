"""Twistor constructions: pointwise linear algebra, form fields, chart sweeps and model zoo."""
