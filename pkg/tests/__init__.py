"""Tests package for wishart-lab."""
