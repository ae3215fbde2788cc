"""Kinetic chemotaxis travelling-wave solver."""
