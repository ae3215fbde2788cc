"""Discrete velocity measures."""
