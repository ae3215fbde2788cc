"""Chemotactic bias parameters and tumbling rates."""
