"""Independent verification paths."""
