"""Chemoattractant and nutrient fields."""
