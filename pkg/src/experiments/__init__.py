"""Figure reproduction datasets."""
