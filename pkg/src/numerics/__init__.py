"""Initialize numerics package."""
