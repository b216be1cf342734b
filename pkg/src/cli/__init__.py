"""Initialize cli package."""
