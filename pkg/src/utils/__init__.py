"""Initialize utils package."""
