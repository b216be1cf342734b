"""Initialize tests package."""
