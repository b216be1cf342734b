"""Initialize propagators package."""
