"""Initialize hilbert package."""
