"""Initialize models package."""
