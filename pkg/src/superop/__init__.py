"""Initialize superop package."""
