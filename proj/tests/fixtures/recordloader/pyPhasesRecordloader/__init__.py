"""Record loading utilities."""
