"""Training application."""
