"""Core layer - Configuration, errors and numeric helpers."""
