"""API layer - FastAPI route handlers."""
