"""Infrastructure layer - JSON input/output and the frontier cache."""
