"""Service layer - The analyses and their orchestration."""
