"""Domain layer - Metric spaces, fibrations, sections, documents and reports."""
