"""Core simulation components."""
