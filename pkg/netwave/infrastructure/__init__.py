"""Settings and process-level plumbing."""
