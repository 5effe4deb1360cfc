"""Network document parsing."""
