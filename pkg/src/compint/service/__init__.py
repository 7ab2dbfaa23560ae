"""HTTP service wrapping the composition engine."""
