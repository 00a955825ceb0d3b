"""FastAPI service wrapping the round-handle verification engine."""
