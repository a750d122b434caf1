"""Clock-laser frequency drift and shot-to-shot jitter."""
