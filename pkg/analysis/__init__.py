"""Fringe contrast, decay fits and line-center estimates."""
