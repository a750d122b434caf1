"""Clients that execute simulated measurements."""
