"""Time evolution of the two-level clock transition under a modulated detuning."""
