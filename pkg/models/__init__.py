"""
Models package for the LZRO simulator.
Contains the driven two-level Hamiltonian, qubit state and error types.
"""
