from propagators.midpoint_propagator import MidpointExponentialPropagator
from propagators.transfer_matrix_propagator import TransferMatrixPropagator

# We can import different propagators but the left side of the variable must remain the same.
# trace_propagator_class is instantiated per coupling with a fixed step; impulse_propagator is shared.

trace_propagator_class = MidpointExponentialPropagator
impulse_propagator = TransferMatrixPropagator()
