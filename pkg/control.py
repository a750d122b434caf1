# JOBS sets the default number of worker processes for scenario execution.
# 1 runs everything in-process. Output is identical for every value because
# work items are reduced in a fixed (point, shot, mode) order.
# Overridden by the LZRO_JOBS environment variable or --jobs.
JOBS = 1

# ACCURACY_TARGET is the default self-convergence target of the propagator:
# halving the step must change every sampled probability by less than this.
ACCURACY_TARGET = 1e-6

# MIN_STEP is the smallest step (seconds) the propagator may choose before it
# gives up with StepTooCoarse.
MIN_STEP = 1e-10

# COUPLING_BINS caps the number of distinct couplings evolved for a thermal
# ensemble. Modes are merged into weighted coupling-quantile bins. Fewer than
# about 128 bins leave a spurious revival in the thermal Rabi contrast.
# 0 disables binning and evolves every motional mode.
COUPLING_BINS = 128

# CYCLE_DURATION is the wall-clock time (seconds) of one experimental shot,
# used to advance the laser drift between shots.
CYCLE_DURATION = 1.5

# ATOMS_PER_SHOT is the default atom number for projection noise when it is enabled.
ATOMS_PER_SHOT = 10_000

# LOG_LEVEL for the root logger configured by main.py.
LOG_LEVEL = "INFO"
