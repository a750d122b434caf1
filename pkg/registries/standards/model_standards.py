from scipy import constants

code_version = "0.1.0"

# physical constants (SI)
planck_h = constants.h
boltzmann_k = constants.k

# bases
basis_diabatic = "diabatic"
basis_adiabatic = "adiabatic"
basis_both = "both"

# scan axes
axis_detection_time = "detection_time"
axis_detuning = "detuning"

# sweep axes (cli)
sweep_amplitude = "amplitude"
sweep_detuning = "detuning"

# interference kinds
kind_constructive = "constructive"
kind_destructive = "destructive"

# fit models
fit_exponential = "exponential"
fit_linear = "linear"

# output formats
format_csv = "csv"
format_json = "json"

# trace / scan table standards:
col_time = "t_s"
col_detuning = "detuning_hz"
col_p_e_mean = "p_e_mean"
col_p_plus_mean = "p_plus_mean"
col_p_e_stderr = "p_e_stderr"
col_p_plus_stderr = "p_plus_stderr"
col_shots = "shots"
col_p_e = "p_e"
col_p_plus = "p_plus"
col_p_e_std = "p_e_std"
col_p_plus_std = "p_plus_std"

# contrast / fit table standards:
col_contrast = "contrast"
col_value = "value"
col_sweep_value = "sweep_value"
col_final_p_e = "final_p_e"
col_period_transfer = "period_transfer"

# floats are written with enough digits to round-trip a double
csv_float_format = "%.17g"

# ladder cap for motional quantum numbers
MAX_LADDER_LEVEL = 5000
LADDER_EXTENSION_STEP = 10
BOLTZMANN_COVERAGE = 0.999
