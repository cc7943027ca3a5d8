# Physical constants (SI)
G0 = 9.80665
R_AIR = 287.05287
GAMMA_AIR = 1.4
EARTH_RADIUS_M = 6371.0e3

# ISA reference values
ISA_T0 = 288.15
ISA_P0 = 101325.0
ISA_RHO0 = ISA_P0 / (R_AIR * ISA_T0)
ISA_LAPSE_RATE = -0.0065
ISA_TROPOPAUSE_M = 11000.0
ISA_T_TROPOPAUSE = 216.65
ISA_MAX_ALTITUDE_M = 20000.0

# Unit conversions
KT_TO_MS = 1852.0 / 3600.0
FT_TO_M = 0.3048
MIN_TO_S = 60.0
KN_TO_N = 1000.0

# Mission defaults
DEFAULT_CRUISE_LEVEL_HPA = 200.0
DEFAULT_SPEED_SCALE_MS = 250.0
DEFAULT_MAX_ARRIVAL_DEVIATION_S = 2700.0
DEFAULT_DEPARTURE_WINDOW_S = 7200.0
DEFAULT_ALPHA_T = 0.3
DEFAULT_ALPHA_F = 0.7
MIN_SEGMENT_DURATION_S = 60.0

# Formation band, in leader wingspans
FORMATION_MIN_SPACING_B = 10.0
FORMATION_MAX_SPACING_B = 20.0

MODE_TOLERANCE = 1e-2
MODE_THRESHOLD = 0.5

# Layout defaults (collocation points per interval)
DEFAULT_N1 = 12
DEFAULT_N2 = 24
DEFAULT_N3 = 12

# Wind sanity bound
MAX_WIND_COMPONENT_MS = 150.0
DEFAULT_RBF_RIDGE = 1e-8

LOG_LEVEL_ENV = 'FORMATION_LOG_LEVEL'

# Command exit codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_FAILURE = 3
EXIT_INTERNAL_ERROR = 4
