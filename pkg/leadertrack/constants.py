import enum


class SimulationMode(enum.Enum):
    ERROR_SYSTEM = "error"
    FULL_SYSTEM = "full"


class CertificateMode(enum.Enum):
    FIXED = "fixed"
    SWITCHING = "switching"


class LyapunovForm(enum.Enum):
    SWITCHING = "switching"
    FIXED = "fixed"


class AlphaFamily(enum.Enum):
    POWER = "power"


class LeaderFamily(enum.Enum):
    CONSTANT_NOMINAL = "constant_nominal"
    SINUSOID_NOMINAL = "sinusoid_nominal"
    TABULATED = "tabulated"


class ExitCode(enum.IntEnum):
    OK = 0
    SCHEMA = 1
    HYPOTHESIS = 2
    CERTIFICATE = 3
    DIVERGENCE = 4


# Eigenvalues within this distance of zero count as "not positive"
EIGENVALUE_TOLERANCE = 1e-9

# Dense Kronecker solve is used up to this order, Bartels-Stewart above it
MAX_DENSE_LYAPUNOV_ORDER = 50

AUTO_GAIN_FACTOR = 1.05

DEFAULT_NOMINAL_VELOCITY = 2.0

# Trials are integrated in blocks of this size, whatever the worker count
TRIAL_BLOCK = 25

# Increments are drawn from each trial's stream this many steps at a time
NOISE_CHUNK_STEPS = 1000

MOVING_AVERAGE_WINDOW = 10

DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 100.0
DEFAULT_SAMPLE_STRIDE = 100
DEFAULT_TRIALS = 300

UNIFORM_NOISE_PREFIX = "uniform:"
UNIFORM_NOISE_SUFFIX = "-on-links"
AUTO_GAIN = "auto"

CSV_NUMBER_FORMAT = "%.17g"
