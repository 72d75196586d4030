"""
.. include:: ../README.md
"""

from .config import build_scenario, load_run_config
from .constants import (
    CertificateMode,
    ExitCode,
    LeaderFamily,
    LyapunovForm,
    SimulationMode,
)
from .entities import Scenario
from .errors import (
    DivergenceError,
    LeadertrackError,
    NotPositiveStable,
    NumericError,
    ScheduleError,
    SwitchingCertificateUnavailable,
)
from .experiment import (
    convergence_metrics,
    paper_config,
    paper_scenario,
    run_ensemble,
    single_trial,
    fixed_topology_scenario,
)
from .sde_sim import run_trial
