from .certificate import GainCertificate, GainParameters, TopologyReport
from .config import RunConfig
from .ensemble import (
    AgentConvergence,
    ConvergenceSummary,
    DivergentTrial,
    EnsembleConfig,
    EnsembleStats,
)
from .leader import AdmissibilityReport, AlphaFunction
from .protocol import ErrorState, FullState, NoiseModel
from .simulation import IntegratorConfig, Segment, SwitchingSchedule, TrajectoryRecord
from .topology import CouplingMatrices, DirectedTopology
