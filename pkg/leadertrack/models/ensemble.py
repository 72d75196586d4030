from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, Field


class EnsembleConfig(BaseModel):
    scenario: Any
    """ leadertrack.entities.Scenario to sample """
    trials: int = Field(..., ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2**64)
    """ Overrides the scenario's integrator seed when given """
    jobs: int = Field(1, ge=1)
    """ Worker processes; never changes the output """

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class DivergentTrial(BaseModel):
    trial: int
    t: float


class EnsembleStats(BaseModel):
    n: int
    trials: int
    """ Trials that contributed, divergent ones excluded """
    times: np.ndarray
    mean_sq_position_err: np.ndarray
    """ samples x n, mean of (x_i - x_0)^2 """
    mean_sq_velocity_err: np.ndarray
    """ samples x n, mean of (v_i - v_0)^2 """
    mean_V: np.ndarray
    se_position: np.ndarray
    se_velocity: np.ndarray
    se_V: np.ndarray
    divergent: List[DivergentTrial] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class AgentConvergence(BaseModel):
    agent: int
    """ 1-based follower index """
    position_ratio: float
    """ Final over initial mean-square position error """
    velocity_ratio: float
    position_half_time: Optional[float]
    """ First sampled time at or below 50% of the initial value """
    position_tenth_time: Optional[float]
    """ First sampled time at or below 10% of the initial value """


class ConvergenceSummary(BaseModel):
    agents: List[AgentConvergence]
    lyapunov_ratio: float
    monotone_fraction: float
    """ Share of sampled times after monotone_from where the moving average of mean_V does not increase """
    monotone_from: float
    trials: int
    divergent: List[DivergentTrial]
