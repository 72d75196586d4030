from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from ..constants import (
    AUTO_GAIN,
    DEFAULT_DT,
    DEFAULT_HORIZON,
    DEFAULT_SAMPLE_STRIDE,
    DEFAULT_TRIALS,
    UNIFORM_NOISE_PREFIX,
    UNIFORM_NOISE_SUFFIX,
    LeaderFamily,
    LyapunovForm,
    SimulationMode,
)
from .leader import AlphaFunction
from .simulation import Segment
from .topology import check_adjacency, check_binary


class TopologyConfig(BaseModel):
    adjacency: List[List[int]]
    leader_links: List[int]

    @field_validator("adjacency")
    @classmethod
    def _check_adjacency(cls, value):
        check_adjacency(value)
        return value

    @field_validator("leader_links")
    @classmethod
    def _check_leader_links(cls, value):
        check_binary(value, "leader_links", 1)
        return value

    @model_validator(mode="after")
    def _check_sizes(self):
        if len(self.leader_links) != len(self.adjacency):
            raise ValueError(
                f"leader_links has {len(self.leader_links)} entries "
                f"but adjacency has {len(self.adjacency)} rows"
            )
        return self


class ScheduleConfig(BaseModel):
    """Either an alternating {order, period} rule or explicit segments"""

    order: Optional[List[int]] = None
    """ 1-based topology indices, cycled """
    period: Optional[float] = Field(None, gt=0.0)
    dwell: Optional[float] = Field(None, gt=0.0)
    """ Defaults to period, or to the shortest explicit non-final segment """
    segments: Optional[List[Segment]] = None

    @model_validator(mode="after")
    def _check_form(self):
        alternating = self.order is not None or self.period is not None
        if alternating and self.segments is not None:
            raise ValueError("Give either order/period or segments, not both")
        if self.segments is None and (self.order is None or self.period is None):
            raise ValueError("An alternating schedule needs both order and period")
        if self.order is not None and (len(self.order) == 0 or min(self.order) < 1):
            raise ValueError("order must list 1-based topology indices")
        return self


class LeaderConfig(BaseModel):
    family: LeaderFamily = LeaderFamily.CONSTANT_NOMINAL
    params: Dict[str, Any] = {}
    x0: float = 0.0


class ExplicitNoiseConfig(BaseModel):
    leader: List[float]
    followers: List[List[float]]


class ParamsConfig(BaseModel):
    gamma: float = Field(..., gt=0.0, lt=1.0)
    k: Union[Literal["auto"], float] = AUTO_GAIN

    @field_validator("k")
    @classmethod
    def _check_k(cls, value):
        if value != AUTO_GAIN and value <= 0:
            raise ValueError(f"k must be positive or '{AUTO_GAIN}', got {value}")
        return value


class IntegratorSection(BaseModel):
    dt: float = Field(DEFAULT_DT, gt=0.0)
    T: float = Field(DEFAULT_HORIZON, gt=0.0)
    sample_stride: int = Field(DEFAULT_SAMPLE_STRIDE, ge=1)
    mode: SimulationMode = SimulationMode.ERROR_SYSTEM
    lyapunov: LyapunovForm = LyapunovForm.SWITCHING


class EnsembleSection(BaseModel):
    M: int = Field(DEFAULT_TRIALS, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)


class InitialConfig(BaseModel):
    """Either the error vector eps or the followers' x and v_hat"""

    eps: Optional[List[float]] = None
    x: Optional[List[float]] = None
    v_hat: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_form(self):
        physical = self.x is not None or self.v_hat is not None
        if physical and self.eps is not None:
            raise ValueError("Give either eps or x/v_hat, not both")
        if physical and (self.x is None or self.v_hat is None):
            raise ValueError("x and v_hat must be given together")
        return self


class RunConfig(BaseModel):
    topologies: List[TopologyConfig] = Field(..., min_length=1)
    schedule: Optional[ScheduleConfig] = None
    """ Required when there is more than one topology """
    alpha: AlphaFunction = AlphaFunction()
    leader: LeaderConfig = LeaderConfig()
    noise: Union[str, ExplicitNoiseConfig] = f"{UNIFORM_NOISE_PREFIX}1{UNIFORM_NOISE_SUFFIX}"
    params: ParamsConfig
    integrator: IntegratorSection = IntegratorSection()
    ensemble: EnsembleSection = EnsembleSection()
    initial: InitialConfig = InitialConfig()

    @field_validator("noise")
    @classmethod
    def _check_noise(cls, value):
        if isinstance(value, str):
            uniform_noise_intensity(value)
        return value

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = len(self.topologies[0].adjacency)
        for index, topology in enumerate(self.topologies):
            if len(topology.adjacency) != n:
                raise ValueError(
                    f"Topology {index + 1} has {len(topology.adjacency)} followers, "
                    f"topology 1 has {n}"
                )

        if self.schedule is None and len(self.topologies) > 1:
            raise ValueError("A schedule is required with more than one topology")

        if self.schedule is not None:
            used = self.schedule.order or [s.index for s in self.schedule.segments]
            if max(used) > len(self.topologies):
                raise ValueError(
                    f"Schedule uses topology {max(used)} "
                    f"but only {len(self.topologies)} are defined"
                )

        if isinstance(self.noise, ExplicitNoiseConfig):
            if len(self.noise.leader) != n or len(self.noise.followers) != n:
                raise ValueError(f"Noise intensities must be given for {n} followers")

        for name, length in (("eps", 2 * n), ("x", n), ("v_hat", n)):
            values = getattr(self.initial, name)
            if values is not None and len(values) != length:
                raise ValueError(
                    f"initial.{name} needs {length} entries, got {len(values)}"
                )

        return self

    @property
    def n(self) -> int:
        return len(self.topologies[0].adjacency)


def uniform_noise_intensity(text: str) -> float:
    """Parse 'uniform:<value>-on-links' into its intensity"""
    if not (text.startswith(UNIFORM_NOISE_PREFIX) and text.endswith(UNIFORM_NOISE_SUFFIX)):
        raise ValueError(
            f"Noise must be explicit arrays or "
            f"'{UNIFORM_NOISE_PREFIX}<value>{UNIFORM_NOISE_SUFFIX}', got '{text}'"
        )

    value = text[len(UNIFORM_NOISE_PREFIX) : -len(UNIFORM_NOISE_SUFFIX)]
    try:
        intensity = float(value)
    except ValueError:
        raise ValueError(f"Noise intensity '{value}' is not a number")

    if intensity < 0:
        raise ValueError(f"Noise intensity must be non-negative, got {intensity}")

    return intensity
