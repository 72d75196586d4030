from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..constants import (
    DEFAULT_DT,
    DEFAULT_HORIZON,
    DEFAULT_SAMPLE_STRIDE,
    LyapunovForm,
    SimulationMode,
)
from ..errors import ScheduleError

# Slack for comparing switching instants given as decimal floats
TIME_SLACK = 1e-9


class Segment(BaseModel):
    index: int = Field(..., ge=1)
    """ 1-based topology index p in P = {1, ..., N} """
    start: float
    end: float

    class Config:
        frozen = True

    @property
    def length(self) -> float:
        return self.end - self.start


class SwitchingSchedule(BaseModel):
    """Piecewise-constant switching signal sigma on [start, end]

    Segments are contiguous and right-open, every segment but a final one cut
    short by the horizon lasts at least the dwell time.
    """

    segments: List[Segment]
    dwell: float = Field(..., gt=0.0)
    topology_count: int = Field(..., ge=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _check_segments(self):
        if len(self.segments) == 0:
            raise ScheduleError("A schedule needs at least one segment")

        for position, segment in enumerate(self.segments):
            if segment.index > self.topology_count:
                raise ScheduleError(
                    f"Segment {position} uses topology {segment.index} "
                    f"but only {self.topology_count} exist"
                )
            if segment.end <= segment.start:
                raise ScheduleError(
                    f"Segment {position} is empty: [{segment.start}, {segment.end})"
                )
            is_last = position == len(self.segments) - 1
            if not is_last and segment.length < self.dwell - TIME_SLACK:
                raise ScheduleError(
                    f"Segment {position} lasts {segment.length}, "
                    f"shorter than the dwell time {self.dwell}"
                )
            if not is_last:
                following = self.segments[position + 1]
                if abs(following.start - segment.end) > TIME_SLACK:
                    raise ScheduleError(
                        f"Segments {position} and {position + 1} are not contiguous: "
                        f"{segment.end} != {following.start}"
                    )

        return self

    @property
    def start(self) -> float:
        return self.segments[0].start

    @property
    def end(self) -> float:
        return self.segments[-1].end

    @classmethod
    def alternating(
        cls,
        order: Sequence[int],
        period: float,
        horizon: float,
        topology_count: Optional[int] = None,
        start: float = 0.0,
        dwell: Optional[float] = None,
    ) -> "SwitchingSchedule":
        """Cycle through order, spending period in each topology, until horizon"""
        if period <= 0:
            raise ScheduleError(f"Switching period must be positive, got {period}")
        if len(order) == 0:
            raise ScheduleError("Switching order is empty")

        count = int(round((horizon - start) / period))
        if start + count * period < horizon - TIME_SLACK:
            count += 1

        segments = []
        for j in range(count):
            segments.append(
                Segment(
                    index=order[j % len(order)],
                    start=start + j * period,
                    end=min(start + (j + 1) * period, horizon),
                )
            )

        return cls(
            segments=segments,
            dwell=period if dwell is None else dwell,
            topology_count=max(order) if topology_count is None else topology_count,
        )


class IntegratorConfig(BaseModel):
    dt: float = Field(DEFAULT_DT, gt=0.0)
    horizon: float = Field(DEFAULT_HORIZON, gt=0.0)
    sample_stride: int = Field(DEFAULT_SAMPLE_STRIDE, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    mode: SimulationMode = SimulationMode.ERROR_SYSTEM
    lyapunov: LyapunovForm = LyapunovForm.SWITCHING

    class Config:
        frozen = True

    @property
    def steps(self) -> int:
        return max(int(round(self.horizon / self.dt)), 1)

    def sample_steps(self) -> List[int]:
        steps = list(range(0, self.steps + 1, self.sample_stride))
        if steps[-1] != self.steps:
            steps.append(self.steps)
        return steps


class TrajectoryRecord(BaseModel):
    mode: SimulationMode
    n: int
    times: np.ndarray
    states: np.ndarray
    """ One row per sample: eps in error mode, (x, v_hat, x0, v_bar0) in full mode """
    alpha: np.ndarray
    """ alpha(t) at the sample times """
    lyapunov: np.ndarray
    """ V(t) = eps^T P eps """

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode="after")
    def _check_lengths(self):
        lengths = {len(self.times), len(self.states), len(self.alpha), len(self.lyapunov)}
        if len(lengths) != 1:
            raise ValueError(f"Record columns disagree in length: {sorted(lengths)}")
        return self

    def error_states(self) -> np.ndarray:
        """eps samples, whatever the mode"""
        return error_coordinates(self.states, self.n, self.mode == SimulationMode.FULL_SYSTEM)

    def position_errors(self) -> np.ndarray:
        """x_i - x_0 per sample and follower"""
        return self.error_states()[:, : self.n]

    def velocity_errors(self) -> np.ndarray:
        """v_i - v_0 = alpha (v_hat_i - v_bar0) per sample and follower"""
        return self.alpha[:, None] * self.error_states()[:, self.n :]


def error_coordinates(states: np.ndarray, n: int, full: bool) -> np.ndarray:
    """eps from states of either layout, over the last axis"""
    if not full:
        return states
    return np.concatenate(
        [
            states[..., :n] - states[..., [2 * n]],
            states[..., n : 2 * n] - states[..., [2 * n + 1]],
        ],
        axis=-1,
    )
