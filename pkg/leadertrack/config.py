import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from .constants import AUTO_GAIN, AUTO_GAIN_FACTOR
from .entities import LeaderProfile, Scenario, make_profile
from .leader import check_admissible, leader_position
from .models import (
    CouplingMatrices,
    DirectedTopology,
    ErrorState,
    FullState,
    GainParameters,
    IntegratorConfig,
    NoiseModel,
    RunConfig,
    Segment,
    SwitchingSchedule,
)
from .models.config import ExplicitNoiseConfig, uniform_noise_intensity
from .spectral import minimal_gain
from .topology import build_coupling

logger = logging.getLogger("config")


def load_run_config(d: Union[Dict[str, Any], RunConfig]) -> RunConfig:
    """
    Validates a JSON document against the run schema,
    throws pydantic.ValidationError naming the offending field
    """
    if isinstance(d, RunConfig):
        return d
    return RunConfig.model_validate(d)


def read_run_config(path: Union[str, Path]) -> RunConfig:
    """Throws OSError if the file is unreadable and json.JSONDecodeError if it is not JSON"""
    with open(path) as f:
        return load_run_config(json.load(f))


def build_topologies(run_config: RunConfig) -> List[DirectedTopology]:
    return [
        DirectedTopology(adjacency=t.adjacency, leader_links=t.leader_links)
        for t in run_config.topologies
    ]


def build_schedule(run_config: RunConfig) -> SwitchingSchedule:
    """Switching signal over [0, T]; a single topology without a schedule is
    active for the whole horizon"""
    horizon = run_config.integrator.T
    count = len(run_config.topologies)
    schedule = run_config.schedule

    if schedule is None:
        return SwitchingSchedule(
            segments=[Segment(index=1, start=0.0, end=horizon)],
            dwell=horizon,
            topology_count=count,
        )

    if schedule.segments is not None:
        segments = schedule.segments
        dwell = schedule.dwell
        if dwell is None:
            lengths = [s.length for s in segments[:-1]] or [segments[-1].length]
            dwell = min(lengths)
        return SwitchingSchedule(segments=segments, dwell=dwell, topology_count=count)

    return SwitchingSchedule.alternating(
        schedule.order,
        schedule.period,
        horizon,
        topology_count=count,
        dwell=schedule.dwell,
    )


def build_noise(run_config: RunConfig) -> NoiseModel:
    noise = run_config.noise
    if isinstance(noise, ExplicitNoiseConfig):
        return NoiseModel(
            leader_intensities=noise.leader, follower_intensities=noise.followers
        )
    return NoiseModel.uniform(run_config.n, uniform_noise_intensity(noise))


def resolve_gain(run_config: RunConfig, couplings: Sequence[CouplingMatrices]) -> GainParameters:
    """Configured gains, with k = "auto" replaced by AUTO_GAIN_FACTOR * k_min

    Throws NotPositiveStable or SwitchingCertificateUnavailable when "auto"
    is asked for and the applicable bound does not exist.
    """
    gamma, k = run_config.params.gamma, run_config.params.k
    if k == AUTO_GAIN:
        k_min = minimal_gain(couplings, gamma)
        k = AUTO_GAIN_FACTOR * k_min
        logger.info(f"Resolved k=auto to {k} (k_min={k_min}, gamma={gamma})")

    return GainParameters(gamma=gamma, k=k)


def build_initial(run_config: RunConfig, profile: LeaderProfile, start: float = 0.0) -> ErrorState:
    """eps at the schedule start; x/v_hat are measured against the leader's state there"""
    initial = run_config.initial
    if initial.eps is not None:
        return ErrorState(eps=initial.eps)
    if initial.x is not None:
        state = FullState(
            x=initial.x,
            v_hat=initial.v_hat,
            x0=leader_position(run_config.alpha, profile, start),
            v_bar0=float(profile.nominal_velocity(start)),
        )
        return state.error()
    return ErrorState(eps=np.zeros(2 * run_config.n))


def build_scenario(run_config: Union[Dict[str, Any], RunConfig]) -> Scenario:
    """Resolve a run configuration into the objects the simulator consumes"""
    run_config = load_run_config(run_config)

    topologies = build_topologies(run_config)
    couplings = [build_coupling(t) for t in topologies]

    report = check_admissible(run_config.alpha)
    if not report.admissible:
        logger.warning(
            f"alpha is not admissible ({report.reason}), convergence is not guaranteed"
        )

    leader = run_config.leader
    profile = make_profile(leader.family, leader.params, leader.x0)
    schedule = build_schedule(run_config)

    integrator = IntegratorConfig(
        dt=run_config.integrator.dt,
        horizon=run_config.integrator.T,
        sample_stride=run_config.integrator.sample_stride,
        seed=run_config.ensemble.seed,
        mode=run_config.integrator.mode,
        lyapunov=run_config.integrator.lyapunov,
    )

    return Scenario(
        topologies=topologies,
        schedule=schedule,
        alpha=run_config.alpha,
        profile=profile,
        noise=build_noise(run_config),
        params=resolve_gain(run_config, couplings),
        integrator=integrator,
        initial=build_initial(run_config, profile, schedule.start),
        trials=run_config.ensemble.M,
        couplings=couplings,
    )
