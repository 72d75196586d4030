"""Euler-Maruyama integration of the closed loop under a switching schedule

    d y = (alpha(t) M_sigma y + a_bar0(t) c) dt + alpha(t) G_sigma dW

with y the tracking error eps (error mode) or (x, v_hat, x0, v_bar0) (full mode).
Brownian increments come from a Philox stream keyed by (seed, trial) and are
consumed step by step, channel by channel, so a trial's path depends only on
its key and never on how trials are grouped or scheduled.
"""

import bisect
import logging
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .constants import CSV_NUMBER_FORMAT, NOISE_CHUNK_STEPS, LyapunovForm, SimulationMode
from .entities import LeaderProfile
from .errors import DivergenceError, ScheduleError
from .models import (
    AlphaFunction,
    CouplingMatrices,
    DirectedTopology,
    ErrorState,
    FullState,
    GainParameters,
    IntegratorConfig,
    NoiseModel,
    SwitchingSchedule,
    TrajectoryRecord,
)
from .leader import leader_position
from .models.simulation import TIME_SLACK, error_coordinates
from .protocol import build_sigma, error_system_matrices, full_system_matrices
from .spectral import lyapunov_matrix, solve_lyapunov
from .topology import build_coupling

logger = logging.getLogger("sde_sim")


class StepRange(NamedTuple):
    index: int
    """ 1-based topology index """
    first: int
    stop: int
    """ Steps first, ..., stop - 1 use this topology """


class BatchResult(NamedTuple):
    times: np.ndarray
    alpha: np.ndarray
    states: np.ndarray
    """ trials x samples x state dimension """
    lyapunov: np.ndarray
    """ trials x samples """
    divergent: Dict[int, float]
    """ Position in the batch -> time the state became non-finite """


def active_topology(schedule: SwitchingSchedule, t: float) -> int:
    """1-based index of the topology active at time t (segments are right-open)"""
    if t < schedule.start - TIME_SLACK or t > schedule.end + TIME_SLACK:
        raise ScheduleError(
            f"t={t} is outside the schedule [{schedule.start}, {schedule.end}]"
        )

    starts = [segment.start for segment in schedule.segments]
    position = bisect.bisect_right(starts, t + TIME_SLACK) - 1
    return schedule.segments[max(position, 0)].index


def snap_schedule(schedule: SwitchingSchedule, dt: float, steps: int) -> List[StepRange]:
    """Switching instants moved to the nearest step boundary"""
    if dt > schedule.dwell + TIME_SLACK:
        raise ScheduleError(
            f"dt={dt} exceeds the dwell time {schedule.dwell}, "
            "a step could straddle more than one switch"
        )

    horizon = schedule.start + steps * dt
    if schedule.end < horizon - max(TIME_SLACK, dt / 2):
        raise ScheduleError(
            f"Schedule ends at {schedule.end} before the horizon {horizon}"
        )

    ranges = []
    for segment in schedule.segments:
        first = int(round((segment.start - schedule.start) / dt))
        stop = min(int(round((segment.end - schedule.start) / dt)), steps)
        if stop > first:
            ranges.append(StepRange(segment.index, first, stop))
        if stop >= steps:
            break

    if ranges and ranges[-1].stop < steps:
        last = ranges[-1]
        ranges[-1] = StepRange(last.index, last.first, steps)

    return ranges


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial, keyed by (seed, trial)"""
    return np.random.Generator(np.random.Philox(key=(int(trial) << 64) | int(seed)))


def em_step(
    state: np.ndarray,
    t: float,
    dt: float,
    drift_fn: Callable[[np.ndarray, float], np.ndarray],
    diffusion_fn: Callable[[float], np.ndarray],
    rng: Optional[np.random.Generator] = None,
    increment: Optional[np.ndarray] = None,
    check_finite: bool = True,
) -> np.ndarray:
    """One Euler-Maruyama step  y + f(y, t) dt + G(t) dW

    state may be one path (d,) or a batch (B, d). increment, when given, is
    the Brownian increment (already scaled by sqrt(dt)); otherwise it is drawn
    from rng.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    loading = diffusion_fn(t)
    if increment is None:
        if rng is None:
            raise ValueError("Either rng or increment is required")
        increment = rng.standard_normal(state.shape[:-1] + (loading.shape[1],))
        increment = increment * np.sqrt(dt)

    new_state = state + drift_fn(state, t) * dt + increment @ loading.T

    if check_finite and not np.all(np.isfinite(new_state)):
        raise DivergenceError(t + dt)

    return new_state


def integrate_batch(
    config: IntegratorConfig,
    schedule: SwitchingSchedule,
    topologies: Sequence[DirectedTopology],
    alpha: AlphaFunction,
    profile: LeaderProfile,
    noise: NoiseModel,
    params: GainParameters,
    initial: ErrorState,
    trials: Sequence[int],
    couplings: Optional[Sequence[CouplingMatrices]] = None,
) -> BatchResult:
    """Integrate several independent trials side by side

    Trial r uses the stream trial_generator(config.seed, r). Divergent trials
    are frozen at zero from the step they blow up and their later samples
    are NaN.
    """
    n = topologies[0].n
    if initial.n != n:
        raise ValueError(f"Initial state is for {initial.n} followers, topologies have {n}")
    if couplings is None:
        couplings = [build_coupling(t) for t in topologies]

    dt, steps = config.dt, config.steps
    ranges = snap_schedule(schedule, dt, steps)
    t_start = schedule.start
    full = config.mode == SimulationMode.FULL_SYSTEM

    systems = {}
    for index in {r.index for r in ranges}:
        sigma = build_sigma(topologies[index - 1], noise)
        if full:
            systems[index] = full_system_matrices(couplings[index - 1], sigma, params)
        else:
            M, G = error_system_matrices(couplings[index - 1], sigma, params)
            systems[index] = (M, G, None)

    P = _lyapunov_weights(config.lyapunov, params.gamma, n, couplings)

    if full:
        leader_start = FullState.from_error(
            initial,
            x0=leader_position(alpha, profile, t_start),
            v_bar0=float(profile.nominal_velocity(t_start)),
        )
        y0 = leader_start.vector()
    else:
        y0 = np.array(initial.eps, dtype=float)

    batch = len(trials)
    channels = n * (n + 1)
    state = np.tile(y0, (batch, 1))
    generators = [trial_generator(config.seed, r) for r in trials]

    sample_steps = config.sample_steps()
    times = t_start + np.asarray(sample_steps, dtype=float) * dt
    samples = np.full((batch, len(sample_steps), len(y0)), np.nan)
    samples[:, 0] = state
    next_sample = 1

    alive = np.ones(batch, dtype=bool)
    divergent = {}
    sqrt_dt = np.sqrt(dt)
    increments = None

    logger.info(
        f"Integrating {batch} trial(s) over {steps} steps, dt={dt}, "
        f"mode={config.mode.value}, {len(ranges)} segment(s)"
    )

    for step_range in ranges:
        M, G, c = systems[step_range.index]
        logger.debug(
            f"Topology {step_range.index} on steps [{step_range.first}, {step_range.stop})"
        )

        if c is None:
            drift_fn = _error_drift(alpha, M)
        else:
            drift_fn = _full_drift(alpha, profile, M, c)
        diffusion_fn = _diffusion(alpha, G)

        for step in range(step_range.first, step_range.stop):
            offset = step % NOISE_CHUNK_STEPS
            if offset == 0:
                size = min(NOISE_CHUNK_STEPS, steps - step)
                increments = np.stack(
                    [g.standard_normal((size, channels)) for g in generators], axis=1
                )
                increments *= sqrt_dt

            t = t_start + step * dt
            state = em_step(
                state,
                t,
                dt,
                drift_fn,
                diffusion_fn,
                increment=increments[offset],
                check_finite=False,
            )

            finite = np.isfinite(state).all(axis=1)
            if not finite[alive].all():
                for position in np.flatnonzero(alive & ~finite):
                    divergent[int(position)] = t + dt
                    logger.warning(
                        f"Trial {trials[position]} diverged at t={t + dt}"
                    )
                alive &= finite
                state[~alive] = 0.0

            if next_sample < len(sample_steps) and step + 1 == sample_steps[next_sample]:
                samples[:, next_sample] = state
                samples[~alive, next_sample] = np.nan
                next_sample += 1

    errors = error_coordinates(samples, n, full)
    lyapunov = np.einsum("bsi,ij,bsj->bs", errors, P, errors)

    return BatchResult(
        times=times,
        alpha=np.asarray(alpha(times), dtype=float),
        states=samples,
        lyapunov=lyapunov,
        divergent=divergent,
    )


def run_trial(
    config: IntegratorConfig,
    schedule: SwitchingSchedule,
    topologies: Sequence[DirectedTopology],
    alpha: AlphaFunction,
    profile: LeaderProfile,
    noise: NoiseModel,
    params: GainParameters,
    initial: ErrorState,
    trial: int = 0,
    couplings: Optional[Sequence[CouplingMatrices]] = None,
) -> TrajectoryRecord:
    """One sample path, deterministic in (config.seed, trial)

    Raises DivergenceError carrying the samples recorded before the blow-up.
    """
    result = integrate_batch(
        config,
        schedule,
        topologies,
        alpha,
        profile,
        noise,
        params,
        initial,
        [trial],
        couplings=couplings,
    )

    if 0 in result.divergent:
        t = result.divergent[0]
        kept = result.times < t
        partial = _record(config.mode, initial.n, result, 0, kept)
        raise DivergenceError(t, record=partial, trial=trial)

    return _record(config.mode, initial.n, result, 0)


def _record(
    mode: SimulationMode,
    n: int,
    result: BatchResult,
    position: int,
    kept: Optional[np.ndarray] = None,
) -> TrajectoryRecord:
    if kept is None:
        kept = np.ones(len(result.times), dtype=bool)

    return TrajectoryRecord(
        mode=mode,
        n=n,
        times=result.times[kept],
        states=result.states[position][kept],
        alpha=result.alpha[kept],
        lyapunov=result.lyapunov[position][kept],
    )


def _lyapunov_weights(
    form: LyapunovForm,
    gamma: float,
    n: int,
    couplings: Sequence[CouplingMatrices],
) -> np.ndarray:
    if form == LyapunovForm.SWITCHING:
        return lyapunov_matrix(gamma, n)

    if len(couplings) != 1:
        raise ValueError(
            f"The fixed-topology Lyapunov form needs exactly one topology, got {len(couplings)}"
        )
    return lyapunov_matrix(gamma, n, solve_lyapunov(couplings[0].coupling))


def _error_drift(alpha: AlphaFunction, M: np.ndarray):
    M_T = M.T

    def drift(y: np.ndarray, t: float) -> np.ndarray:
        return alpha(t) * (y @ M_T)

    return drift


def _full_drift(alpha: AlphaFunction, profile: LeaderProfile, M: np.ndarray, c: np.ndarray):
    M_T = M.T

    def drift(y: np.ndarray, t: float) -> np.ndarray:
        return alpha(t) * (y @ M_T) + float(profile.nominal_acceleration(t)) * c

    return drift


def _diffusion(alpha: AlphaFunction, G: np.ndarray):
    def diffusion(t: float) -> np.ndarray:
        return alpha(t) * G

    return diffusion


def trajectory_header(mode: SimulationMode, n: int) -> List[str]:
    if mode == SimulationMode.ERROR_SYSTEM:
        return ["t"] + [f"eps_{i}" for i in range(1, 2 * n + 1)] + ["V"]
    return (
        ["t"]
        + [f"x_{i}" for i in range(1, n + 1)]
        + [f"vhat_{i}" for i in range(1, n + 1)]
        + ["x0", "vbar0", "V"]
    )


def write_trajectory_csv(record: TrajectoryRecord, path: Path) -> Path:
    """One row per sample"""
    columns = np.column_stack([record.times, record.states, record.lyapunov])
    write_table(Path(path), trajectory_header(record.mode, record.n), columns)
    return Path(path)


def write_table(path: Path, header: Sequence[str], columns: np.ndarray):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.atleast_2d(columns),
        fmt=CSV_NUMBER_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
    )
    logger.info(f"Wrote {len(columns)} rows to {path}")
