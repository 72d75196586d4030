import json
import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import build_scenario
from .constants import (
    AUTO_GAIN_FACTOR,
    DEFAULT_TRIALS,
    MOVING_AVERAGE_WINDOW,
    TRIAL_BLOCK,
    SimulationMode,
)
from .entities import Scenario
from .models import (
    AgentConvergence,
    ConvergenceSummary,
    DirectedTopology,
    DivergentTrial,
    EnsembleConfig,
    EnsembleStats,
    IntegratorConfig,
    RunConfig,
    TrajectoryRecord,
)
from .sde_sim import BatchResult, error_coordinates, integrate_batch, run_trial, write_table
from .spectral import gain_bound_fixed, solve_lyapunov
from .topology import build_coupling

logger = logging.getLogger("experiment")

# One active leader and three followers, alternating between two digraphs
PAPER_TOPOLOGIES = [
    {"adjacency": [[0, 1, 0], [1, 0, 0], [0, 1, 0]], "leader_links": [1, 0, 0]},
    {"adjacency": [[0, 1, 0], [1, 0, 0], [0, 0, 0]], "leader_links": [1, 0, 1]},
]
PAPER_INITIAL_ERROR = [2.0, 1.0, -1.0, -0.2, -2.0, 0.2]


def paper_config(trials: int = DEFAULT_TRIALS, seed: int = 0) -> RunConfig:
    """The reference scenario: alpha = 1/(t+1), gamma = 0.8, k = 6, unit noise
    on every link, topologies switching every time unit"""
    return RunConfig.model_validate(
        {
            "topologies": PAPER_TOPOLOGIES,
            "schedule": {"order": [1, 2], "period": 1.0},
            "alpha": {"c": 1.0, "p": 1.0, "t0": 0.0},
            "leader": {"family": "constant_nominal", "params": {"value": 2.0}, "x0": 0.0},
            "noise": "uniform:1-on-links",
            "params": {"gamma": 0.8, "k": 6.0},
            "integrator": {"dt": 1e-3, "T": 100.0, "sample_stride": 100, "mode": "error"},
            "ensemble": {"M": trials, "seed": seed},
            "initial": {"eps": PAPER_INITIAL_ERROR},
        }
    )


def paper_scenario(trials: int = DEFAULT_TRIALS, seed: int = 0) -> Scenario:
    return build_scenario(paper_config(trials, seed))


def fixed_topology_config(
    margin: float = AUTO_GAIN_FACTOR, trials: int = DEFAULT_TRIALS, seed: int = 0
) -> RunConfig:
    """Reference scenario restricted to its second topology, the fixed one
    where the leader is globally reachable, with k = margin * k_min"""
    if margin <= 1.0:
        raise ValueError(f"margin must exceed 1, got {margin}")

    fixed = PAPER_TOPOLOGIES[1]
    coupling = build_coupling(DirectedTopology(**fixed))
    gamma = 0.8
    k = margin * gain_bound_fixed(solve_lyapunov(coupling.coupling), gamma)

    document = paper_config(trials, seed).model_dump(mode="json")
    document.update(topologies=[fixed], schedule=None, params={"gamma": gamma, "k": k})
    return RunConfig.model_validate(document)


def fixed_topology_scenario(
    margin: float = AUTO_GAIN_FACTOR, trials: int = DEFAULT_TRIALS, seed: int = 0
) -> Scenario:
    return build_scenario(fixed_topology_config(margin, trials, seed))


def single_trial(scenario: Scenario, trial: int = 0) -> TrajectoryRecord:
    """One realisation of the scenario; raises DivergenceError with the partial record"""
    return run_trial(
        scenario.integrator,
        scenario.schedule,
        scenario.topologies,
        scenario.alpha,
        scenario.profile,
        scenario.noise,
        scenario.params,
        scenario.initial,
        trial=trial,
        couplings=scenario.couplings,
    )


def run_ensemble(cfg: EnsembleConfig) -> EnsembleStats:
    """Sample means and standard errors over cfg.trials independent paths

    Trials are integrated in blocks of TRIAL_BLOCK and reduced in trial order,
    so the result depends on (seed, trials) only, not on cfg.jobs.
    Divergent trials are left out of every mean and listed in the result.
    """
    scenario: Scenario = cfg.scenario
    integrator = scenario.integrator
    if cfg.seed is not None:
        integrator = integrator.model_copy(update={"seed": cfg.seed})

    blocks = [
        list(range(first, min(first + TRIAL_BLOCK, cfg.trials)))
        for first in range(0, cfg.trials, TRIAL_BLOCK)
    ]
    logger.info(
        f"Running {cfg.trials} trial(s) in {len(blocks)} block(s) "
        f"on {cfg.jobs} worker(s), seed {integrator.seed}"
    )

    if cfg.jobs == 1:
        results = [_run_block(scenario, integrator, block) for block in blocks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_block, repeat(scenario), repeat(integrator), blocks))

    n = scenario.n
    full = integrator.mode == SimulationMode.FULL_SYSTEM
    position, velocity, lyapunov = [], [], []
    divergent = []

    for block, result in zip(blocks, results):
        errors = error_coordinates(result.states, n, full)
        for position_in_block, trial in enumerate(block):
            if position_in_block in result.divergent:
                divergent.append(
                    DivergentTrial(trial=trial, t=result.divergent[position_in_block])
                )
                continue
            eps = errors[position_in_block]
            position.append(eps[:, :n] ** 2)
            velocity.append((result.alpha[:, None] * eps[:, n:]) ** 2)
            lyapunov.append(result.lyapunov[position_in_block])

    if divergent:
        logger.warning(f"{len(divergent)} of {cfg.trials} trial(s) diverged")

    times = results[0].times
    if not position:
        missing = np.full((len(times), n), np.nan)
        return EnsembleStats(
            n=n,
            trials=0,
            times=times,
            mean_sq_position_err=missing,
            mean_sq_velocity_err=missing,
            mean_V=missing[:, 0],
            se_position=missing,
            se_velocity=missing,
            se_V=missing[:, 0],
            divergent=divergent,
        )

    position, velocity, lyapunov = np.stack(position), np.stack(velocity), np.stack(lyapunov)

    logger.info(f"Ensemble done, {len(position)} trial(s) contributed")

    return EnsembleStats(
        n=n,
        trials=len(position),
        times=times,
        mean_sq_position_err=position.mean(axis=0),
        mean_sq_velocity_err=velocity.mean(axis=0),
        mean_V=lyapunov.mean(axis=0),
        se_position=_standard_error(position),
        se_velocity=_standard_error(velocity),
        se_V=_standard_error(lyapunov),
        divergent=divergent,
    )


def convergence_metrics(stats: EnsembleStats, monotone_from: float = 0.0) -> ConvergenceSummary:
    """Decay ratios, 50% / 10% crossing times and monotonicity of mean_V

    The initial value is the first sample. monotone_fraction is the share of
    sampled times t >= monotone_from where the MOVING_AVERAGE_WINDOW-sample
    moving average of mean_V did not increase since the previous sample.
    """
    if len(stats.times) == 0:
        raise ValueError("Ensemble statistics hold no samples")

    agents = []
    for i in range(stats.n):
        msq_x = stats.mean_sq_position_err[:, i]
        msq_v = stats.mean_sq_velocity_err[:, i]
        agents.append(
            AgentConvergence(
                agent=i + 1,
                position_ratio=_decay_ratio(msq_x),
                velocity_ratio=_decay_ratio(msq_v),
                position_half_time=_crossing_time(stats.times, msq_x, 0.5),
                position_tenth_time=_crossing_time(stats.times, msq_x, 0.1),
            )
        )

    return ConvergenceSummary(
        agents=agents,
        lyapunov_ratio=_decay_ratio(stats.mean_V),
        monotone_fraction=_monotone_fraction(stats.times, stats.mean_V, monotone_from),
        monotone_from=monotone_from,
        trials=stats.trials,
        divergent=stats.divergent,
    )


def ensemble_header(n: int) -> List[str]:
    agents = range(1, n + 1)
    return (
        ["t"]
        + [f"msq_x_{i}" for i in agents]
        + [f"msq_v_{i}" for i in agents]
        + ["mean_V"]
        + [f"se_x_{i}" for i in agents]
        + [f"se_v_{i}" for i in agents]
        + ["se_V"]
    )


def write_ensemble_csv(stats: EnsembleStats, path: Path) -> Path:
    columns = np.column_stack(
        [
            stats.times,
            stats.mean_sq_position_err,
            stats.mean_sq_velocity_err,
            stats.mean_V,
            stats.se_position,
            stats.se_velocity,
            stats.se_V,
        ]
    )
    write_table(Path(path), ensemble_header(stats.n), columns)
    return Path(path)


def write_summary_json(summary: ConvergenceSummary, path: Path, **extra) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {**extra, **summary.model_dump(mode="json")}
    path.write_text(json.dumps(document, indent=2) + "\n")
    logger.info(f"Wrote summary to {path}")
    return path


def _run_block(scenario: Scenario, integrator: IntegratorConfig, trials: Sequence[int]) -> BatchResult:
    return integrate_batch(
        integrator,
        scenario.schedule,
        scenario.topologies,
        scenario.alpha,
        scenario.profile,
        scenario.noise,
        scenario.params,
        scenario.initial,
        trials,
        couplings=scenario.couplings,
    )


def _standard_error(samples: np.ndarray) -> np.ndarray:
    if len(samples) < 2:
        return np.zeros(samples.shape[1:])
    return samples.std(axis=0, ddof=1) / np.sqrt(len(samples))


def _decay_ratio(values: np.ndarray) -> float:
    initial, final = float(values[0]), float(values[-1])
    if initial == 0:
        return 1.0 if final == 0 else float("inf")
    return final / initial


def _crossing_time(times: np.ndarray, values: np.ndarray, fraction: float) -> Optional[float]:
    below = np.flatnonzero(values <= fraction * values[0])
    if len(below) == 0:
        return None
    return float(times[below[0]])


def _monotone_fraction(times: np.ndarray, values: np.ndarray, start: float) -> float:
    window = min(MOVING_AVERAGE_WINDOW, len(values))
    average = np.convolve(values, np.ones(window) / window, mode="valid")
    # Each average is stamped with the last sample of its window
    stamps = times[window - 1 :]

    steps = np.flatnonzero(stamps[1:] >= start) + 1
    if len(steps) == 0:
        return 1.0

    slack = 1e-12 * np.abs(average[steps - 1])
    return float(np.mean(average[steps] <= average[steps - 1] + slack))
