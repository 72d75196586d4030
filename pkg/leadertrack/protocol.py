"""Measurement model, control law with estimator, and the closed-loop fields

Noise channels are ordered (w_10, ..., w_n0, w_11, ..., w_1n, ..., w_n1, ..., w_nn):
leader links first, then follower links row by row. Every channel exists for
every topology, links that are absent just load it with zero.
"""

from typing import Tuple

import numpy as np

from .entities import LeaderProfile
from .models import (
    AlphaFunction,
    CouplingMatrices,
    DirectedTopology,
    FullState,
    GainParameters,
    NoiseModel,
)


def measure(a_ij: int, x_i: float, x_j: float, rho_ij: float, omega: float) -> float:
    """Noisy relative position z_ij = a_ij (x_i - x_j + rho_ij w_ij)"""
    return a_ij * (x_i - x_j + rho_ij * omega)


def measurement_sum(
    topo: DirectedTopology,
    noise: NoiseModel,
    x: np.ndarray,
    x0: float,
    omega: np.ndarray,
    i: int,
) -> float:
    """Sum of z_ij over the follower neighbours and the leader link of follower i

    omega is one sample of every channel, in channel order.
    """
    n = topo.n
    total = measure(
        topo.leader_links[i], x[i], x0, noise.leader_intensities[i], omega[i]
    )
    for j in range(n):
        total += measure(
            topo.adjacency[i, j],
            x[i],
            x[j],
            noise.follower_intensities[i, j],
            omega[n + i * n + j],
        )
    return float(total)


def control_and_estimator(
    z_sum: float,
    v_hat_i: float,
    alpha_t: float,
    a_bar0_t: float,
    params: GainParameters,
) -> Tuple[float, float]:
    """Control input u_i and estimator derivative for one follower

    u_i = -k alpha z_sum + alpha v_hat_i
    d v_hat_i / dt = a_bar0 - gamma k alpha z_sum
    """
    u = -params.k * alpha_t * z_sum + alpha_t * v_hat_i
    dv_hat = a_bar0_t - params.gamma * params.k * alpha_t * z_sum
    return u, dv_hat


def channel_count(n: int) -> int:
    return n * (n + 1)


def build_sigma(topo: DirectedTopology, noise: NoiseModel) -> np.ndarray:
    """Noise loading Sigma = [B Sigma_0, diag(a(1,.) Sigma_1, ..., a(n,.) Sigma_n)]"""
    n = topo.n
    if noise.n != n:
        raise ValueError(f"Noise model is for {noise.n} followers, topology has {n}")

    sigma = np.zeros((n, channel_count(n)))
    sigma[:, :n] = np.diag(topo.leader_links * noise.leader_intensities)
    for i in range(n):
        start = n + i * n
        sigma[i, start : start + n] = topo.adjacency[i] * noise.follower_intensities[i]

    return sigma


def error_system_matrices(
    coupling: CouplingMatrices, sigma: np.ndarray, params: GainParameters
) -> Tuple[np.ndarray, np.ndarray]:
    """(M, G) with F = alpha(t) M and Omega = alpha(t) G for the error system"""
    H = coupling.coupling
    n = coupling.n
    k, gamma = params.k, params.gamma

    M = np.block([[-k * H, np.eye(n)], [-gamma * k * H, np.zeros((n, n))]])
    G = np.vstack([-k * sigma, -gamma * k * sigma])
    return M, G


def full_system_matrices(
    coupling: CouplingMatrices, sigma: np.ndarray, params: GainParameters
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(M, G, c) for y = (x, v_hat, x0, v_bar0)

    The drift is alpha(t) M y + a_bar0(t) c and the diffusion alpha(t) G.
    The leader rows advance x0 by alpha v_bar0 and v_bar0 by a_bar0.
    """
    H, B = coupling.coupling, coupling.leader
    n = coupling.n
    k, gamma = params.k, params.gamma
    ones = np.ones(n)
    pinned = B @ ones

    M = np.zeros((2 * n + 2, 2 * n + 2))
    M[:n, :n] = -k * H
    M[:n, n : 2 * n] = np.eye(n)
    M[:n, 2 * n] = k * pinned
    M[n : 2 * n, :n] = -gamma * k * H
    M[n : 2 * n, 2 * n] = gamma * k * pinned
    M[2 * n, 2 * n + 1] = 1.0

    G = np.vstack([-k * sigma, -gamma * k * sigma, np.zeros((2, sigma.shape[1]))])

    c = np.zeros(2 * n + 2)
    c[n : 2 * n] = 1.0
    c[2 * n + 1] = 1.0
    return M, G, c


def error_drift(
    eps: np.ndarray,
    t: float,
    coupling: CouplingMatrices,
    alpha: AlphaFunction,
    params: GainParameters,
) -> np.ndarray:
    """F_sigma(t) eps = (-k alpha H x_bar + alpha v_err, -gamma k alpha H x_bar)"""
    n = coupling.n
    M, _ = error_system_matrices(coupling, np.zeros((n, channel_count(n))), params)
    return alpha(t) * (M @ np.asarray(eps, dtype=float))


def error_diffusion(
    t: float,
    topo: DirectedTopology,
    noise: NoiseModel,
    alpha: AlphaFunction,
    params: GainParameters,
) -> np.ndarray:
    """Omega_sigma(t), -k alpha Sigma stacked over -gamma k alpha Sigma"""
    sigma = build_sigma(topo, noise)
    return alpha(t) * np.vstack([-params.k * sigma, -params.gamma * params.k * sigma])


def full_drift(
    state: FullState,
    t: float,
    coupling: CouplingMatrices,
    alpha: AlphaFunction,
    profile: LeaderProfile,
    params: GainParameters,
) -> np.ndarray:
    """Time derivative of (x, v_hat, x0, v_bar0) without noise"""
    n = coupling.n
    M, _, c = full_system_matrices(coupling, np.zeros((n, channel_count(n))), params)
    return alpha(t) * (M @ state.vector()) + float(profile.nominal_acceleration(t)) * c


def full_diffusion(
    t: float,
    topo: DirectedTopology,
    noise: NoiseModel,
    alpha: AlphaFunction,
    params: GainParameters,
) -> np.ndarray:
    """Error-system loading for the followers, zero rows for the leader"""
    loading = error_diffusion(t, topo, noise, alpha, params)
    return np.vstack([loading, np.zeros((2, loading.shape[1]))])
