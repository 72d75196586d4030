import logging
from typing import Sequence, Tuple

import numpy as np
import scipy.integrate

from .entities import LeaderProfile
from .models import AdmissibilityReport, AlphaFunction

logger = logging.getLogger("leader")

QUADRATURE_TOLERANCE = 1e-12


def check_admissible(alpha: AlphaFunction) -> AdmissibilityReport:
    """Analytic test of the decomposition conditions on alpha

    For alpha = c / (t + t0 + 1)^p the integral of alpha diverges iff p <= 1
    and the integral of alpha^2 converges iff p > 1/2.
    """
    integral_diverges = alpha.p <= 1.0

    if alpha.p > 0.5:
        exponent = 2.0 * alpha.p - 1.0
        integral_alpha_squared = alpha.c**2 / (exponent * (1.0 + alpha.t0) ** exponent)
    else:
        integral_alpha_squared = float("inf")

    admissible = 0.5 < alpha.p <= 1.0
    if admissible:
        reason = "integral of alpha diverges and integral of alpha^2 converges"
    elif alpha.p <= 0.5:
        reason = f"p = {alpha.p} <= 1/2, the integral of alpha^2 diverges"
    else:
        reason = f"p = {alpha.p} > 1, the integral of alpha converges"

    return AdmissibilityReport(
        admissible=admissible,
        mu=alpha.mu,
        integral_diverges=integral_diverges,
        integral_alpha_squared=integral_alpha_squared,
        reason=reason,
    )


def leader_velocity(alpha: AlphaFunction, profile: LeaderProfile, t):
    """v0(t) = alpha(t) v_bar0(t)"""
    return alpha(t) * profile.nominal_velocity(t)


def true_acceleration(alpha: AlphaFunction, profile: LeaderProfile, t):
    """a0(t) = alpha'(t) v_bar0(t) + alpha(t) a_bar0(t)"""
    return alpha.derivative(t) * profile.nominal_velocity(t) + alpha(
        t
    ) * profile.nominal_acceleration(t)


def leader_position(alpha: AlphaFunction, profile: LeaderProfile, t: float) -> float:
    closed_form = profile.closed_form_position(alpha, t)
    if closed_form is not None:
        return float(closed_form)

    if t == 0:
        return profile.x0_init

    integral, error = scipy.integrate.quad(
        lambda s: float(leader_velocity(alpha, profile, s)),
        0.0,
        t,
        epsabs=QUADRATURE_TOLERANCE,
        epsrel=QUADRATURE_TOLERANCE,
        limit=max(200, int(10 * t)),
    )
    if error > 1e-9:
        logger.warning(f"Quadrature of v0 on [0, {t}] reports error {error}")

    return profile.x0_init + integral


def leader_state(
    alpha: AlphaFunction, profile: LeaderProfile, t: float
) -> Tuple[float, float, float]:
    """(x0(t), v0(t), a0(t)) of the leader"""
    return (
        leader_position(alpha, profile, t),
        float(leader_velocity(alpha, profile, t)),
        float(true_acceleration(alpha, profile, t)),
    )


def check_consistency(
    profile: LeaderProfile,
    times: Sequence[float],
    rtol: float = 1e-6,
    step: float = 1e-5,
) -> bool:
    """Whether d v_bar0 / dt matches a_bar0 at the given times

    Uses central differences; the tolerance is relative to max(1, |a_bar0|).
    """
    times = np.asarray(times, dtype=float)
    difference = (
        profile.nominal_velocity(times + step) - profile.nominal_velocity(times - step)
    ) / (2.0 * step)
    expected = profile.nominal_acceleration(times)
    scale = np.maximum(1.0, np.abs(expected))

    return bool(np.all(np.abs(difference - expected) <= rtol * scale))
