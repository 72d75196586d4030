import abc
from typing import List, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import DEFAULT_NOMINAL_VELOCITY, LeaderFamily
from .models import (
    AlphaFunction,
    CouplingMatrices,
    DirectedTopology,
    ErrorState,
    GainParameters,
    IntegratorConfig,
    NoiseModel,
    SwitchingSchedule,
)
from .topology import build_coupling


class LeaderProfile(abc.ABC):
    """Nominal velocity v_bar0(t) and nominal acceleration a_bar0(t) of the leader

    The leader's velocity is v0(t) = alpha(t) v_bar0(t).
    """

    family: LeaderFamily

    def __init__(self, x0_init: float = 0.0):
        self.x0_init = float(x0_init)

    @abc.abstractmethod
    def nominal_velocity(self, t):
        pass

    @abc.abstractmethod
    def nominal_acceleration(self, t):
        pass

    def closed_form_position(self, alpha: AlphaFunction, t: float) -> Optional[float]:
        """x0(t) when the integral of alpha v_bar0 has a closed form, else None"""
        return None


class ConstantNominal(LeaderProfile):
    family = LeaderFamily.CONSTANT_NOMINAL

    def __init__(self, value: float = DEFAULT_NOMINAL_VELOCITY, x0_init: float = 0.0):
        super().__init__(x0_init)
        self.value = float(value)

    def nominal_velocity(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)[()]

    def nominal_acceleration(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def closed_form_position(self, alpha: AlphaFunction, t: float) -> Optional[float]:
        if self.value == 0:
            return self.x0_init

        shift = alpha.t0 + 1.0
        if alpha.p == 1:
            return self.x0_init + alpha.c * self.value * np.log((t + shift) / shift)

        q = 1.0 - alpha.p
        return self.x0_init + alpha.c * self.value * ((t + shift) ** q - shift**q) / q


class SinusoidNominal(LeaderProfile):
    """v_bar0(t) = offset + amplitude sin(omega t + phase)"""

    family = LeaderFamily.SINUSOID_NOMINAL

    def __init__(
        self,
        amplitude: float = 1.0,
        omega: float = 1.0,
        phase: float = 0.0,
        offset: float = 0.0,
        x0_init: float = 0.0,
    ):
        super().__init__(x0_init)
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)
        self.offset = float(offset)

    def nominal_velocity(self, t):
        return self.offset + self.amplitude * np.sin(self.omega * np.asarray(t) + self.phase)

    def nominal_acceleration(self, t):
        return (
            self.amplitude
            * self.omega
            * np.cos(self.omega * np.asarray(t) + self.phase)
        )


class TabulatedNominal(LeaderProfile):
    """Cubic spline through (times, values); a_bar0 is the spline's derivative"""

    family = LeaderFamily.TABULATED

    def __init__(self, times: Sequence[float], values: Sequence[float], x0_init: float = 0.0):
        super().__init__(x0_init)
        if len(times) < 2 or len(times) != len(values):
            raise ValueError(
                f"A tabulated profile needs matching times and values (at least 2), "
                f"got {len(times)} and {len(values)}"
            )
        self.spline = CubicSpline(np.asarray(times, dtype=float), np.asarray(values, dtype=float))
        self.derivative = self.spline.derivative()

    def nominal_velocity(self, t):
        return self.spline(t)[()]

    def nominal_acceleration(self, t):
        return self.derivative(t)[()]


def make_profile(family: LeaderFamily, params: dict, x0_init: float = 0.0) -> LeaderProfile:
    """Build a profile from its config family and parameters, raises ValueError
    if the parameters do not fit the family"""
    constructor = {
        LeaderFamily.CONSTANT_NOMINAL: ConstantNominal,
        LeaderFamily.SINUSOID_NOMINAL: SinusoidNominal,
        LeaderFamily.TABULATED: TabulatedNominal,
    }.get(family)

    if constructor is None:
        raise ValueError(f"Unknown leader family {family}")

    try:
        return constructor(x0_init=x0_init, **params)
    except TypeError as e:
        raise ValueError(f"Bad parameters {sorted(params)} for {family.value}: {e}")


class Scenario:
    """Everything one simulation run needs, resolved from a RunConfig"""

    def __init__(
        self,
        topologies: List[DirectedTopology],
        schedule: SwitchingSchedule,
        alpha: AlphaFunction,
        profile: LeaderProfile,
        noise: NoiseModel,
        params: GainParameters,
        integrator: IntegratorConfig,
        initial: ErrorState,
        trials: int = 1,
        couplings: Optional[List[CouplingMatrices]] = None,
    ):
        self.topologies = topologies
        self.couplings = couplings or [build_coupling(t) for t in topologies]
        self.schedule = schedule
        self.alpha = alpha
        self.profile = profile
        self.noise = noise
        self.params = params
        self.integrator = integrator
        self.initial = initial
        self.trials = trials

    @property
    def n(self) -> int:
        return self.topologies[0].n

    def with_integrator(self, **changes) -> "Scenario":
        """Copy with some integrator fields replaced"""
        return self.replace(integrator=self.integrator.model_copy(update=changes))

    def replace(self, **changes) -> "Scenario":
        fields = dict(
            topologies=self.topologies,
            schedule=self.schedule,
            alpha=self.alpha,
            profile=self.profile,
            noise=self.noise,
            params=self.params,
            integrator=self.integrator,
            initial=self.initial,
            trials=self.trials,
            couplings=self.couplings,
        )
        if "topologies" in changes and "couplings" not in changes:
            fields["couplings"] = None
        fields.update(changes)
        return Scenario(**fields)
