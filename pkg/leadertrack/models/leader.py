import numpy as np
from pydantic import BaseModel, Field

from ..constants import AlphaFamily


class AlphaFunction(BaseModel):
    """Decreasing gain alpha(t) = c / (t + t0 + 1)^p for t >= 0"""

    family: AlphaFamily = AlphaFamily.POWER
    c: float = Field(1.0, gt=0.0)
    p: float = 1.0
    t0: float = Field(0.0, ge=0.0)

    class Config:
        frozen = True

    def __call__(self, t):
        return self.c / np.power(np.add(t, self.t0 + 1.0), self.p)

    def derivative(self, t):
        return -self.p * self.c / np.power(np.add(t, self.t0 + 1.0), self.p + 1.0)

    @property
    def mu(self) -> float:
        """Upper bound of alpha on [0, inf), attained at t = 0 when p >= 0"""
        if self.p < 0:
            return float("inf")
        return float(self.c / (1.0 + self.t0) ** self.p)


class AdmissibilityReport(BaseModel):
    admissible: bool
    mu: float
    integral_diverges: bool
    """ Whether the integral of alpha over [0, inf) is infinite """
    integral_alpha_squared: float
    """ Closed form of the integral of alpha^2, inf when it diverges """
    reason: str
