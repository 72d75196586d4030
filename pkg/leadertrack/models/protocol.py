import numpy as np
from pydantic import BaseModel, field_validator, model_validator


def _nonnegative(value, name: str, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"{name} must be a {ndim}-d array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must be finite")
    negative = np.argwhere(array < 0)
    if len(negative) > 0:
        index = "".join(f"[{int(i)}]" for i in negative[0])
        raise ValueError(f"{name}{index} = {array[tuple(negative[0])]} is negative")
    array.setflags(write=False)
    return array


def _finite_vector(value, name: str) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} has non-finite entries")
    array.setflags(write=False)
    return array


class NoiseModel(BaseModel):
    leader_intensities: np.ndarray
    """ rho_i0, one per follower """
    follower_intensities: np.ndarray
    """ rho_ij, n x n; entries on absent links are ignored """

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("leader_intensities", mode="before")
    @classmethod
    def _check_leader(cls, value):
        return _nonnegative(value, "leader_intensities", 1)

    @field_validator("follower_intensities", mode="before")
    @classmethod
    def _check_followers(cls, value):
        return _nonnegative(value, "follower_intensities", 2)

    @model_validator(mode="after")
    def _check_sizes(self):
        n = self.leader_intensities.shape[0]
        if self.follower_intensities.shape != (n, n):
            raise ValueError(
                f"follower_intensities must be {n}x{n}, "
                f"got {self.follower_intensities.shape}"
            )
        return self

    @classmethod
    def uniform(cls, n: int, intensity: float) -> "NoiseModel":
        return cls(
            leader_intensities=np.full(n, float(intensity)),
            follower_intensities=np.full((n, n), float(intensity)),
        )

    @classmethod
    def silent(cls, n: int) -> "NoiseModel":
        return cls.uniform(n, 0.0)

    @property
    def n(self) -> int:
        return int(self.leader_intensities.shape[0])


class ErrorState(BaseModel):
    eps: np.ndarray
    """ (x - x0 1, v_hat - v_bar0 1), length 2n """

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("eps", mode="before")
    @classmethod
    def _check_eps(cls, value):
        eps = _finite_vector(value, "eps")
        if eps.shape[0] % 2 != 0:
            raise ValueError(f"eps must have even length, got {eps.shape[0]}")
        return eps

    @property
    def n(self) -> int:
        return self.eps.shape[0] // 2


class FullState(BaseModel):
    x: np.ndarray
    v_hat: np.ndarray
    """ Followers' estimates of the nominal velocity """
    x0: float
    v_bar0: float
    """ Leader's nominal velocity """

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("x", "v_hat", mode="before")
    @classmethod
    def _check_vectors(cls, value, info):
        return _finite_vector(value, info.field_name)

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.x.shape != self.v_hat.shape:
            raise ValueError(
                f"x has {self.x.shape[0]} entries but v_hat has {self.v_hat.shape[0]}"
            )
        return self

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def vector(self) -> np.ndarray:
        """Layout integrated in full-system mode: (x, v_hat, x0, v_bar0)"""
        return np.concatenate([self.x, self.v_hat, [self.x0, self.v_bar0]])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "FullState":
        n = (len(y) - 2) // 2
        return cls(x=y[:n], v_hat=y[n : 2 * n], x0=float(y[-2]), v_bar0=float(y[-1]))

    def error(self) -> ErrorState:
        return ErrorState(
            eps=np.concatenate([self.x - self.x0, self.v_hat - self.v_bar0])
        )

    @classmethod
    def from_error(cls, error: ErrorState, x0: float, v_bar0: float) -> "FullState":
        n = error.n
        return cls(
            x=error.eps[:n] + x0, v_hat=error.eps[n:] + v_bar0, x0=x0, v_bar0=v_bar0
        )
