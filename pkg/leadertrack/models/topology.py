import numpy as np
from pydantic import BaseModel, field_validator, model_validator
from pydantic_core import PydanticCustomError


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def check_binary(value, name: str, ndim: int) -> np.ndarray:
    raw = np.asarray(value)
    if raw.ndim != ndim or raw.size == 0:
        raise PydanticCustomError(
            "shape", f"{name} must be a non-empty {ndim}-d array of 0/1 entries"
        )
    if raw.dtype.kind not in "biuf":
        raise PydanticCustomError("dtype", f"{name} must hold numbers, got {raw.dtype}")

    offending = np.argwhere((raw != 0) & (raw != 1))
    if len(offending) > 0:
        index = [int(i) for i in offending[0]]
        position = "".join(f"[{i}]" for i in index)
        raise PydanticCustomError(
            "binary_entry",
            "{name}{position} = {value} must be 0 or 1",
            {
                "name": name,
                "position": position,
                "value": raw[tuple(index)].item(),
                "index": index,
            },
        )

    return _readonly(raw.astype(np.int64))


def check_adjacency(value) -> np.ndarray:
    adjacency = check_binary(value, "adjacency", 2)
    if adjacency.shape[0] != adjacency.shape[1]:
        raise PydanticCustomError(
            "shape", f"adjacency must be square, got {adjacency.shape}"
        )

    loops = np.flatnonzero(np.diag(adjacency))
    if len(loops) > 0:
        i = int(loops[0])
        raise PydanticCustomError(
            "self_loop",
            "adjacency[{i}][{i}] = 1 but self-loops are not allowed",
            {"i": i, "index": [i, i]},
        )

    return adjacency


class DirectedTopology(BaseModel):
    """One interconnection graph: follower arcs plus links to the leader.

    adjacency[i][j] = 1 means follower i receives from follower j,
    leader_links[i] = 1 means follower i receives from the leader (vertex 0).
    Indices here are 0-based; follower i is agent i + 1.
    """

    adjacency: np.ndarray
    leader_links: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("adjacency", mode="before")
    @classmethod
    def _check_adjacency(cls, value):
        return check_adjacency(value)

    @field_validator("leader_links", mode="before")
    @classmethod
    def _check_leader_links(cls, value):
        return check_binary(value, "leader_links", 1)

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.leader_links.shape[0] != self.adjacency.shape[0]:
            raise ValueError(
                f"leader_links has {self.leader_links.shape[0]} entries "
                f"but adjacency has {self.adjacency.shape[0]} followers"
            )
        return self

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])


class CouplingMatrices(BaseModel):
    degree: np.ndarray
    """ D = diag(d_i), d_i the in-degree of follower i """
    laplacian: np.ndarray
    """ L = D - A """
    leader: np.ndarray
    """ B = diag(a_10, ..., a_n0) """
    coupling: np.ndarray
    """ H = L + B """

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def n(self) -> int:
        return int(self.coupling.shape[0])
