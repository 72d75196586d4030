from collections import deque

import numpy as np

from .models import CouplingMatrices, DirectedTopology


def build_coupling(topo: DirectedTopology) -> CouplingMatrices:
    """Degree, Laplacian L = D - A, leader matrix B and H = L + B

    Computed in integer arithmetic on the 0/1 inputs, so every row of L sums
    to exactly zero.
    """
    adjacency = topo.adjacency
    degree = np.diag(adjacency.sum(axis=1))
    laplacian = degree - adjacency
    leader = np.diag(topo.leader_links)

    return CouplingMatrices(
        degree=_frozen(degree),
        laplacian=_frozen(laplacian),
        leader=_frozen(leader),
        coupling=_frozen(laplacian + leader),
    )


def is_globally_reachable(topo: DirectedTopology) -> bool:
    """Whether every follower has a directed path to the leader (vertex 0)

    Arcs point from the receiving agent to its source, so the search starts
    at vertex 0 and walks arcs backwards: follower i is reached from j when
    i receives from j.
    """
    adjacency = topo.adjacency
    reached = np.zeros(topo.n, dtype=bool)
    queue = deque()

    for i in np.flatnonzero(topo.leader_links):
        reached[i] = True
        queue.append(int(i))

    while queue:
        j = queue.popleft()
        for i in np.flatnonzero(adjacency[:, j]):
            if not reached[i]:
                reached[i] = True
                queue.append(int(i))

    return bool(reached.all())


def is_balanced(topo: DirectedTopology) -> bool:
    """Whether the follower subgraph has equal in- and out-degree at every vertex

    Leader links play no part.
    """
    adjacency = topo.adjacency
    return bool(np.array_equal(adjacency.sum(axis=1), adjacency.sum(axis=0)))


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=float)
    matrix.setflags(write=False)
    return matrix
