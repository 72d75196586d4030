import logging
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .constants import EIGENVALUE_TOLERANCE, MAX_DENSE_LYAPUNOV_ORDER, CertificateMode
from .errors import NotPositiveStable, NumericError, SwitchingCertificateUnavailable
from .models import (
    CouplingMatrices,
    DirectedTopology,
    GainCertificate,
    GainParameters,
    TopologyReport,
)
from .topology import build_coupling, is_balanced, is_globally_reachable

logger = logging.getLogger("spectral")


def positive_stability(H: np.ndarray) -> bool:
    """Whether every eigenvalue of H has real part above the tolerance"""
    return bool(np.all(_eigenvalues(H).real > EIGENVALUE_TOLERANCE))


def solve_lyapunov(H: np.ndarray) -> np.ndarray:
    """Solve H^T P + P H = I for the symmetric positive definite P

    Up to MAX_DENSE_LYAPUNOV_ORDER the unknown is vectorised and the n^2 x n^2
    Kronecker system is solved directly; larger orders go to Bartels-Stewart.
    """
    H = _square(H, "H")
    n = H.shape[0]

    if not positive_stability(H):
        spectrum = np.sort_complex(_eigenvalues(H))
        raise NotPositiveStable(
            f"H is not positive stable (eigenvalues {spectrum.tolist()}), "
            "so vertex 0 is not globally reachable"
        )

    identity = np.eye(n)
    try:
        if n <= MAX_DENSE_LYAPUNOV_ORDER:
            # Row-major vec: vec(H^T P) = (H^T kron I) p, vec(P H) = (I kron H^T) p
            kronecker = np.kron(H.T, identity) + np.kron(identity, H.T)
            p_bar = scipy.linalg.solve(kronecker, identity.ravel()).reshape(n, n)
        else:
            logger.warning(
                f"Order {n} exceeds {MAX_DENSE_LYAPUNOV_ORDER}, using Bartels-Stewart"
            )
            p_bar = scipy.linalg.solve_continuous_lyapunov(H.T, identity)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericError(f"Lyapunov solve failed: {e}") from e

    return (p_bar + p_bar.T) / 2.0


def lyapunov_residual(H: np.ndarray, p_bar: np.ndarray) -> float:
    """Frobenius norm of H^T P + P H - I"""
    return float(np.linalg.norm(H.T @ p_bar + p_bar @ H - np.eye(H.shape[0]), "fro"))


def symmetric_eigenvalues(M: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of (M + M^T) / 2"""
    M = _square(M, "M")
    try:
        return np.linalg.eigvalsh((M + M.T) / 2.0)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Symmetric eigenvalue computation failed: {e}") from e


def min_symmetric_eigenvalue(topologies: Sequence[CouplingMatrices]) -> float:
    """lambda_bar, the smallest eigenvalue of H_sigma + H_sigma^T over all sigma"""
    if len(topologies) == 0:
        raise ValueError("At least one topology is needed")

    return min(
        float(symmetric_eigenvalues(c.coupling + c.coupling.T)[0]) for c in topologies
    )


def gain_bound_fixed(p_bar: np.ndarray, gamma: float) -> float:
    """k_min = lambda_max(P_bar) / (2 gamma (1 - gamma^2))"""
    _check_gamma(gamma)
    eigenvalues = symmetric_eigenvalues(p_bar)
    if eigenvalues[0] <= EIGENVALUE_TOLERANCE:
        raise ValueError(
            f"P_bar must be positive definite, smallest eigenvalue is {eigenvalues[0]}"
        )

    return float(eigenvalues[-1] / (2.0 * gamma * (1.0 - gamma**2)))


def gain_bound_switching(lambda_bar: float, gamma: float) -> float:
    """k_min = 1 / (2 gamma (1 - gamma^2) lambda_bar)"""
    _check_gamma(gamma)
    if lambda_bar <= EIGENVALUE_TOLERANCE:
        raise SwitchingCertificateUnavailable(
            f"lambda_bar = {lambda_bar} is not positive: some H + H^T is not "
            "positive definite, so a topology is unbalanced or the leader "
            "is not globally reachable"
        )

    return float(1.0 / (2.0 * gamma * (1.0 - gamma**2) * lambda_bar))


def lyapunov_matrix(
    gamma: float, n: int, p_bar: Optional[np.ndarray] = None
) -> np.ndarray:
    """P = [[P_bar, -gamma P_bar], [-gamma P_bar, P_bar]] of V = eps^T P eps

    Without p_bar the switching-topology form with P_bar = I_n is returned.
    Its eigenvalues are (1 +- gamma) lambda_i(P_bar).
    """
    _check_gamma(gamma)
    block = np.eye(n) if p_bar is None else np.asarray(p_bar, dtype=float)
    if block.shape != (n, n):
        raise ValueError(f"P_bar must be {n}x{n}, got {block.shape}")

    return np.block([[block, -gamma * block], [-gamma * block, block]])


def lyapunov_lower_bound(gamma: float, p_bar: np.ndarray) -> float:
    """c with V >= c ||eps||^2, namely (1 - gamma) lambda_min(P_bar)"""
    _check_gamma(gamma)
    return float((1.0 - gamma) * symmetric_eigenvalues(p_bar)[0])


def verify_q_positive_definite(
    params: GainParameters,
    mode: CertificateMode,
    p_bar: Optional[np.ndarray] = None,
    topologies: Optional[Sequence[CouplingMatrices]] = None,
) -> GainCertificate:
    """Check that Q (with alpha(t) factored out) is positive definite at params.k

    Fixed mode:     [[k(1-g^2) I, -P_bar], [-P_bar, 2g P_bar]]
    Switching mode: [[k(1-g^2)(H_s + H_s^T), -I], [-I, 2g I]] for every s

    An invalid certificate is a result, not an error.
    """
    gamma, k = params.gamma, params.k
    scale = k * (1.0 - gamma**2)

    if mode == CertificateMode.FIXED:
        if p_bar is None:
            raise ValueError("Fixed mode needs P_bar")
        p_bar = np.asarray(p_bar, dtype=float)
        identity = np.eye(p_bar.shape[0])
        q = np.block([[scale * identity, -p_bar], [-p_bar, 2.0 * gamma * p_bar]])
        q_min_eig = float(symmetric_eigenvalues(q)[0])

        return GainCertificate(
            mode=mode,
            gamma=gamma,
            k=k,
            p_bar=p_bar.tolist(),
            k_min=gain_bound_fixed(p_bar, gamma),
            q_min_eig=q_min_eig,
            valid=q_min_eig > EIGENVALUE_TOLERANCE,
        )

    if not topologies:
        raise ValueError("Switching mode needs at least one topology")

    q_min_eig = np.inf
    for coupling in topologies:
        H = coupling.coupling
        identity = np.eye(H.shape[0])
        q = np.block(
            [[scale * (H + H.T), -identity], [-identity, 2.0 * gamma * identity]]
        )
        q_min_eig = min(q_min_eig, float(symmetric_eigenvalues(q)[0]))

    lambda_bar = min_symmetric_eigenvalue(topologies)
    k_min = None
    if lambda_bar > EIGENVALUE_TOLERANCE:
        k_min = gain_bound_switching(lambda_bar, gamma)

    return GainCertificate(
        mode=mode,
        gamma=gamma,
        k=k,
        lambda_bar=lambda_bar,
        k_min=k_min,
        q_min_eig=q_min_eig,
        valid=q_min_eig > EIGENVALUE_TOLERANCE,
    )


def certify(
    topologies: Sequence[CouplingMatrices], params: GainParameters
) -> GainCertificate:
    """Certificate of the applicable bound: fixed mode for a single topology,
    switching mode for several"""
    if len(topologies) == 1:
        H = topologies[0].coupling
        p_bar = solve_lyapunov(H)
        certificate = verify_q_positive_definite(
            params, CertificateMode.FIXED, p_bar=p_bar
        )
        return certificate.model_copy(
            update={"lyapunov_residual": lyapunov_residual(H, p_bar)}
        )

    return verify_q_positive_definite(
        params, CertificateMode.SWITCHING, topologies=topologies
    )


def minimal_gain(topologies: Sequence[CouplingMatrices], gamma: float) -> float:
    """k_min of the applicable bound

    Raises NotPositiveStable (one topology) or SwitchingCertificateUnavailable
    (several) when the bound's hypothesis fails.
    """
    if len(topologies) == 1:
        return gain_bound_fixed(solve_lyapunov(topologies[0].coupling), gamma)

    return gain_bound_switching(min_symmetric_eigenvalue(topologies), gamma)


def topology_report(topo: DirectedTopology, index: int = 1) -> TopologyReport:
    coupling = build_coupling(topo)
    H = coupling.coupling
    eigenvalues = _eigenvalues(H)
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))

    return TopologyReport(
        index=index,
        n=topo.n,
        reachable=is_globally_reachable(topo),
        balanced=is_balanced(topo),
        positive_stable=positive_stability(H),
        min_symmetric_eigenvalue=min_symmetric_eigenvalue([coupling]),
        eigenvalues_real=eigenvalues.real[order].tolist(),
        eigenvalues_imag=eigenvalues.imag[order].tolist(),
    )


def _eigenvalues(M: np.ndarray) -> np.ndarray:
    M = _square(M, "H")
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigenvalue computation failed: {e}") from e


def _square(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def _check_gamma(gamma: float):
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
