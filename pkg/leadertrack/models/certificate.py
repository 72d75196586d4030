from typing import List, Optional

from pydantic import BaseModel, Field

from ..constants import CertificateMode


class GainParameters(BaseModel):
    gamma: float = Field(..., gt=0.0, lt=1.0)
    """ Estimator coupling, strictly between 0 and 1 """
    k: float = Field(..., gt=0.0)

    class Config:
        frozen = True


class GainCertificate(BaseModel):
    mode: CertificateMode
    gamma: float
    k: float
    """ Gain the certificate was evaluated at """
    p_bar: Optional[List[List[float]]] = None
    """ Fixed mode only, row-major """
    lyapunov_residual: Optional[float] = None
    lambda_bar: Optional[float] = None
    """ Switching mode only """
    k_min: Optional[float] = None
    """ Absent when the switching bound does not exist (lambda_bar <= 0) """
    q_min_eig: float
    """ Smallest eigenvalue of Q with the factor alpha(t) divided out """
    valid: bool


class TopologyReport(BaseModel):
    index: int
    """ 1-based position in the topology set """
    n: int
    reachable: bool
    balanced: bool
    positive_stable: bool
    min_symmetric_eigenvalue: float
    """ Smallest eigenvalue of H + H^T """
    eigenvalues_real: List[float]
    eigenvalues_imag: List[float]
