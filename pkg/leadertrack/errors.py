from typing import Optional


class LeadertrackError(Exception):
    pass


class NotPositiveStable(LeadertrackError, ValueError):
    """Thrown when a Lyapunov solve is asked for a matrix with an eigenvalue
    outside the open right half-plane"""

    pass


class SwitchingCertificateUnavailable(LeadertrackError, ValueError):
    """Thrown when some H_sigma + H_sigma^T is not positive definite, so the
    switching-topology gain bound does not exist"""

    pass


class ScheduleError(LeadertrackError, ValueError):
    pass


class NumericError(LeadertrackError, ArithmeticError):
    pass


class DivergenceError(LeadertrackError, ArithmeticError):
    def __init__(self, t: float, record=None, trial: Optional[int] = None):
        where = "" if trial is None else f" in trial {trial}"
        super().__init__(f"State became non-finite at t={t}{where}")
        self.t = t
        self.record = record
        self.trial = trial
