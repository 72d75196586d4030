import unittest

import numpy as np
import scipy.linalg

from leadertrack.constants import CertificateMode
from leadertrack.errors import NotPositiveStable, SwitchingCertificateUnavailable
from leadertrack.models import DirectedTopology, GainParameters
from leadertrack.spectral import (
    certify,
    gain_bound_fixed,
    gain_bound_switching,
    lyapunov_lower_bound,
    lyapunov_matrix,
    lyapunov_residual,
    min_symmetric_eigenvalue,
    minimal_gain,
    positive_stability,
    solve_lyapunov,
    topology_report,
    verify_q_positive_definite,
)
from leadertrack.topology import build_coupling

FIRST = DirectedTopology(adjacency=[[0, 1, 0], [1, 0, 0], [0, 1, 0]], leader_links=[1, 0, 0])
SECOND = DirectedTopology(adjacency=[[0, 1, 0], [1, 0, 0], [0, 0, 0]], leader_links=[1, 0, 1])


class LyapunovSolveTest(unittest.TestCase):
    def test_scalar(self):
        np.testing.assert_allclose(solve_lyapunov(np.array([[2.0]])), [[0.25]])

    def test_random_positive_stable_matrices(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n = int(rng.integers(1, 11))
            H = random_positive_stable(rng, n)
            with self.subTest(trial=trial, n=n):
                p_bar = solve_lyapunov(H)
                self.assertLessEqual(lyapunov_residual(H, p_bar), 1e-10)
                self.assertGreater(np.linalg.eigvalsh(p_bar)[0], 0.0)
                np.testing.assert_allclose(
                    p_bar,
                    scipy.linalg.solve_continuous_lyapunov(H.T, np.eye(n)),
                    atol=1e-9,
                )

    def test_large_order_uses_bartels_stewart(self):
        n = 55
        H = 2.0 * np.eye(n) - np.eye(n, k=-1)

        with self.assertLogs("spectral", level="WARNING"):
            p_bar = solve_lyapunov(H)

        self.assertLessEqual(lyapunov_residual(H, p_bar), 1e-9)

    def test_rejects_matrices_that_are_not_positive_stable(self):
        unreachable = build_coupling(
            DirectedTopology(adjacency=[[0, 1], [0, 0]], leader_links=[1, 0])
        )

        self.assertFalse(positive_stability(unreachable.coupling))
        with self.assertRaises(NotPositiveStable):
            solve_lyapunov(unreachable.coupling)

    def test_reference_couplings(self):
        for topo in (FIRST, SECOND):
            H = build_coupling(topo).coupling
            with self.subTest(topology=topo.leader_links.tolist()):
                self.assertLessEqual(lyapunov_residual(H, solve_lyapunov(H)), 1e-12)


class SymmetricEigenvalueTest(unittest.TestCase):
    def test_reference_lambda_bar(self):
        couplings = [build_coupling(FIRST), build_coupling(SECOND)]
        self.assertAlmostEqual(min_symmetric_eigenvalue(couplings), 0.3187, delta=5e-4)

    def test_second_topology_alone(self):
        # H + H^T = [[4, -2, 0], [-2, 2, 0], [0, 0, 2]], smallest eigenvalue 3 - sqrt(5)
        self.assertAlmostEqual(
            min_symmetric_eigenvalue([build_coupling(SECOND)]), 3.0 - np.sqrt(5.0), places=12
        )

    def test_matches_characteristic_polynomial(self):
        # H_1 + H_1^T has characteristic polynomial -l^3 + 8 l^2 - 15 l + 4
        roots = np.sort(np.roots([1.0, -8.0, 15.0, -4.0]).real)
        self.assertAlmostEqual(
            min_symmetric_eigenvalue([build_coupling(FIRST)]), roots[0], places=10
        )

    def test_empty_set(self):
        with self.assertRaises(ValueError):
            min_symmetric_eigenvalue([])


class GainBoundTest(unittest.TestCase):
    def test_switching_bound_for_reference_values(self):
        self.assertAlmostEqual(gain_bound_switching(0.3187, 0.8), 5.448, delta=1e-3)

    def test_fixed_bound_scalar(self):
        self.assertAlmostEqual(gain_bound_fixed(np.array([[0.25]]), 0.5), 1.0 / 3.0, places=12)

    def test_switching_bound_needs_positive_lambda_bar(self):
        for lambda_bar in (0.0, -0.2):
            with self.subTest(lambda_bar=lambda_bar):
                with self.assertRaises(SwitchingCertificateUnavailable):
                    gain_bound_switching(lambda_bar, 0.8)

    def test_gamma_outside_unit_interval(self):
        for gamma in (0.0, 1.0, 1.5):
            with self.subTest(gamma=gamma):
                with self.assertRaises(ValueError):
                    gain_bound_switching(0.5, gamma)

    def test_minimal_gain_picks_the_applicable_bound(self):
        couplings = [build_coupling(FIRST), build_coupling(SECOND)]
        self.assertAlmostEqual(minimal_gain(couplings, 0.8), 5.448, delta=1e-3)

        H = build_coupling(SECOND).coupling
        self.assertAlmostEqual(
            minimal_gain([build_coupling(SECOND)], 0.8),
            gain_bound_fixed(solve_lyapunov(H), 0.8),
            places=12,
        )


class CertificateTest(unittest.TestCase):
    def test_reference_gain_is_certified(self):
        couplings = [build_coupling(FIRST), build_coupling(SECOND)]

        valid = verify_q_positive_definite(
            GainParameters(gamma=0.8, k=6.0), CertificateMode.SWITCHING, topologies=couplings
        )
        invalid = verify_q_positive_definite(
            GainParameters(gamma=0.8, k=5.0), CertificateMode.SWITCHING, topologies=couplings
        )

        self.assertTrue(valid.valid)
        self.assertGreater(valid.q_min_eig, 0.0)
        self.assertAlmostEqual(valid.k_min, 5.448, delta=1e-3)
        self.assertFalse(invalid.valid)

    def test_validity_flips_at_the_bound(self):
        couplings = [build_coupling(FIRST), build_coupling(SECOND)]
        k_min = minimal_gain(couplings, 0.6)

        for factor, expected in ((1 - 1e-6, False), (1 + 1e-6, True)):
            with self.subTest(factor=factor):
                certificate = certify(couplings, GainParameters(gamma=0.6, k=factor * k_min))
                self.assertEqual(certificate.valid, expected)

    def test_fixed_mode_for_a_single_topology(self):
        certificate = certify([build_coupling(SECOND)], GainParameters(gamma=0.8, k=50.0))

        self.assertEqual(certificate.mode, CertificateMode.FIXED)
        self.assertIsNotNone(certificate.p_bar)
        self.assertLessEqual(certificate.lyapunov_residual, 1e-12)
        self.assertTrue(certificate.valid)

        k_min = certificate.k_min
        below = certify([build_coupling(SECOND)], GainParameters(gamma=0.8, k=0.9 * k_min))
        self.assertFalse(below.valid)

    def test_unbalanced_star_has_no_switching_bound(self):
        star = build_coupling(leader_star(6))
        self.assertLess(min_symmetric_eigenvalue([star]), 0.0)

        certificate = verify_q_positive_definite(
            GainParameters(gamma=0.8, k=100.0), CertificateMode.SWITCHING, topologies=[star]
        )

        self.assertIsNone(certificate.k_min)
        self.assertFalse(certificate.valid)
        # The star still satisfies the fixed-topology hypothesis
        self.assertTrue(positive_stability(star.coupling))


class LyapunovMatrixTest(unittest.TestCase):
    def test_switching_form(self):
        P = lyapunov_matrix(0.8, 2)
        np.testing.assert_array_equal(
            P,
            [
                [1.0, 0.0, -0.8, 0.0],
                [0.0, 1.0, 0.0, -0.8],
                [-0.8, 0.0, 1.0, 0.0],
                [0.0, -0.8, 0.0, 1.0],
            ],
        )

    def test_eigenvalues_are_scaled_by_one_plus_minus_gamma(self):
        rng = np.random.default_rng(5)
        for gamma in (0.1, 0.5, 0.9):
            H = random_positive_stable(rng, 4)
            p_bar = solve_lyapunov(H)
            with self.subTest(gamma=gamma):
                expected = np.sort(
                    np.concatenate(
                        [(1 - gamma) * np.linalg.eigvalsh(p_bar), (1 + gamma) * np.linalg.eigvalsh(p_bar)]
                    )
                )
                np.testing.assert_allclose(
                    np.linalg.eigvalsh(lyapunov_matrix(gamma, 4, p_bar)), expected, atol=1e-10
                )

    def test_lower_bound_holds(self):
        rng = np.random.default_rng(9)
        p_bar = solve_lyapunov(random_positive_stable(rng, 3))
        P = lyapunov_matrix(0.7, 3, p_bar)
        bound = lyapunov_lower_bound(0.7, p_bar)

        for _ in range(200):
            eps = rng.normal(size=6)
            self.assertGreaterEqual(eps @ P @ eps, bound * (eps @ eps) - 1e-12)

    def test_rejects_wrong_size(self):
        with self.assertRaises(ValueError):
            lyapunov_matrix(0.5, 3, np.eye(2))


class TopologyReportTest(unittest.TestCase):
    def test_reference_topologies(self):
        first = topology_report(FIRST, 1)
        second = topology_report(SECOND, 2)

        self.assertTrue(first.reachable)
        self.assertFalse(first.balanced)
        self.assertTrue(first.positive_stable)
        self.assertAlmostEqual(first.min_symmetric_eigenvalue, 0.3187, delta=5e-4)

        self.assertTrue(second.reachable)
        self.assertTrue(second.balanced)
        self.assertEqual(second.index, 2)
        self.assertEqual(len(second.eigenvalues_real), 3)

    def test_empty_graph(self):
        report = topology_report(
            DirectedTopology(adjacency=np.zeros((2, 2)), leader_links=[0, 0])
        )

        self.assertFalse(report.reachable)
        self.assertFalse(report.positive_stable)


# HELPERS


def random_positive_stable(rng: np.random.Generator, n: int) -> np.ndarray:
    """Gaussian matrix shifted so its spectrum lies at real part >= 1"""
    M = rng.normal(size=(n, n))
    shift = 1.0 - np.linalg.eigvals(M).real.min()
    return M + shift * np.eye(n)


def leader_star(n: int) -> DirectedTopology:
    """Follower 1 hears the leader, every other follower hears only follower 1"""
    adjacency = np.zeros((n, n), dtype=int)
    adjacency[1:, 0] = 1
    leader_links = np.zeros(n, dtype=int)
    leader_links[0] = 1
    return DirectedTopology(adjacency=adjacency, leader_links=leader_links)
