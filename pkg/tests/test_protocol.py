import unittest

import numpy as np
from pydantic import ValidationError

from leadertrack.entities import ConstantNominal, SinusoidNominal
from leadertrack.models import (
    AlphaFunction,
    DirectedTopology,
    ErrorState,
    FullState,
    GainParameters,
    NoiseModel,
)
from leadertrack.protocol import (
    build_sigma,
    channel_count,
    control_and_estimator,
    error_diffusion,
    error_drift,
    error_system_matrices,
    full_diffusion,
    full_drift,
    full_system_matrices,
    measure,
    measurement_sum,
)
from leadertrack.topology import build_coupling

FIRST = DirectedTopology(adjacency=[[0, 1, 0], [1, 0, 0], [0, 1, 0]], leader_links=[1, 0, 0])
SECOND = DirectedTopology(adjacency=[[0, 1, 0], [1, 0, 0], [0, 0, 0]], leader_links=[1, 0, 1])
PARAMS = GainParameters(gamma=0.8, k=6.0)


class MeasurementTest(unittest.TestCase):
    def test_single_measurement(self):
        self.assertEqual(measure(1, 3.0, 1.0, 0.5, 2.0), 3.0)
        self.assertEqual(measure(0, 3.0, 1.0, 0.5, 2.0), 0.0)

    def test_sum_is_coupling_plus_loaded_noise(self):
        rng = np.random.default_rng(2)
        noise = NoiseModel(
            leader_intensities=rng.uniform(0.0, 2.0, size=3),
            follower_intensities=rng.uniform(0.0, 2.0, size=(3, 3)),
        )
        for topo in (FIRST, SECOND):
            coupling = build_coupling(topo)
            sigma = build_sigma(topo, noise)
            x, x0 = rng.normal(size=3), 0.7
            omega = rng.normal(size=channel_count(3))
            expected = coupling.coupling @ x - coupling.leader @ np.ones(3) * x0 + sigma @ omega
            for i in range(3):
                with self.subTest(topology=topo.leader_links.tolist(), i=i):
                    self.assertAlmostEqual(
                        measurement_sum(topo, noise, x, x0, omega, i), expected[i], places=12
                    )

    def test_control_and_estimator(self):
        u, dv_hat = control_and_estimator(
            z_sum=2.0, v_hat_i=1.5, alpha_t=0.5, a_bar0_t=0.25, params=PARAMS
        )

        self.assertAlmostEqual(u, -6.0 * 0.5 * 2.0 + 0.5 * 1.5)
        self.assertAlmostEqual(dv_hat, 0.25 - 0.8 * 6.0 * 0.5 * 2.0)


class SigmaTest(unittest.TestCase):
    def test_uniform_noise_on_reference_topology(self):
        sigma = build_sigma(FIRST, NoiseModel.uniform(3, 1.0))

        self.assertEqual(sigma.shape, (3, 12))
        expected = np.zeros((3, 12))
        expected[0, 0] = 1.0  # leader link of follower 1
        expected[0, 3 + 1] = 1.0  # follower 1 hears follower 2
        expected[1, 3 + 3 + 0] = 1.0  # follower 2 hears follower 1
        expected[2, 3 + 6 + 1] = 1.0  # follower 3 hears follower 2
        np.testing.assert_array_equal(sigma, expected)

    def test_absent_links_carry_no_noise(self):
        sigma = build_sigma(SECOND, NoiseModel.uniform(3, 4.0))

        self.assertEqual(np.count_nonzero(sigma), 4)
        np.testing.assert_array_equal(sigma[2, 3:], np.zeros(9))
        self.assertEqual(sigma[2, 2], 4.0)

    def test_size_mismatch(self):
        with self.assertRaises(ValueError):
            build_sigma(FIRST, NoiseModel.uniform(2, 1.0))

    def test_negative_intensity(self):
        with self.assertRaises(ValidationError):
            NoiseModel(leader_intensities=[1.0, -1.0], follower_intensities=np.ones((2, 2)))


class ErrorSystemTest(unittest.TestCase):
    def test_drift(self):
        coupling = build_coupling(FIRST)
        alpha = AlphaFunction()
        eps = np.array([2.0, 1.0, -1.0, -0.2, -2.0, 0.2])
        t = 3.0

        H = coupling.coupling
        expected = np.concatenate(
            [
                alpha(t) * (-6.0 * H @ eps[:3] + eps[3:]),
                alpha(t) * (-0.8 * 6.0 * H @ eps[:3]),
            ]
        )
        np.testing.assert_allclose(error_drift(eps, t, coupling, alpha, PARAMS), expected)

    def test_diffusion(self):
        noise = NoiseModel.uniform(3, 1.0)
        loading = error_diffusion(1.0, FIRST, noise, AlphaFunction(), PARAMS)
        sigma = build_sigma(FIRST, noise)

        self.assertEqual(loading.shape, (6, 12))
        np.testing.assert_allclose(loading[:3], -3.0 * sigma)
        np.testing.assert_allclose(loading[3:], -2.4 * sigma)

    def test_matrices(self):
        coupling = build_coupling(SECOND)
        sigma = build_sigma(SECOND, NoiseModel.uniform(3, 1.0))
        M, G = error_system_matrices(coupling, sigma, PARAMS)

        np.testing.assert_array_equal(M[:3, 3:], np.eye(3))
        np.testing.assert_array_equal(M[3:, 3:], np.zeros((3, 3)))
        np.testing.assert_allclose(M[3:, :3], -4.8 * coupling.coupling)
        np.testing.assert_allclose(G, np.vstack([-6.0 * sigma, -4.8 * sigma]))

    def test_noise_reaches_only_the_perturbed_follower(self):
        for topo in (FIRST, SECOND):
            links = [("leader", i, None) for i in range(3) if topo.leader_links[i]]
            links += [
                ("follower", i, j) for i in range(3) for j in range(3) if topo.adjacency[i, j]
            ]
            for kind, i, j in links:
                leader, followers = np.zeros(3), np.zeros((3, 3))
                if kind == "leader":
                    leader[i] = 1.5
                else:
                    followers[i, j] = 1.5
                noise = NoiseModel(leader_intensities=leader, follower_intensities=followers)

                loading = error_diffusion(2.0, topo, noise, AlphaFunction(), PARAMS)

                with self.subTest(topology=topo.leader_links.tolist(), link=(kind, i, j)):
                    quiet = [r for r in range(6) if r not in (i, 3 + i)]
                    np.testing.assert_array_equal(loading[quiet], 0.0)
                    self.assertTrue(np.any(loading[i]))
                    self.assertTrue(np.any(loading[3 + i]))


class FullSystemTest(unittest.TestCase):
    def test_error_of_full_drift_is_error_drift(self):
        rng = np.random.default_rng(4)
        alpha = AlphaFunction(c=1.2, p=0.9)
        profile = SinusoidNominal(amplitude=1.0, omega=0.5, offset=2.0)

        for topo in (FIRST, SECOND):
            coupling = build_coupling(topo)
            state = FullState(x=rng.normal(size=3), v_hat=rng.normal(size=3), x0=0.4, v_bar0=1.1)
            t = 2.5
            with self.subTest(topology=topo.leader_links.tolist()):
                dy = full_drift(state, t, coupling, alpha, profile, PARAMS)
                error_rate = np.concatenate([dy[:3] - dy[6], dy[3:6] - dy[7]])
                np.testing.assert_allclose(
                    error_rate,
                    error_drift(state.error().eps, t, coupling, alpha, PARAMS),
                    atol=1e-12,
                )

    def test_per_follower_protocol_matches_full_drift(self):
        rng = np.random.default_rng(8)
        alpha = AlphaFunction(c=1.2, p=0.9)
        profile = SinusoidNominal(amplitude=1.0, omega=0.5, offset=2.0)
        noise = NoiseModel.uniform(3, 1.0)
        silent = np.zeros(channel_count(3))
        t = 1.7

        for topo in (FIRST, SECOND):
            state = FullState(x=rng.normal(size=3), v_hat=rng.normal(size=3), x0=0.3, v_bar0=2.2)
            dy = full_drift(state, t, build_coupling(topo), alpha, profile, PARAMS)
            for i in range(3):
                z_sum = measurement_sum(topo, noise, state.x, state.x0, silent, i)
                u, dv_hat = control_and_estimator(
                    z_sum,
                    state.v_hat[i],
                    float(alpha(t)),
                    float(profile.nominal_acceleration(t)),
                    PARAMS,
                )
                with self.subTest(topology=topo.leader_links.tolist(), i=i):
                    self.assertAlmostEqual(u, dy[i], places=12)
                    self.assertAlmostEqual(dv_hat, dy[3 + i], places=12)

    def test_leader_rows(self):
        alpha = AlphaFunction()
        profile = SinusoidNominal(amplitude=1.0, omega=1.0)
        state = FullState(x=np.zeros(3), v_hat=np.zeros(3), x0=0.0, v_bar0=3.0)

        dy = full_drift(state, 1.0, build_coupling(FIRST), alpha, profile, PARAMS)

        self.assertAlmostEqual(dy[6], 0.5 * 3.0)
        self.assertAlmostEqual(dy[7], np.cos(1.0))

    def test_full_matrices_carry_leader_coupling(self):
        coupling = build_coupling(SECOND)
        M, G, c = full_system_matrices(coupling, np.zeros((3, 12)), PARAMS)

        np.testing.assert_allclose(M[:3, 6], [6.0, 0.0, 6.0])
        np.testing.assert_allclose(M[3:6, 6], [4.8, 0.0, 4.8])
        np.testing.assert_array_equal(c, [0, 0, 0, 1, 1, 1, 0, 1])
        self.assertEqual(G.shape, (8, 12))

    def test_diffusion_leaves_the_leader_noise_free(self):
        loading = full_diffusion(0.0, FIRST, NoiseModel.uniform(3, 1.0), AlphaFunction(), PARAMS)

        self.assertEqual(loading.shape, (8, 12))
        np.testing.assert_array_equal(loading[6:], np.zeros((2, 12)))

    def test_state_conversions(self):
        error = ErrorState(eps=[2.0, 1.0, -1.0, -0.2, -2.0, 0.2])
        state = FullState.from_error(error, x0=1.0, v_bar0=2.0)

        np.testing.assert_allclose(state.x, [3.0, 2.0, 0.0])
        np.testing.assert_allclose(state.v_hat, [1.8, 0.0, 2.2])
        np.testing.assert_allclose(state.error().eps, error.eps)
        np.testing.assert_allclose(FullState.from_vector(state.vector()).vector(), state.vector())

    def test_constant_nominal_has_no_feedforward(self):
        state = FullState(x=np.ones(3), v_hat=2.0 * np.ones(3), x0=1.0, v_bar0=2.0)

        dy = full_drift(state, 0.0, build_coupling(FIRST), AlphaFunction(), ConstantNominal(2.0), PARAMS)

        # Followers in consensus with the leader move exactly like it
        np.testing.assert_allclose(dy[:3], [2.0, 2.0, 2.0])
        np.testing.assert_allclose(dy[3:6], np.zeros(3), atol=1e-12)
