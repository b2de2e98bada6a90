import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqeaihr.analysis import compute_dfe
from sqeaihr.ensemble import (
    extinction_slope,
    persistence_estimate,
    run_ensemble,
    running_mean,
    selector_weights,
    time_average,
)
from sqeaihr.integrators import IntegratorConfig, SeedSpec, Trajectory, integrate_sde
from sqeaihr.model import NoiseIntensities, State

from conftest import FIG3_NOISE, PAPER_INIT, figure_params


def trajectory_from(times, columns):
    states = np.zeros((len(times), 7))
    for k, values in columns.items():
        states[:, k] = values
    return Trajectory(np.asarray(times, dtype=float), states)


class TestTimeAverage:
    times = np.linspace(0.0, 10.0, 1001)

    def test_constant(self):
        traj = trajectory_from(self.times, {0: 5.0})
        np.testing.assert_allclose(time_average(traj, "S").values, 5.0, rtol=1e-12)

    def test_linear_ramp(self):
        traj = trajectory_from(self.times, {4: self.times})
        avg = time_average(traj, "I").values
        cell = self.times[1] - self.times[0]
        assert np.all(np.abs(avg[1:] - self.times[1:] / 2) <= cell)

    @settings(max_examples=30)
    @given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 2**31))
    def test_linearity(self, a, b, seed):
        rng = np.random.default_rng(seed)
        states = rng.uniform(0, 100, size=(50, 7))
        traj = Trajectory(np.cumsum(rng.uniform(0.1, 1.0, 50)), states)
        combined = time_average(traj, {"A": a, "I": b}).values
        separate = a * time_average(traj, "A").values + b * time_average(traj, "I").values
        scale = np.abs(a * time_average(traj, "A").values) + np.abs(b * time_average(traj, "I").values)
        assert np.all(np.abs(combined - separate) <= 1e-12 * np.maximum(scale, 1e-300))

    def test_first_point_is_value(self):
        traj = trajectory_from([0.0, 1.0], {3: [2.0, 4.0]})
        np.testing.assert_array_equal(time_average(traj, "A").values, [2.0, 2.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            time_average(Trajectory(np.array([]), np.zeros((0, 7))), "S")

    def test_selectors(self):
        np.testing.assert_array_equal(selector_weights("A+I"), [0, 0, 0, 1, 1, 0, 0])
        with pytest.raises(ValueError):
            selector_weights("X")
        with pytest.raises(ValueError):
            selector_weights([1, 2, 3])

    def test_running_mean_batches(self):
        values = np.arange(12.0).reshape(2, 6)
        t = np.arange(6.0)
        np.testing.assert_array_equal(running_mean(t, values)[1], running_mean(t, values[1]))


class TestSlope:
    times = np.linspace(0.0, 50.0, 501)

    def test_constant_mass(self):
        traj = trajectory_from(self.times, {2: 3.0, 3: 4.0})
        assert extinction_slope(traj) == 0.0

    def test_exponential_decay(self):
        traj = trajectory_from(self.times, {4: np.exp(-0.1 * self.times)})
        assert extinction_slope(traj) == pytest.approx(-0.1, abs=1e-12)

    def test_already_extinct_sentinel(self):
        values = np.ones_like(self.times)
        values[-1] = 0.0
        assert extinction_slope(trajectory_from(self.times, {2: values})) is None


class TestPersistenceEstimate:
    times = np.linspace(0.0, 100.0, 101)

    def test_constant(self):
        traj = trajectory_from(self.times, {3: 1.0, 4: 2.0})
        assert persistence_estimate(traj) == pytest.approx(3.0, rel=1e-15)

    def test_monotone_takes_tail_start(self):
        traj = trajectory_from(self.times, {4: self.times})
        avg = time_average(traj, "A+I").values
        assert persistence_estimate(traj, 0.2) == avg[80]

    @pytest.mark.parametrize("fraction", [0.0, 1.5])
    def test_fraction_domain(self, fraction):
        with pytest.raises(ValueError):
            persistence_estimate(trajectory_from(self.times, {}), fraction)


class TestRunEnsemble:
    params = figure_params(5e-6)
    cfg = IntegratorConfig(t_end=20.0, dt=0.01, record_every=20)

    def test_single_path_mean_is_the_path(self):
        summary = run_ensemble(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, 17, 1)
        single = integrate_sde(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, SeedSpec(17, 0))
        np.testing.assert_array_equal(summary.mean_path, single.states)

    def test_zero_noise_has_zero_width_bands(self):
        summary = run_ensemble(self.params, NoiseIntensities(), PAPER_INIT, self.cfg, 0, 5)
        np.testing.assert_array_equal(summary.q05, summary.q95)
        np.testing.assert_allclose(summary.q05, summary.mean_path, rtol=1e-15)

    def test_band_order_and_fraction_range(self):
        summary = run_ensemble(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, 3, 25)
        assert np.all(summary.q05 <= summary.q95)
        assert 0.0 <= summary.extinction_fraction <= 1.0
        assert summary.persistence_values.shape == (25,)

    def test_bit_identical_across_workers(self):
        runs = [run_ensemble(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, 42, 7, workers=w) for w in (1, 2, 3)]
        for other in runs[1:]:
            for name in ("mean_path", "q05", "q95", "slopes", "persistence_values", "terminal_averages"):
                np.testing.assert_array_equal(getattr(runs[0], name), getattr(other, name))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            run_ensemble(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, 0, 0)


class TestExtinctionRegime:
    """Empirical reading of the time-average results under the extinction noise."""

    params = figure_params(2.08e-9)
    cfg = IntegratorConfig(t_end=200.0, dt=0.01, record_every=10)

    def test_removed_compartments_average_out(self):
        summary = run_ensemble(self.params, FIG3_NOISE, PAPER_INIT, self.cfg, 2020, 100)
        scale = 0.01 * sum(PAPER_INIT)
        assert np.all(summary.terminal_averages[:, 5] < scale)
        assert np.all(summary.terminal_averages[:, 6] < scale)

    def test_time_averages_near_dfe_when_started_on_it(self):
        # the population mode relaxes at rate mu, so the limit is only visible when
        # N starts inside the attracting band
        dfe = compute_dfe(self.params)
        init = State(dfe.s_o, dfe.q_o, 10.0, 15.0, 8.0, 5.0, 0.0)
        summary = run_ensemble(self.params, FIG3_NOISE, init, self.cfg, 2020, 100)
        mean_s, mean_q = summary.terminal_averages[:, :2].mean(axis=0)
        assert mean_s == pytest.approx(dfe.s_o, rel=0.05)
        assert mean_q == pytest.approx(dfe.q_o, rel=0.05)
        assert summary.extinction_fraction >= 0.95
