import numpy as np
import pytest

from beamlab.errors import ConfigError
from beamlab.nonlinear import split_solve
from beamlab.propagator import linear_evolve
from beamlab.scattering import (
    ScatterNormSpec, data_window, odd_data, pullback_data, scattering_experiment,
)
from beamlab.spectral import GridSpec

G = GridSpec(1, 1024, 128.0)


def test_norm_is_preserved_by_free_flow():
    norm = ScatterNormSpec(1, 5.0)
    d = odd_data(G, 0.3)
    for t in (0.5, 3.0):
        assert norm(linear_evolve(d, t)) == pytest.approx(norm(d), rel=1e-12)


def test_odd_data_mean_zero():
    d = odd_data(GridSpec(2, 64, 24.0), 1.0)
    assert abs(d.u.spectrum[0, 0]) < 1e-17
    assert np.all(d.v.samples == 0)


def test_pullback_inverts_free_flow():
    d = odd_data(G, 0.1)
    tr = split_solve(d, 5, 0, 2.0, 0.01, save_every=100)
    back = pullback_data(tr, 2.0)
    assert np.max(np.abs(back.u.samples - d.u.samples)) == 0.0


def test_free_flow_has_no_differences():
    rep = scattering_experiment(odd_data(G, 0.1), 5, 0, (1, 2, 4))
    assert rep.d == [0.0, 0.0] and max(rep.forward_distances) == 0.0


class TestNonlinear:
    def test_differences_decrease(self):
        rep = scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2, 4))
        assert rep.decreasing and 0 < rep.d[1] < rep.d[0]
        assert rep.forward_distances[-1] < 1e-12 * rep.d[-1]
        assert rep.forward_distance == rep.forward_distances[-2]

    def test_amplitude_law(self):
        a = scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2, 4))
        b = scattering_experiment(odd_data(G, 0.05), 5, -1, (1, 2, 4))
        assert a.d[0] / b.d[0] == pytest.approx(2.0**5, rel=1e-3)

    def test_backward_equals_forward_for_static_data(self):
        f = scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2, 4))
        b = scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2, 4), direction="backward")
        assert b.d == pytest.approx(f.d, rel=1e-12)


class TestValidation:
    def test_window(self):
        w = data_window(odd_data(G, 0.1))
        with pytest.raises(ConfigError):
            scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2 * w))

    @pytest.mark.parametrize("T", [(1,), (2, 1), (0, 1), (1, 1.005)])
    def test_times(self, T):
        with pytest.raises(ConfigError):
            scattering_experiment(odd_data(G, 0.1), 5, -1, T)

    def test_direction(self):
        with pytest.raises(ConfigError):
            scattering_experiment(odd_data(G, 0.1), 5, -1, (1, 2), direction="sideways")
