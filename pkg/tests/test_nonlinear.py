import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from beamlab.errors import ConfigError, NumericalError
from beamlab.nonlinear import (
    PicardConfig, apply_nonlinearity, cross_validate, is_odd_integer, picard_residual, picard_solve,
    split_solve, time_reflect,
)
from beamlab.propagator import free_trajectory, full_energy
from beamlab.spectral import BeamState, Field, GridSpec


def gauss_data(grid, amp=0.05, width=1.0):
    x = grid.centered_coords[0]
    return BeamState.from_data(Field(grid, amp * np.exp(-(x / width) ** 2), real=True))


def const_ode(u0, kappa, omega, T):
    sol = solve_ivp(lambda t, y: [y[1], omega * abs(y[0]) ** (kappa - 1) * y[0]], (0, T), [u0, 0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[0, -1]


def test_apply_nonlinearity():
    g = GridSpec(1, 16, 1.0)
    f = Field(g, np.linspace(-1, 1, 16), real=True)
    out = apply_nonlinearity(f, 3, -1)
    assert np.allclose(out.samples, -f.samples**3)
    with pytest.raises(ConfigError):
        apply_nonlinearity(f, 1.0, 1)


def test_is_odd_integer():
    assert is_odd_integer(3) and is_odd_integer(13.0)
    assert not is_odd_integer(2) and not is_odd_integer(3.5)


class TestFreeLimit:
    def test_split_without_nonlinearity_is_free(self):
        g = GridSpec(1, 64, 20.0)
        d = gauss_data(g, 1.0)
        tr = split_solve(d, 3, 0, 1.0, 0.01, save_every=25)
        ref = free_trajectory(d, tr.times)
        assert np.max(np.abs(tr.u - ref.u)) < 1e-13
        assert np.max(np.abs(tr.du)) == 0.0

    def test_picard_without_nonlinearity_is_free(self):
        g = GridSpec(1, 64, 20.0)
        d = gauss_data(g, 1.0)
        tr, diag = picard_solve(d, 3, 0, PicardConfig(T=1.0, nodes=50))
        assert diag.converged and diag.iterations == 1
        assert np.max(np.abs(tr.u - free_trajectory(d, tr.times).u)) < 1e-13


class TestSpatiallyConstant:
    @pytest.mark.parametrize("omega", [-1.0, 1.0])
    def test_split_matches_ode(self, omega):
        g = GridSpec(1, 16, 4.0)
        d = BeamState.from_data(Field.constant(g, 0.8))
        tr = split_solve(d, 3, omega, 2.0, 1e-3)
        assert np.allclose(tr.u[-1], const_ode(0.8, 3, omega, 2.0), atol=1e-6)

    def test_picard_matches_ode(self):
        g = GridSpec(1, 16, 4.0)
        d = BeamState.from_data(Field.constant(g, 0.5))
        tr, diag = picard_solve(d, 3, -1, PicardConfig(T=1.0, nodes=2000, tol=1e-13))
        assert diag.converged
        assert np.allclose(tr.u[-1], const_ode(0.5, 3, -1, 1.0), atol=1e-7)


class TestPicard:
    def test_contracts(self):
        g = GridSpec(1, 128, 40.0)
        tr, diag = picard_solve(gauss_data(g), 3, -1, PicardConfig(T=0.5, nodes=400, tol=1e-12))
        assert diag.converged
        assert max(diag.ratios) < 0.01
        assert diag.B[0] == diag.A[0]
        assert diag.residual < 1e-12
        assert picard_residual(tr, 3, -1) < 1e-12

    def test_divergence_reported(self):
        g = GridSpec(1, 64, 10.0)
        tr, diag = picard_solve(gauss_data(g, 5.0), 3, 1, PicardConfig(T=2.0, nodes=100, M_max=30))
        assert not diag.converged
        assert diag.status in ("diverged", "max-iterations")

    def test_default_exponents(self):
        assert PicardConfig(T=1).exponents(1, 3) == (2.0, 2.0)
        assert PicardConfig(T=1).exponents(2, 13) == (12.0, 12.0)
        assert PicardConfig(T=1, p_st=4).exponents(2, 13) == (4, 12.0)

    @pytest.mark.parametrize("kw", [dict(T=0), dict(T=1, tol=0), dict(T=1, M_max=1), dict(T=1, p_st=1.5)])
    def test_config_validation(self, kw):
        with pytest.raises(ConfigError):
            PicardConfig(**kw)


class TestSplit:
    def test_second_order(self):
        g = GridSpec(1, 128, 30.0)
        d = gauss_data(g, 1.0)
        ref = split_solve(d, 3, -1, 1.0, 1e-4).du[-1]
        errs = [np.max(np.abs(split_solve(d, 3, -1, 1.0, dt).du[-1] - ref)) for dt in (0.02, 0.01, 0.005)]
        slope = np.polyfit(np.log([0.02, 0.01, 0.005]), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_real_data_stays_real(self):
        g = GridSpec(2, 32, 10.0)
        x, y = g.centered_coords
        d = BeamState.from_data(Field(g, 0.5 * np.exp(-x**2 - y**2), real=True))
        tr = split_solve(d, 3, -1, 0.2, 0.01)
        assert tr.real and not np.iscomplexobj(tr.u)

    def test_time_reversal(self):
        g = GridSpec(1, 128, 30.0)
        d = gauss_data(g, 1.0)
        fwd = split_solve(d, 3, -1, 1.0, 0.005)
        back = split_solve(time_reflect(fwd.state(len(fwd) - 1)), 3, -1, 1.0, 0.005)
        end = back.state(len(back) - 1)
        assert np.max(np.abs(end.u.samples - d.u.samples)) < 1e-12
        assert np.max(np.abs(end.v.samples + d.v.samples)) < 1e-11

    def test_energy_drift_second_order(self):
        g = GridSpec(1, 128, 30.0)
        d = gauss_data(g, 1.0)
        e0 = full_energy(d, 3, -1)
        drift = [abs(full_energy(split_solve(d, 3, -1, 1.0, dt).state(-1), 3, -1) - e0) for dt in (0.02, 0.01)]
        assert drift[1] < drift[0] / 3

    def test_step_must_divide(self):
        g = GridSpec(1, 16, 4.0)
        with pytest.raises(ConfigError):
            split_solve(gauss_data(g), 3, -1, 1.0, 0.3)


class TestCrossValidation:
    def test_agree(self):
        g = GridSpec(1, 256, 40.0)
        rep = cross_validate(gauss_data(g), 3, -1, 0.5, dt=1e-3, threshold=1e-6)
        assert rep.passed and rep.common_times > 100
        assert rep.max_pointwise < 1e-8

    def test_raises_on_disagreement(self):
        g = GridSpec(1, 64, 20.0)
        with pytest.raises(NumericalError):
            cross_validate(gauss_data(g, 1.0), 3, -1, 0.5, dt=0.05, nodes=20, threshold=1e-14)
