import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamlab.errors import ConfigError, NumericalError
from beamlab.spectral import (
    BeamState, Field, GridSpec, NormSpec, Spectrum, Trajectory, apply_multiplier, effective_bandwidth,
    from_spectrum, hdot_norm, hs_norm, is_conjugate_symmetric, lebesgue_norm, read_snapshot,
    sobolev_norm, spacetime_norm, to_spectrum, write_snapshot,
)

G1 = GridSpec(1, 64, 2 * math.pi)


def mode(grid, k=1):
    return Field.from_function(grid, lambda x: np.exp(2j * math.pi * k * x / grid.L), real=False,
                               centered=False)


def gaussian(grid, a=1.0):
    return Field.from_function(grid, lambda *x: np.exp(-a * sum(xi * xi for xi in x)))


class TestGrid:
    @pytest.mark.parametrize("n,N,L", [(3, 64, 1.0), (1, 48, 1.0), (1, 8, 1.0), (1, 64, 0.0), (1, 64, -2.0)])
    def test_rejects_invalid(self, n, N, L):
        with pytest.raises(ConfigError):
            GridSpec(n, N, L)

    def test_frequencies(self):
        g = GridSpec(1, 16, 4.0)
        k = g.wavenumbers
        assert sorted(k.tolist()) == list(range(-8, 8))
        assert np.allclose(g.xi1d, 2 * math.pi * k / 4.0)

    def test_centered_coords_antisymmetric(self):
        g = GridSpec(1, 32, 10.0)
        x = g.centered_coords[0]
        j = np.arange(1, 32)
        j = j[j != 16]
        assert np.array_equal(x[j], -x[32 - j])

    def test_validity_window(self):
        g = GridSpec(1, 64, 100.0)
        assert g.validity_window(5.0) == pytest.approx(100.0 / 20.0)


class TestTransforms:
    def test_constant_is_zero_mode(self):
        S = to_spectrum(Field.constant(G1, 2.5))
        assert S.coeffs[0] == pytest.approx(2.5)
        assert np.max(np.abs(S.coeffs[1:])) < 1e-15

    def test_pure_mode(self):
        c = np.array(to_spectrum(mode(G1, 1)).coeffs)
        assert abs(c[1] - 1) < 1e-14
        c[1] = 0
        assert np.max(np.abs(c)) < 1e-14

    def test_random_real_conjugate_symmetric(self):
        rng = np.random.default_rng(1)
        f = Field(GridSpec(2, 32, 5.0), rng.standard_normal((32, 32)), real=True)
        assert is_conjugate_symmetric(f.spectrum)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        f = Field(G1, rng.standard_normal(64) + 1j * rng.standard_normal(64))
        back = from_spectrum(to_spectrum(f))
        assert np.max(np.abs(back.samples - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            Field(G1, np.zeros(32))
        with pytest.raises(ConfigError):
            Spectrum(G1, np.zeros(32))

    def test_field_is_immutable(self):
        f = gaussian(G1)
        with pytest.raises(ValueError):
            f.samples[0] = 1.0


class TestMultiplier:
    def test_identity(self):
        f = gaussian(G1)
        assert np.allclose(apply_multiplier(f, lambda xi: np.ones(xi.shape[1:])).samples, f.samples)

    def test_laplacian_eigenfunction(self):
        g = GridSpec(1, 64, 10.0)
        f = mode(g)
        out = apply_multiplier(f, lambda xi: xi[0] ** 2)
        assert np.max(np.abs(out.samples - (2 * math.pi / 10.0) ** 2 * f.samples)) < 1e-13

    def test_composition(self):
        g = GridSpec(2, 32, 8.0)
        f = gaussian(g)
        m1 = (1 + g.rho) ** 0.3
        m2 = np.exp(-g.rho)
        a = apply_multiplier(apply_multiplier(f, m1), m2)
        b = apply_multiplier(f, m1 * m2)
        assert np.max(np.abs(a.samples - b.samples)) < 1e-12

    def test_nonfinite_rejected(self):
        g = GridSpec(1, 32, 8.0)
        with np.errstate(divide="ignore"):
            m = 1.0 / g.rho
        with pytest.raises(ConfigError):
            apply_multiplier(gaussian(g), m)

    def test_bessel_potential_on_gaussian_matches_quadrature(self):
        # <D>^s e^{-x^2}: compare with direct quadrature of the continuous transform
        s = 0.7
        g = GridSpec(1, 256, 40.0)
        out = apply_multiplier(gaussian(g), lambda xi: (1 + xi[0] ** 2) ** (s / 2))
        xi = np.linspace(-40, 40, 40001)
        fhat = math.sqrt(math.pi) * np.exp(-xi**2 / 4)
        for j in (0, 12, 40):
            x0 = g.centered_coords[0][j]
            ref = np.trapezoid((1 + xi**2) ** (s / 2) * fhat * np.cos(xi * x0), xi) / (2 * math.pi)
            assert out.samples[j] == pytest.approx(ref, abs=1e-9)


class TestNorms:
    def test_pure_mode_homogeneous(self):
        g = GridSpec(1, 64, 10.0)
        for s in (0.0, 0.5, 1.0, 2.3, -1.0):
            assert hdot_norm(mode(g), s) == pytest.approx((2 * math.pi / 10) ** s * math.sqrt(10), rel=1e-13)

    def test_pure_mode_2d(self):
        g = GridSpec(2, 32, 6.0)
        f = Field.from_function(g, lambda x, y: np.exp(2j * math.pi * (2 * x + 3 * y) / 6.0), real=False)
        xi = 2 * math.pi / 6.0 * math.sqrt(13)
        assert hdot_norm(f, 1.5) == pytest.approx(xi**1.5 * 6.0, rel=1e-12)

    def test_constant_homogeneous_is_zero(self):
        assert hdot_norm(Field.constant(G1, 3.0), 1.0) == 0.0

    def test_constant_l2(self):
        g = GridSpec(2, 16, 3.0)
        assert hs_norm(Field.constant(g, 1.0), 0.0) == pytest.approx(3.0)

    def test_negative_homogeneous_needs_mean_zero(self):
        with pytest.raises(ConfigError):
            hdot_norm(gaussian(G1), -0.5)
        assert hdot_norm(mode(G1), -0.5) > 0

    def test_gaussian_l2_closed_form(self):
        g = GridSpec(1, 512, 40.0)
        assert hs_norm(gaussian(g), 0) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-8)

    def test_norm_spec(self):
        f = gaussian(G1)
        assert sobolev_norm(f, NormSpec(1.0)) == hs_norm(f, 1.0)
        assert sobolev_norm(f, NormSpec(1.0, "homogeneous")) == hdot_norm(f, 1.0)
        with pytest.raises(ConfigError):
            NormSpec(1.0, "weird")

    @given(st.integers(0, 2**32 - 1), st.floats(-2, 3), st.floats(-2, 3))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_s(self, seed, s1, s2):
        rng = np.random.default_rng(seed)
        f = Field(G1, rng.standard_normal(64), real=True)
        lo, hi = sorted((s1, s2))
        assert hs_norm(f, lo) <= hs_norm(f, hi) * (1 + 1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_plancherel(self, seed):
        rng = np.random.default_rng(seed)
        g = GridSpec(2, 16, 7.0)
        f = Field(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        a, b = hs_norm(f, 0.0), lebesgue_norm(f, 2)
        assert abs(a - b) <= 1e-12 * b


class TestLebesgue:
    def test_constant(self):
        g = GridSpec(1, 32, 5.0)
        for r in (1, 2, 3.5):
            assert lebesgue_norm(Field.constant(g, -2.0), r) == pytest.approx(2.0 * 5.0 ** (1 / r))

    def test_sup(self):
        f = gaussian(G1)
        assert lebesgue_norm(f, math.inf) == np.max(np.abs(f.samples))

    def test_bad_inputs(self):
        with pytest.raises(ConfigError):
            lebesgue_norm(gaussian(G1), 0.5)
        with pytest.raises(NumericalError):
            lebesgue_norm(Field(G1, np.full(64, np.nan), real=True), 2)


class TestSpacetime:
    def _traj(self, times, fn):
        g = GridSpec(1, 64, 10.0)
        return Trajectory.from_fields(times, [Field.from_function(g, lambda x, t=t: fn(t, x)) for t in times])

    def test_constant_in_time(self):
        times = np.linspace(0, 2.0, 5)
        tr = self._traj(times, lambda t, x: np.exp(-x * x))
        inner = lebesgue_norm(tr.field(0), 3)
        assert spacetime_norm(tr, 4, 3) == pytest.approx(2.0 ** 0.25 * inner, rel=1e-13)

    def test_sup_in_time(self):
        times = np.linspace(0, 1.0, 11)
        tr = self._traj(times, lambda t, x: (1 + t) * np.exp(-x * x))
        assert spacetime_norm(tr, math.inf, math.inf) == pytest.approx(2.0)

    def test_refinement(self):
        fn = lambda t, x: np.cos(t) * np.exp(-x * x)  # noqa: E731
        a = spacetime_norm(self._traj(np.linspace(0, 2, 21), fn), 3, 2)
        b = spacetime_norm(self._traj(np.linspace(0, 2, 41), fn), 3, 2)
        assert abs(a - b) < 0.01 * b

    def test_trajectory_invariants(self):
        g = GridSpec(1, 16, 1.0)
        z = np.zeros((2, 16))
        with pytest.raises(ConfigError):
            Trajectory(g, np.array([0.0, 0.0]), z)
        with pytest.raises(ConfigError):
            Trajectory(g, np.array([0.0]), z[:1])


class TestSnapshot:
    @pytest.mark.parametrize("real", [True, False])
    def test_round_trip(self, tmp_path, real):
        g = GridSpec(2, 16, 3.5)
        rng = np.random.default_rng(0)
        data = rng.standard_normal((16, 16)) + (0 if real else 1j) * rng.standard_normal((16, 16))
        f = Field(g, data, real=real)
        p = tmp_path / "f.bin"
        write_snapshot(p, f)
        raw = p.read_bytes()
        assert raw[:4] == b"BEAM"
        back = read_snapshot(p)
        assert back.grid == g and back.real == real
        assert np.array_equal(back.samples, f.samples)

    def test_corrupt(self, tmp_path):
        p = tmp_path / "f.bin"
        write_snapshot(p, gaussian(G1))
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(ConfigError):
            read_snapshot(p)


def test_effective_bandwidth_gaussian():
    g = GridSpec(1, 512, 40.0)
    bw = effective_bandwidth(gaussian(g, 0.5), 1e-8)
    # e^{-xi^2/2} = 1e-8 at xi = sqrt(2 ln 1e8)
    assert bw == pytest.approx(math.sqrt(2 * math.log(1e8)), abs=2 * math.pi / 40)


def test_beam_state_grid_check():
    with pytest.raises(ConfigError):
        BeamState(gaussian(G1), gaussian(GridSpec(1, 32, 1.0)))
