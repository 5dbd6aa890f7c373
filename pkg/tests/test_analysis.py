import math
from fractions import Fraction

import numpy as np
import pytest

from beamlab.analysis import (
    ExponentPair, ExponentTriple, as_exponent, critical_exponent, critical_exponent_exact,
    dual_space_exponent, energy_class, energy_critical_power, is_beam_admissible,
    is_schrodinger_admissible, random_band_limited, random_ensemble, scale_state, strichartz_quotient,
    theorem_selector,
)
from beamlab.errors import ConfigError
from beamlab.nonlinear import split_solve
from beamlab.propagator import linear_evolve
from beamlab.spectral import BeamState, Field, GridSpec, hdot_norm


class TestExponents:
    @pytest.mark.parametrize("n,kappa,expected", [
        (1, 3, Fraction(-3, 2)), (4, 3, Fraction(0)), (5, 9, Fraction(2)), (8, 3, Fraction(2)),
        (2, 13, Fraction(2, 3)),
    ])
    def test_critical_exponent(self, n, kappa, expected):
        assert critical_exponent_exact(n, kappa) == expected
        assert critical_exponent(n, kappa) == pytest.approx(float(expected))

    def test_critical_exponent_float_kappa(self):
        assert critical_exponent(3, 2.5) == pytest.approx(1.5 - 4 / 1.5)
        with pytest.raises(ConfigError):
            critical_exponent(3, 1.0)

    def test_as_exponent(self):
        assert as_exponent("8/3") == Fraction(8, 3)
        assert as_exponent("inf") is None and as_exponent(math.inf) is None
        assert as_exponent(0.25) == Fraction(1, 4)
        with pytest.raises(ConfigError):
            as_exponent(-math.inf)

    def test_energy_classes(self):
        assert energy_critical_power(4) is None
        assert energy_critical_power(6) == 5
        assert energy_class(4, 3) == "not-applicable"
        assert energy_class(6, 3) == "subcritical"
        assert energy_class(6, 5) == "critical"
        assert energy_class(6, 7) == "supercritical"

    def test_dual_space_exponent(self):
        assert dual_space_exponent(3, 2, 0) == Fraction(6, 7)
        assert dual_space_exponent(2, "inf", 1) == 2


class TestAdmissibility:
    @pytest.mark.parametrize("p,q,n,ok", [
        (2, 6, 3, True), ("inf", 2, 3, True), (4, "inf", 1, True), (8, 4, 1, True),
        (2, "inf", 2, False), (4, 4, 2, True), (3, 3, 2, False), (1, 2, 1, False),
    ])
    def test_schrodinger(self, p, q, n, ok):
        assert is_schrodinger_admissible(p, q, n) is ok

    @pytest.mark.parametrize("p,r,s,n,ok", [
        (8, 4, "1/4", 2, True), (4, 4, 0, 2, True), ("inf", 2, 0, 3, True), (2, 6, 0, 3, True),
        (2, "inf", 0, 2, False), (8, 4, 0.25, 1, False), (8, 4, -1, 2, False), (4, 4, 0.1, 2, False),
    ])
    def test_beam(self, p, r, s, n, ok):
        assert is_beam_admissible(p, r, s, n) is ok

    def test_containers_validate(self):
        with pytest.raises(ConfigError):
            ExponentPair(1, 2)
        with pytest.raises(ConfigError):
            ExponentTriple(4, 4, -0.5)
        t = ExponentTriple("inf", "8/3")
        assert t.p_float == math.inf and t.r_float == pytest.approx(8 / 3)


class TestTheoremSelector:
    def test_n8_cubic_is_critical_homogeneous(self):
        rep = theorem_selector(8, 3, 2)
        assert rep.theorem == "critical-homogeneous"
        assert rep.s_c == 2.0 and rep.energy_class == "critical"

    def test_off_critical_regularity(self):
        rep = theorem_selector(8, 3, 1.5)
        assert rep.theorem is None
        assert ("s = n/2 - 4/(kappa-1)", False) in rep.checklist

    def test_n3_boundary(self):
        rep = theorem_selector(3, 5, critical_exponent(3, 5))
        assert rep.theorem is None and rep.boundary
        assert theorem_selector(3, 7, critical_exponent_exact(3, 7)).theorem == "critical-homogeneous"

    def test_n4_not_applicable(self):
        rep = theorem_selector(4, 5, critical_exponent(4, 5))
        assert rep.energy_class == "not-applicable"
        assert rep.theorem is None

    def test_lower_power_boundary(self):
        # 8/n + 1 = 3 at n = 4
        rep = theorem_selector(4, 3, 0)
        assert rep.boundary and rep.theorem is None

    def test_supercritical(self):
        sc = critical_exponent_exact(5, 11)
        assert theorem_selector(5, 11, sc).theorem == "supercritical-homogeneous"
        assert theorem_selector(5, 11, sc, "inhomogeneous").theorem == "supercritical-inhomogeneous"
        assert theorem_selector(5, 3, 0.5, "inhomogeneous").theorem is None

    def test_as_dict(self):
        d = theorem_selector(5, 3, 0.5).as_dict()
        assert d["theorem"] == "critical-homogeneous"
        assert all(set(c) == {"hypothesis", "holds"} for c in d["checklist"])

    def test_rejects(self):
        with pytest.raises(ConfigError):
            theorem_selector(5, 1, 0)
        with pytest.raises(ConfigError):
            theorem_selector(5, 3, 0, "mixed")


def wave_packet(grid):
    x = grid.centered_coords[0]
    f = np.exp(-x**2) * np.cos(3 * x)
    g = x * np.exp(-x**2)
    return BeamState(Field(grid, f, real=True), Field(grid, g, real=True))


class TestScaling:
    G = GridSpec(1, 128, 20.0)

    @pytest.mark.parametrize("lam", [0.5, 2.0, 3.7])
    @pytest.mark.parametrize("s", [0.0, 1.0, 2.5])
    def test_norm_law(self, lam, s):
        kappa, n = 5.0, 1
        a = 4 / (kappa - 1)
        st = wave_packet(self.G)
        sc = scale_state(st, lam, kappa)
        fac = lam ** (n / 2 - s - a)
        assert hdot_norm(sc.u, s) == pytest.approx(fac * hdot_norm(st.u, s), rel=1e-12)
        assert hdot_norm(sc.v, s - 2) == pytest.approx(fac * hdot_norm(st.v, s - 2), rel=1e-12)

    def test_critical_norm_invariant(self):
        kappa = 9.0
        sc = critical_exponent(1, kappa)
        st = wave_packet(self.G)
        out = scale_state(st, 2.5, kappa)
        assert hdot_norm(out.u, sc) == pytest.approx(hdot_norm(st.u, sc), rel=1e-12)

    def test_round_trip(self):
        st = wave_packet(self.G)
        back = scale_state(scale_state(st, 3.0, 3), 1 / 3.0, 3)
        assert back.grid.L == pytest.approx(self.G.L)
        assert np.allclose(back.u.samples, st.u.samples, rtol=1e-14)
        assert np.allclose(back.v.samples, st.v.samples, rtol=1e-14)

    def test_commutes_with_free_flow(self):
        st = wave_packet(self.G)
        lam, t = 1.5, 0.8
        a = scale_state(linear_evolve(st, t), lam, 3)
        b = linear_evolve(scale_state(st, lam, 3), lam**2 * t)
        assert np.max(np.abs(a.u.samples - b.u.samples)) < 1e-13

    def test_commutes_with_nonlinear_flow(self):
        st = wave_packet(self.G)
        lam, kappa = 2.0, 3
        a = split_solve(st, kappa, -1, 0.5, 0.005).state(-1)
        b = split_solve(scale_state(st, lam, kappa), kappa, -1, lam**2 * 0.5, lam**2 * 0.005).state(-1)
        diff = scale_state(a, lam, kappa).u.samples - b.u.samples
        assert np.max(np.abs(diff)) < 1e-13

    @pytest.mark.parametrize("lam", [0, -1, math.inf, math.nan])
    def test_rejects(self, lam):
        with pytest.raises(ConfigError):
            scale_state(wave_packet(self.G), lam, 3)


class TestQuotient:
    G = GridSpec(2, 64, 60.0)
    T = ExponentTriple(8, 4, Fraction(1, 4))

    def test_reproducible(self):
        a = random_band_limited(self.G, np.random.default_rng(7))
        b = random_band_limited(self.G, np.random.default_rng(7))
        assert np.array_equal(a.samples, b.samples)
        assert abs(np.mean(a.samples)) < 1e-15

    def test_homogeneous_of_degree_zero(self):
        ens = random_ensemble(self.G, np.random.default_rng(1), 2)
        q1, _ = strichartz_quotient(ens, self.T, samples=16)
        scaled = [BeamState(st.u * 3.0, st.v * 3.0) for st in ens]
        q2, _ = strichartz_quotient(scaled, self.T, samples=16)
        assert q1 > 0 and q2 == pytest.approx(q1, rel=1e-12)

    def test_zero_data_excluded(self):
        ens = [BeamState.zeros(self.G)] + random_ensemble(self.G, np.random.default_rng(2), 1)
        q, rows = strichartz_quotient(ens, self.T, samples=8)
        assert rows[0].excluded and not rows[1].excluded
        assert q == rows[1].quotient

    def test_inadmissible_rejected(self):
        ens = random_ensemble(self.G, np.random.default_rng(3), 1)
        with pytest.raises(ConfigError):
            strichartz_quotient(ens, ExponentTriple(4, 4, Fraction(1, 4)))
