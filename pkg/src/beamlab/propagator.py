"""Exact free beam flow, Duhamel integrals, energies, and the growth counterexample.

With ``rho = |xi|^2`` (times an optional dispersion factor) the free flow of
``u_tt + Delta^2 u = 0`` acts on each Fourier mode as

    uhat(t) = cos(t rho) fhat + sin(t rho)/rho ghat
    vhat(t) = -rho sin(t rho) fhat + cos(t rho) ghat

with ``sin(t rho)/rho`` continued by ``t`` at ``rho = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConfigError
from .spectral import (
    BeamState,
    Field,
    GridSpec,
    Trajectory,
    coeff_sobolev_norm,
    field_from_coeffs,
    lebesgue_norm,
)


def beam_symbols(rho, t):
    """Return ``(cos(t rho), sin(t rho)/rho, -rho sin(t rho))`` elementwise.

    The middle entry equals ``t`` at ``rho = 0``.  All three are unchanged by
    ``rho -> -rho`` except the last, which is odd.
    """
    rho = np.asarray(rho, dtype=float)
    a = t * rho
    c = np.cos(a)
    s = t * np.sinc(a / np.pi)
    d = -rho * np.sin(a)
    return c, s, d


@dataclass(frozen=True, eq=False)
class BeamSymbolSet:
    """Per-frequency propagator symbols for a duration ``t``."""

    t: float
    c: np.ndarray
    s: np.ndarray
    d: np.ndarray

    @classmethod
    def for_grid(cls, grid: GridSpec, t, dispersion=1.0):
        c, s, d = beam_symbols(dispersion * grid.rho, t)
        return cls(float(t), c, s, d)

    def apply(self, uh, vh):
        return self.c * uh + self.s * vh, self.d * uh + self.c * vh


def _fields(grid, uh, vh, real, t):
    return BeamState(field_from_coeffs(grid, uh, real), field_from_coeffs(grid, vh, real), t)


def linear_evolve(state: BeamState, t: float, dispersion: float = 1.0) -> BeamState:
    """Exact free evolution of ``state`` by ``t`` (negative ``t`` runs backwards)."""
    sym = BeamSymbolSet.for_grid(state.grid, t, dispersion)
    uh, vh = sym.apply(state.u.spectrum, state.v.spectrum)
    return _fields(state.grid, uh, vh, state.real, state.t + t)


def free_trajectory(state: BeamState, times, dispersion: float = 1.0) -> Trajectory:
    """Free solution sampled at ``times`` (relative to ``state.t``)."""
    times = np.asarray(times, dtype=float)
    fh, gh = state.u.spectrum, state.v.spectrum
    rho = dispersion * state.grid.rho
    us, vs = [], []
    axes = tuple(range(1, state.grid.n + 1))
    for t in times:
        c, s, d = beam_symbols(rho, t)
        us.append(c * fh + s * gh)
        vs.append(d * fh + c * gh)
    scale = fh.size
    u = np.fft.ifftn(np.stack(us), axes=axes) * scale
    v = np.fft.ifftn(np.stack(vs), axes=axes) * scale
    if state.real:
        u, v = u.real, v.real
    return Trajectory(state.grid, times + state.t, u, v, real=state.real)


# -- product integration weights for piecewise-linear forcing -------------

def _g1(a):
    """``(sin a - a cos a) / a^3``, accurate near 0."""
    a = np.asarray(a, dtype=float)
    small = np.abs(a) < 0.2
    out = np.empty_like(a)
    x = a[small] ** 2
    out[small] = 1 / 3 + x * (-1 / 30 + x * (1 / 840 + x * (-1 / 45360 + x * (1 / 3991680 + x * (-1 / 518918400)))))
    b = a[~small]
    out[~small] = (np.sin(b) - b * np.cos(b)) / b**3
    return out


def _g2(a):
    """``(cos a - 1 + a sin a) / a^2``, accurate near 0."""
    a = np.asarray(a, dtype=float)
    small = np.abs(a) < 0.2
    out = np.empty_like(a)
    x = a[small] ** 2
    out[small] = 1 / 2 + x * (-1 / 8 + x * (1 / 144 + x * (-1 / 5760 + x * (1 / 403200 + x * (-1 / 43545600)))))
    b = a[~small]
    out[~small] = (np.cos(b) - 1.0 + b * np.sin(b)) / b**2
    return out


@dataclass(frozen=True, eq=False)
class DuhamelStep:
    """Exact one-interval update for forcing linear in time on ``[0, h]``.

    ``(w, w_t)(h) = P(h) (w, w_t)(0) + (wa * Fa + wb * Fb, za * Fa + zb * Fb)``
    where ``Fa``/``Fb`` are the forcing coefficients at the interval ends.
    """

    h: float
    sym: BeamSymbolSet
    wa: np.ndarray
    wb: np.ndarray
    za: np.ndarray
    zb: np.ndarray

    @classmethod
    def build(cls, rho, h):
        sym = BeamSymbolSet(h, *beam_symbols(rho, h))
        a = h * rho
        a0 = 0.5 * h * h * np.sinc(a / (2.0 * np.pi)) ** 2
        g1 = h * h * _g1(a)
        b0 = h * np.sinc(a / np.pi)
        g2 = h * _g2(a)
        return cls(h, sym, g1, a0 - g1, g2, b0 - g2)

    def advance(self, wh, zh, Fa, Fb):
        wn, zn = self.sym.apply(wh, zh)
        return wn + self.wa * Fa + self.wb * Fb, zn + self.za * Fa + self.zb * Fb


def duhamel_samples(grid, times, forcing_hat, rho=None):
    """Duhamel solution with zero data at every sample time.

    ``forcing_hat[j]`` holds the forcing coefficients at ``times[j]`` and the
    forcing is taken linear in time between samples; the propagator between
    samples is exact.  Returns coefficient stacks ``(w, w_t)``.
    """
    rho = grid.rho if rho is None else rho
    times = np.asarray(times, dtype=float)
    w = np.zeros((times.size,) + grid.shape, dtype=np.complex128)
    z = np.zeros_like(w)
    steps = {}
    for j in range(1, times.size):
        h = times[j] - times[j - 1]
        key = round(h, 15)
        step = steps.get(key)
        if step is None:
            step = steps[key] = DuhamelStep.build(rho, h)
        w[j], z[j] = step.advance(w[j - 1], z[j - 1], forcing_hat[j - 1], forcing_hat[j])
    return w, z


ForcingLike = Union[Trajectory, Callable[[float], Field]]


def duhamel_state(forcing: ForcingLike, t: float, nodes: int = 4, order: int = 8,
                  dispersion: float = 1.0) -> BeamState:
    """``(w, w_t)(t)`` for ``w_tt + Delta^2 w = F``, ``w(0) = w_t(0) = 0``.

    A :class:`Trajectory` forcing is interpolated linearly between its samples
    and integrated against the exact kernel.  A callable ``F(s) -> Field`` is
    integrated with composite Gauss-Legendre: ``ceil(nodes * t)`` panels of
    ``order`` points each.
    """
    if t < 0:
        raise ConfigError("Duhamel integral needs t >= 0")
    if isinstance(forcing, Trajectory):
        return _duhamel_trajectory(forcing, t, dispersion)
    return _duhamel_gauss(forcing, t, nodes, order, dispersion)


def duhamel_integral(forcing: ForcingLike, t: float, nodes: int = 4, order: int = 8,
                     dispersion: float = 1.0) -> Field:
    """``int_0^t sin((t-s) Delta)/Delta F(s) ds`` as a Field."""
    return duhamel_state(forcing, t, nodes, order, dispersion).u


def _duhamel_trajectory(forcing, t, dispersion):
    grid = forcing.grid
    times = forcing.times
    if abs(times[0]) > 1e-12 or times[-1] < t - 1e-12 * max(1.0, t):
        raise ConfigError(
            f"forcing covers [{times[0]}, {times[-1]}] but the integral needs [0, {t}]",
            "forcing window covers [0, t]",
        )
    t = min(t, float(times[-1]))
    axes = tuple(range(1, grid.n + 1))
    Fh = np.fft.fftn(forcing.u, axes=axes) / grid.N**grid.n
    keep = times < t
    j = min(max(int(np.searchsorted(times, t)), 1), times.size - 1)
    theta = (t - times[j - 1]) / (times[j] - times[j - 1])
    Ft = (1 - theta) * Fh[j - 1] + theta * Fh[j]
    nodes_t = np.append(times[keep], t)
    Fk = np.concatenate([Fh[keep], Ft[None]])
    if nodes_t.size == 1:
        z = np.zeros(grid.shape, dtype=complex)
        return _fields(grid, z, z, forcing.real, t)
    w, z = duhamel_samples(grid, nodes_t, Fk, dispersion * grid.rho)
    return _fields(grid, w[-1], z[-1], forcing.real, t)


def _duhamel_gauss(F, t, nodes, order, dispersion):
    panels = max(1, math.ceil(nodes * t))
    x, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, t, panels + 1)
    acc_u = acc_v = None
    real = True
    grid = None
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        for xi, wi in zip(x, wts):
            s = a + half * (xi + 1.0)
            Fs = F(s)
            grid = Fs.grid
            real = real and Fs.real
            c, st, _ = beam_symbols(dispersion * grid.rho, t - s)
            term_u = half * wi * st * Fs.spectrum
            term_v = half * wi * c * Fs.spectrum
            acc_u = term_u if acc_u is None else acc_u + term_u
            acc_v = term_v if acc_v is None else acc_v + term_v
    return _fields(grid, acc_u, acc_v, real, t)


# -- energies ----------------------------------------------------------------

def linear_energy(state: BeamState, dispersion: float = 1.0) -> float:
    """``1/2 ||v||^2 + 1/2 ||dispersion * Delta u||^2`` computed spectrally."""
    g = state.grid
    rho = dispersion * g.rho
    e = np.abs(state.v.spectrum) ** 2 + rho**2 * np.abs(state.u.spectrum) ** 2
    return 0.5 * g.volume * float(np.sum(e))


def mode_energies(state: BeamState, dispersion: float = 1.0):
    """Per-mode ``|vhat|^2 + rho^2 |uhat|^2``; each is invariant under free flow."""
    rho = dispersion * state.grid.rho
    return np.abs(state.v.spectrum) ** 2 + rho**2 * np.abs(state.u.spectrum) ** 2


def full_energy(state: BeamState, kappa: float, omega: float, dispersion: float = 1.0) -> float:
    """Linear energy plus the potential ``-omega/(kappa+1) int |u|^{kappa+1}``."""
    if kappa <= 1:
        raise ConfigError("kappa must exceed 1", "kappa > 1")
    e = linear_energy(state, dispersion)
    if omega == 0:
        return e
    pot = lebesgue_norm(state.u, kappa + 1.0) ** (kappa + 1.0)
    return e - omega / (kappa + 1.0) * pot


# -- linear growth counterexample ---------------------------------------------

def _smooth_step(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def annulus_bump(rho, eps):
    """Smooth bump in ``rho = |xi|^2``: 1 on [3e^2/4, 5e^2/4], 0 outside [e^2/2, 3e^2/2]."""
    e2 = eps * eps
    w = e2 / 4.0
    return _smooth_step((rho - e2 / 2.0) / w) * _smooth_step((1.5 * e2 - rho) / w)


@dataclass(frozen=True)
class CounterexampleResult:
    eps: float
    s: float
    t: float
    t_star: float
    ratio: float
    ratio_hs: float
    modes: int
    band: tuple
    in_band: bool


def counterexample_growth(eps: float, s: float, grid: GridSpec, t=None, band=(0.5, 2.0),
                          min_modes: int = 8) -> CounterexampleResult:
    """Free solution from ``f = 0``, ``ghat = annulus bump`` evaluated at ``t``.

    ``t`` defaults to ``t_star = (pi/2) eps^-2``.  ``ratio`` divides
    ``||u(t)||_{H^s}`` by ``||g||_{H^{s-2}}``; ``ratio_hs`` divides by
    ``||g||_{H^s}`` instead.  ``in_band`` tells whether ``ratio * eps^2`` lies
    in ``band``.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive", "eps > 0")
    e2 = eps * eps
    modes = grid.count_modes(e2 / 2.0, 1.5 * e2)
    if modes < min_modes:
        raise ConfigError(
            f"grid resolves only {modes} modes in the annulus for eps={eps}; need {min_modes}",
            "annulus resolved by grid",
        )
    t_star = 0.5 * math.pi / e2
    t = t_star if t is None else float(t)
    gh = annulus_bump(grid.rho, eps).astype(complex)
    _, st, _ = beam_symbols(grid.rho, t)
    uh = st * gh
    num = coeff_sobolev_norm(grid, uh, s)
    ratio = num / coeff_sobolev_norm(grid, gh, s - 2.0)
    ratio_hs = num / coeff_sobolev_norm(grid, gh, s)
    scaled = ratio * e2
    return CounterexampleResult(eps, s, t, t_star, ratio, ratio_hs, modes, tuple(band),
                                bool(band[0] <= scaled <= band[1]))


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def counterexample_sweep(eps_list, s, grid, band=(0.5, 2.0)):
    """Counterexample at each ``eps``; returns ``(rows, slope, slope_hs)``."""
    rows = [counterexample_growth(e, s, grid, band=band) for e in eps_list]
    eps = [r.eps for r in rows]
    slope = loglog_slope(eps, [r.ratio for r in rows]) if len(rows) > 1 else float("nan")
    slope_hs = loglog_slope(eps, [r.ratio_hs for r in rows]) if len(rows) > 1 else float("nan")
    return rows, slope, slope_hs
