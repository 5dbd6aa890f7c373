"""Nonlinear solvers for ``u_tt + Delta^2 u = omega |u|^{kappa-1} u``.

Two independent routes are provided:

* :func:`picard_solve` iterates ``u_m = free flow + Duhamel(F(u_{m-1}))`` on a
  uniform time mesh, recording contraction diagnostics ``A_m``/``B_m`` in a
  space-time Lebesgue norm;
* :func:`split_solve` is a Strang splitting (exact linear half steps around a
  nonlinear kick) used as an oracle for the first.

Both carry the solution as the free flow of the data plus a deviation, so
nonlinear corrections far below the rounding level of ``u`` stay resolved.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError
from .propagator import BeamSymbolSet, beam_symbols, duhamel_samples
from .spectral import BeamState, Field, Trajectory, coeff_sobolev_norm, spacetime_norm_samples

log = logging.getLogger(__name__)


def apply_nonlinearity(u: Field, kappa: float, omega: float) -> Field:
    """Pointwise ``omega |u|^{kappa-1} u``."""
    if kappa <= 1:
        raise ConfigError("kappa must exceed 1", "kappa > 1")
    return Field(u.grid, kernels.power_nonlinearity(u.samples, float(kappa), float(omega)), u.real)


def is_odd_integer(kappa):
    return float(kappa).is_integer() and int(kappa) % 2 == 1


class _Forcing:
    """Maps physical samples to (optionally dealiased) forcing coefficients."""

    def __init__(self, grid, kappa, omega, dealias):
        if kappa <= 1:
            raise ConfigError("kappa must exceed 1", "kappa > 1")
        self.grid = grid
        self.kappa = float(kappa)
        self.omega = float(omega)
        if dealias is None:
            dealias = is_odd_integer(kappa)
        self.mask = grid.dealias_mask() if dealias else None
        self.axes = tuple(range(-grid.n, 0))
        self.scale = float(grid.N**grid.n)

    def __call__(self, u):
        if self.omega == 0:
            return np.zeros(u.shape, dtype=complex)
        F = kernels.power_nonlinearity(u, self.kappa, self.omega)
        Fh = np.fft.fftn(F, axes=self.axes) / self.scale
        if self.mask is not None:
            Fh = Fh * self.mask
        return Fh


def _to_physical(grid, coeffs, real):
    axes = tuple(range(-grid.n, 0))
    out = np.fft.ifftn(coeffs, axes=axes) * float(grid.N**grid.n)
    return out.real if real else out


def _free_coeffs(data, times, rho):
    fh, gh = data.u.spectrum, data.v.spectrum
    uh = np.empty((len(times),) + fh.shape, dtype=complex)
    vh = np.empty_like(uh)
    for j, t in enumerate(times):
        c, s, d = beam_symbols(rho, t)
        uh[j] = c * fh + s * gh
        vh[j] = d * fh + c * gh
    return uh, vh


def _make_trajectory(data, times, lin_uh, lin_vh, wh, zh, meta=None):
    grid, real = data.grid, data.real
    du = _to_physical(grid, wh, real)
    dv = _to_physical(grid, zh, real)
    u = _to_physical(grid, lin_uh, real) + du
    v = _to_physical(grid, lin_vh, real) + dv
    return Trajectory(grid, times + data.t, u, v, real=real, free_data=data, du=du, dv=dv,
                      meta=meta or {})


# -- Picard iteration ----------------------------------------------------------

@dataclass(frozen=True)
class PicardConfig:
    """Settings for :func:`picard_solve`.

    ``nodes`` is the number of mesh intervals per unit time.  The space-time
    exponents default to ``max(2, (n+2)(kappa-1)/4)``.
    """

    T: float
    M_max: int = 50
    nodes: int = 256
    tol: float = 1e-10
    p_st: Optional[float] = None
    r_st: Optional[float] = None
    dealias: Optional[bool] = None
    divergence_factor: float = 10.0

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("T must be positive", "T > 0")
        if not self.tol > 0:
            raise ConfigError("tol must be positive", "tol > 0")
        if self.M_max < 2:
            raise ConfigError("M_max must be at least 2", "M_max >= 2")
        for name in ("p_st", "r_st"):
            v = getattr(self, name)
            if v is not None and v < 2:
                raise ConfigError(f"{name} must be >= 2", f"{name} >= 2")

    def exponents(self, n, kappa):
        default = max(2.0, (n + 2) * (kappa - 1) / 4.0)
        return (self.p_st if self.p_st is not None else default,
                self.r_st if self.r_st is not None else default)

    def mesh(self):
        M = max(2, math.ceil(self.nodes * self.T - 1e-9))
        return np.linspace(0.0, self.T, M + 1)


@dataclass
class PicardDiagnostics:
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    residual: float = float("nan")
    status: str = ""
    p_st: float = 2.0
    r_st: float = 2.0

    @property
    def ratios(self):
        """``B_{m+1}/B_m`` for ``m >= 1``."""
        B = self.B
        return [B[m + 1] / B[m] for m in range(1, len(B) - 1) if B[m] > 0]

    def as_dict(self):
        return {
            "A": list(self.A),
            "B": list(self.B),
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "status": self.status,
            "p_st": self.p_st,
            "r_st": self.r_st,
        }


def picard_solve(data: BeamState, kappa: float, omega: float, cfg: PicardConfig,
                 dispersion: float = 1.0):
    """Picard iteration for the Duhamel formulation on ``[0, cfg.T]``.

    Starts from ``u_{-1} = 0`` so ``u_0`` is the free solution.  Iteration stops
    when ``B_m / B_0 < tol`` (converged), when ``B_m > divergence_factor * B_0``
    (diverged) or after ``M_max`` iterations.  Non-convergence is reported in
    the diagnostics rather than raised.
    """
    grid, real = data.grid, data.real
    times = cfg.mesh()
    rho = dispersion * grid.rho
    p, r = cfg.exponents(grid.n, kappa)
    forcing = _Forcing(grid, kappa, omega, cfg.dealias)

    lin_uh, lin_vh = _free_coeffs(data, times, rho)
    lin_u = _to_physical(grid, lin_uh, real)

    def st(samples):
        return spacetime_norm_samples(times, samples, grid, p, r)

    def phi(w_phys):
        Fh = forcing(lin_u + w_phys)
        return duhamel_samples(grid, times, Fh, rho)

    diag = PicardDiagnostics(p_st=p, r_st=r)
    A0 = st(lin_u)
    diag.A.append(A0)
    diag.B.append(A0)
    wh = np.zeros_like(lin_uh)
    zh = np.zeros_like(lin_uh)
    w = np.zeros(lin_u.shape, dtype=lin_u.dtype)
    B0 = A0 if A0 > 0 else 1.0
    status = "max-iterations"
    for m in range(1, cfg.M_max + 1):
        wh_new, zh_new = phi(w)
        w_new = _to_physical(grid, wh_new, real)
        Bm = st(w_new - w)
        wh, zh, w = wh_new, zh_new, w_new
        diag.A.append(st(lin_u + w))
        diag.B.append(Bm)
        diag.iterations = m
        if Bm / B0 < cfg.tol:
            status = "converged"
            break
        if Bm > cfg.divergence_factor * B0:
            status = "diverged"
            log.warning("Picard iteration diverged at m=%d (B_m/B_0=%.3e)", m, Bm / B0)
            break
    diag.status = status
    diag.converged = status == "converged"
    wh_chk, _ = phi(w)
    diag.residual = st(_to_physical(grid, wh_chk, real) - w) / B0
    traj = _make_trajectory(data, times, lin_uh, lin_vh, wh, zh, meta={"solver": "picard"})
    return traj, diag


def picard_residual(traj: Trajectory, kappa, omega, dispersion=1.0, dealias=None, p=2.0, r=2.0):
    """Relative space-time residual of the Duhamel equation on a trajectory's own mesh."""
    data = traj.free_data if traj.free_data is not None else traj.state(0)
    grid = traj.grid
    times = traj.times - traj.times[0]
    rho = dispersion * grid.rho
    forcing = _Forcing(grid, kappa, omega, dealias)
    lin_uh, _ = _free_coeffs(data, times, rho)
    wh, _ = duhamel_samples(grid, times, forcing(traj.u), rho)
    rhs = _to_physical(grid, lin_uh + wh, traj.real)
    den = spacetime_norm_samples(times, traj.u, grid, p, r)
    return spacetime_norm_samples(times, traj.u - rhs, grid, p, r) / (den if den > 0 else 1.0)


# -- Strang splitting ----------------------------------------------------------

def _step_count(T, dt):
    if not (dt > 0 and T > 0):
        raise ConfigError("T and dt must be positive", "dt > 0")
    steps = round(T / dt)
    if steps < 2 or abs(steps * dt - T) > 1e-9 * T:
        raise ConfigError(f"dt={dt} must divide T={T} into at least 2 steps", "dt divides T")
    return steps


def split_solve(data: BeamState, kappa: float, omega: float, T: float, dt: float,
                dispersion: float = 1.0, dealias: Optional[bool] = None,
                save_every: int = 1) -> Trajectory:
    """Strang splitting: exact half step, kick ``v += dt F(u)``, exact half step.

    Second order in ``dt``; for ``omega = 0`` it reproduces the free flow
    exactly.  Samples are stored every ``save_every`` steps and at ``T``.
    """
    grid, real = data.grid, data.real
    steps = _step_count(T, dt)
    rho = dispersion * grid.rho
    forcing = _Forcing(grid, kappa, omega, dealias)
    half = BeamSymbolSet(dt / 2, *beam_symbols(rho, dt / 2))
    fh, gh = data.u.spectrum, data.v.spectrum

    wh = np.zeros(grid.shape, dtype=complex)
    zh = np.zeros(grid.shape, dtype=complex)
    saved_t, saved_w, saved_z = [0.0], [wh], [zh]
    for k in range(steps):
        wh, zh = half.apply(wh, zh)
        if omega != 0:
            c, s, _ = beam_symbols(rho, (k + 0.5) * dt)
            u_mid = _to_physical(grid, c * fh + s * gh + wh, real)
            zh = zh + dt * forcing(u_mid)
        wh, zh = half.apply(wh, zh)
        if (k + 1) % save_every == 0 or k + 1 == steps:
            saved_t.append((k + 1) * dt)
            saved_w.append(wh)
            saved_z.append(zh)
    times = np.array(saved_t)
    times[-1] = T
    lin_uh, lin_vh = _free_coeffs(data, times, rho)
    return _make_trajectory(data, times, lin_uh, lin_vh, np.stack(saved_w), np.stack(saved_z),
                            meta={"solver": "split", "dt": dt})


def time_reflect(state: BeamState) -> BeamState:
    """``(u, v) -> (u, -v)``; maps solutions to their time reversals."""
    return BeamState(state.u, -state.v, -state.t)


# -- cross validation ------------------------------------------------------------

@dataclass
class CrossValidation:
    max_pointwise: float
    hs_discrepancy: float
    s: float
    threshold: float
    common_times: int
    picard: PicardDiagnostics
    passed: bool

    def as_dict(self):
        return {
            "max_pointwise": self.max_pointwise,
            "hs_discrepancy": self.hs_discrepancy,
            "s": self.s,
            "threshold": self.threshold,
            "common_times": self.common_times,
            "passed": self.passed,
            "picard": self.picard.as_dict(),
        }


def cross_validate(data: BeamState, kappa, omega, T, dt=1e-3, nodes=None, tol=1e-12,
                   threshold=1e-6, s=1.0, M_max=50, raise_on_fail=True) -> CrossValidation:
    """Run both solvers and compare them at every shared sample time.

    A discrepancy above ``threshold`` raises :class:`NumericalError` unless
    ``raise_on_fail`` is false.
    """
    nodes = nodes if nodes is not None else round(1.0 / dt)
    traj_p, diag = picard_solve(data, kappa, omega, PicardConfig(T=T, nodes=nodes, tol=tol, M_max=M_max))
    if not diag.converged:
        raise NumericalError("Picard iteration did not converge", diag.as_dict())
    traj_s = split_solve(data, kappa, omega, T, dt)
    grid = data.grid
    max_pw = hs = 0.0
    common = 0
    for j, t in enumerate(traj_p.times):
        k = int(np.argmin(np.abs(traj_s.times - t)))
        if abs(traj_s.times[k] - t) > 1e-9:
            continue
        common += 1
        du = traj_p.du[j] - traj_s.du[k]
        max_pw = max(max_pw, float(np.max(np.abs(du))))
        hs = max(hs, coeff_sobolev_norm(grid, np.fft.fftn(du) / du.size, s))
    if common == 0:
        raise NumericalError("solvers share no sample times")
    report = CrossValidation(max_pw, hs, s, threshold, common, diag, max_pw <= threshold)
    if raise_on_fail and not report.passed:
        raise NumericalError(f"solver discrepancy {max_pw:.3e} exceeds {threshold:.1e}", report.as_dict())
    return report
