"""Small-data wave-operator probe.

A nonlinear run is pulled back to ``t = 0`` by the free flow at a list of
times; if the solution scatters, the pulled-back data form a Cauchy sequence
in the scale-invariant energy space ``(H^{s_c}, H^{s_c - 2})``.  All
differences are formed from the solver's deviation from free flow, so they
stay accurate far below the rounding level of the solution itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from .analysis import critical_exponent
from .errors import ConfigError
from .nonlinear import split_solve, time_reflect
from .propagator import BeamSymbolSet, linear_evolve
from .spectral import (BeamState, Field, GridSpec, Trajectory, coeff_sobolev_norm, effective_bandwidth,
                       field_from_coeffs)


@dataclass(frozen=True)
class ScatterNormSpec:
    """``(||u||^2_{Hdot^{s_c}} + ||u_t||^2_{Hdot^{s_c - 2}})^{1/2}``."""

    n: int
    kappa: float

    @property
    def s_c(self):
        return critical_exponent(self.n, self.kappa)

    def coeff_norm(self, grid, uh, vh):
        a = coeff_sobolev_norm(grid, uh, self.s_c, homogeneous=True)
        b = coeff_sobolev_norm(grid, vh, self.s_c - 2.0, homogeneous=True)
        return math.hypot(a, b)

    def __call__(self, state: BeamState):
        return self.coeff_norm(state.grid, state.u.spectrum, state.v.spectrum)


def odd_data(grid: GridSpec, amplitude: float) -> BeamState:
    """``(amplitude * x e^{-|x|^2/2}, 0)``: odd in ``x_1``, hence mean-zero for all time."""
    f = Field.from_function(grid, lambda *x: amplitude * x[0] * np.exp(-0.5 * sum(xi * xi for xi in x)))
    return BeamState.from_data(f)


def data_window(state: BeamState, rtol: float = 1e-8) -> float:
    """Validity window of the grid for the bandwidth of ``state``."""
    bw = max(effective_bandwidth(state.u, rtol), effective_bandwidth(state.v, rtol))
    return state.grid.validity_window(bw if bw > 0 else None)


def _check_window(T, window):
    if T > window * (1 + 1e-12):
        raise ConfigError(f"time {T} exceeds the validity window {window:.6g}",
                          "T <= L / (4 xi_max)")


def _pullback_deviation(traj: Trajectory, j: int, dispersion=1.0):
    """Coefficients of ``P(-T_j)`` applied to the deviation at sample ``j``."""
    T = float(traj.times[j] - traj.times[0])
    dev = traj.deviation_state(j)
    sym = BeamSymbolSet.for_grid(traj.grid, -T, dispersion)
    return sym.apply(dev.u.spectrum, dev.v.spectrum)


def pullback_data(traj: Trajectory, T_j: float, dispersion: float = 1.0,
                  window: Optional[float] = None) -> BeamState:
    """Data at ``t = 0`` whose free evolution matches ``traj`` at ``T_j``."""
    j = traj.index_of(traj.times[0] + T_j)
    if window is None:
        data = traj.free_data if traj.free_data is not None else traj.state(0)
        window = data_window(data)
    _check_window(T_j, window)
    if traj.du is None or traj.free_data is None:
        back = linear_evolve(traj.state(j), -T_j, dispersion)
        return BeamState(back.u, back.v, 0.0)
    uh, vh = _pullback_deviation(traj, j, dispersion)
    data = traj.free_data
    return BeamState(data.u + field_from_coeffs(traj.grid, uh, traj.real),
                     data.v + field_from_coeffs(traj.grid, vh, traj.real), 0.0)


@dataclass
class ScatterReport:
    T_list: List[float]
    d: List[float]
    decreasing: bool
    forward_distances: List[float]
    window: float
    data_norm: float
    pullback_offsets: List[float]
    direction: str = "forward"
    meta: dict = field(default_factory=dict)

    @property
    def forward_distance(self):
        """Distance to the free flow of the last pullback at the latest informative time."""
        return self.forward_distances[-2] if len(self.forward_distances) > 1 else 0.0

    def as_dict(self):
        return {
            "T_list": self.T_list, "d": self.d, "decreasing": self.decreasing,
            "forward_distance": self.forward_distance, "forward_distances": self.forward_distances,
            "window": self.window, "data_norm": self.data_norm,
            "pullback_offsets": self.pullback_offsets, "direction": self.direction,
        }


def scattering_experiment(data: BeamState, kappa: float, omega: float, T_list: Sequence[float],
                          dt: float = 0.01, direction: str = "forward", dealias=None,
                          dispersion: float = 1.0) -> ScatterReport:
    """Consecutive pullback differences ``d_j`` and the forward distance.

    ``direction="backward"`` runs the same experiment on the time-reflected
    data, which probes the solution for negative times.
    """
    T_list = [float(t) for t in T_list]
    if len(T_list) < 2 or any(b <= a for a, b in zip(T_list, T_list[1:])) or T_list[0] <= 0:
        raise ConfigError("T_list must be positive and strictly increasing with >= 2 entries",
                          "0 < T_1 < T_2 < ...")
    if direction not in ("forward", "backward"):
        raise ConfigError(f"unknown direction {direction!r}", "direction in {forward, backward}")
    norm = ScatterNormSpec(data.grid.n, kappa)
    window = data_window(data)
    _check_window(T_list[-1], window)
    start = data if direction == "forward" else time_reflect(data)
    start = BeamState(start.u, start.v, 0.0)

    ks = [round(t / dt) for t in T_list]
    if any(abs(k * dt - t) > 1e-9 * t for k, t in zip(ks, T_list)):
        raise ConfigError("every T_j must be a multiple of dt", "T_j / dt integer")
    every = reduce(math.gcd, ks)
    traj = split_solve(start, kappa, omega, T_list[-1], dt, dispersion=dispersion,
                       dealias=dealias, save_every=every)
    idx = [traj.index_of(t) for t in T_list]
    pulls = [_pullback_deviation(traj, j, dispersion) for j in idx]
    grid = data.grid
    d = [norm.coeff_norm(grid, a[0] - b[0], a[1] - b[1]) for a, b in zip(pulls, pulls[1:])]
    offsets = [norm.coeff_norm(grid, *p) for p in pulls]

    last_u, last_v = pulls[-1]
    fwd = []
    for T, j in zip(T_list, idx):
        sym = BeamSymbolSet.for_grid(grid, T, dispersion)
        lu, lv = sym.apply(last_u, last_v)
        dev = traj.deviation_state(j)
        fwd.append(norm.coeff_norm(grid, dev.u.spectrum - lu, dev.v.spectrum - lv))
    decreasing = all(b < a for a, b in zip(d, d[1:]))
    return ScatterReport(T_list, d, decreasing, fwd, window, norm(data), offsets, direction,
                         meta={"kappa": kappa, "omega": omega, "dt": dt, "s_c": norm.s_c})
