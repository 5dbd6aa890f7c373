"""Experiment registry: one runner per CLI subcommand."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .. import analysis, dispersion, nonlinear, propagator, scattering
from ..errors import ConfigError
from ..spectral import BeamState, Field, hs_norm
from .config import RunConfig


@dataclass
class Outcome:
    results: dict
    series: List[dict] = field(default_factory=list)
    snapshots: Dict[str, Field] = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    tag: str
    module: str
    op: str
    certifies: str
    runner: Callable[[RunConfig], Outcome]
    defaults: dict
    uses_grid: bool = True


REGISTRY: Dict[str, Experiment] = {}


def experiment(tag, module, op, certifies, uses_grid=True, **defaults):
    def deco(fn):
        REGISTRY[tag] = Experiment(tag, module, op, certifies, fn, defaults, uses_grid)
        return fn

    return deco


def default_config(tag) -> RunConfig:
    if tag not in REGISTRY:
        raise ConfigError(f"unknown experiment {tag!r}", f"experiment in {sorted(REGISTRY)}")
    d = dict(REGISTRY[tag].defaults)
    params = d.pop("params", {})
    return RunConfig(experiment=tag, params=dict(params), **d)


def list_experiments():
    """Catalog rows ``{tag, module, op, certifies}`` sorted by tag."""
    return [{"tag": e.tag, "module": e.module, "op": e.op, "certifies": e.certifies}
            for e in sorted(REGISTRY.values(), key=lambda e: e.tag)]


def _gaussian_data(grid, amp):
    return BeamState.from_data(Field.from_function(grid, lambda *x: amp * np.exp(-sum(xi * xi for xi in x))))


def _times(cfg, fallback):
    return cfg.T if cfg.T else tuple(fallback)


# -- linear -------------------------------------------------------------------------

@experiment("linear", "propagator", "linear_evolve",
            "exact free propagation: a plane wave evolves by the scalar factor cos(t|xi|^2), "
            "and the per-mode linear energy is conserved",
            n=1, N=64, L=2 * math.pi, T=(0.1, 1.0, 10.0), params={"mode": 3})
def run_linear(cfg):
    grid = cfg.grid()
    mode = int(cfg.param("mode", 3))
    xi = 2 * math.pi * mode / grid.L
    x = grid.x1d
    wave = np.exp(1j * xi * x)
    shape = (grid.N,) * grid.n
    if grid.n == 2:
        wave = np.broadcast_to(wave[:, None], shape)
    data = BeamState.from_data(Field(grid, np.array(wave), real=False))
    e0 = propagator.linear_energy(data)
    m0 = propagator.mode_energies(data)
    rows, worst, drift, mode_drift = [], 0.0, 0.0, 0.0
    for t in _times(cfg, (0.1, 1.0, 10.0)):
        st = propagator.linear_evolve(data, t)
        exact = math.cos(t * xi * xi) * data.u.samples
        err = float(np.max(np.abs(st.u.samples - exact)))
        e = propagator.linear_energy(st)
        md = float(np.max(np.abs(propagator.mode_energies(st) - m0)))
        rows.append({"t": t, "max_error": err, "energy": e, "energy_drift": abs(e - e0),
                     "mode_drift": md})
        worst, drift, mode_drift = max(worst, err), max(drift, abs(e - e0)), max(mode_drift, md)
    return Outcome({"max_error": worst, "energy_drift": drift, "mode_energy_drift": mode_drift,
                    "mode": mode}, rows)


# -- nonlinear solvers --------------------------------------------------------------

@experiment("picard", "nonlinear", "picard_solve",
            "contraction diagnostics of the Picard scheme: B_m decays geometrically for small data",
            n=1, N=256, L=40.0, kappa=3.0, omega=-1.0, T=(0.5,), nodes=1000, tol=1e-12,
            params={"amp": 0.05})
def run_picard(cfg):
    grid = cfg.grid()
    data = _gaussian_data(grid, float(cfg.param("amp", 0.05)))
    T = _times(cfg, (0.5,))[-1]
    pc = nonlinear.PicardConfig(T=T, M_max=cfg.M_max, nodes=cfg.nodes, tol=cfg.tol)
    traj, diag = nonlinear.picard_solve(data, cfg.kappa, cfg.omega, pc)
    res = diag.as_dict()
    res["ratios"] = diag.ratios
    res["max_ratio"] = max(diag.ratios) if diag.ratios else float("nan")
    rows = [{"m": m, "A": a, "B": b} for m, (a, b) in enumerate(zip(diag.A, diag.B))]
    return Outcome(res, rows, {"u_final": traj.field(len(traj) - 1)})


@experiment("split", "nonlinear", "split_solve",
            "Strang splitting solver, cross-validated against the Picard solution",
            n=1, N=256, L=40.0, kappa=3.0, omega=-1.0, T=(0.5,), dt=1e-3, tol=1e-12,
            params={"amp": 0.05, "cross": True, "save_every": 50})
def run_split(cfg):
    grid = cfg.grid()
    data = _gaussian_data(grid, float(cfg.param("amp", 0.05)))
    T = _times(cfg, (0.5,))[-1]
    traj = nonlinear.split_solve(data, cfg.kappa, cfg.omega, T, cfg.dt,
                                 save_every=int(cfg.param("save_every", 50)))
    rows = []
    for j, t in enumerate(traj.times):
        st = traj.state(j)
        rows.append({"t": float(t), "l2": hs_norm(st.u, 0.0),
                     "energy": propagator.full_energy(st, cfg.kappa, cfg.omega)})
    res = {"energy_drift": max(abs(r["energy"] - rows[0]["energy"]) for r in rows)}
    if cfg.param("cross", True):
        cv = nonlinear.cross_validate(data, cfg.kappa, cfg.omega, T, dt=cfg.dt, tol=cfg.tol,
                                      M_max=cfg.M_max, raise_on_fail=False)
        res["cross_validation"] = cv.as_dict()
    return Outcome(res, rows, {"u_final": traj.field(len(traj) - 1)})


# -- counterexample -----------------------------------------------------------------

@experiment("counterexample", "propagator", "counterexample_growth",
            "linear-in-time growth of the free flow from H^(s-2) velocity data to H^s, "
            "which rules out a time-uniform bound",
            n=1, N=1024, L=2000.0, s=1.0, eps=(0.4, 0.3, 0.2))
def run_counterexample(cfg):
    rows, slope, slope_hs = propagator.counterexample_sweep(cfg.eps, cfg.s, cfg.grid())
    series = [{"eps": r.eps, "t_star": r.t_star, "ratio": r.ratio, "slope_estimate": slope,
               "ratio_eps2": r.ratio * r.eps**2, "ratio_hs": r.ratio_hs, "modes": r.modes,
               "in_band": r.in_band} for r in rows]
    return Outcome({"slope": slope, "slope_hs": slope_hs,
                    "all_in_band": all(r.in_band for r in rows)}, series)


# -- exponent bookkeeping -----------------------------------------------------------

@experiment("admissible", "analysis", "is_beam_admissible",
            "exact rational check of Schrodinger-admissible pairs and beam-admissible triples",
            uses_grid=False, n=2, params={"p": "8", "r": "4", "q": "4", "s_gain": "1/4"})
def run_admissible(cfg):
    p, r, q = cfg.param("p", "2"), cfg.param("r", "2"), cfg.param("q", "2")
    s = cfg.param("s_gain", "0")
    return Outcome({"n": cfg.n, "p": str(p), "q": str(q), "r": str(r), "s_gain": str(s),
                    "schrodinger_pair": analysis.is_schrodinger_admissible(p, q, cfg.n),
                    "beam_triple": analysis.is_beam_admissible(p, r, s, cfg.n)})


@experiment("regime", "analysis", "theorem_selector",
            "classifies (n, kappa, s) against the hypotheses of the well-posedness results",
            uses_grid=False, n=5, kappa=3.0, s=0.5, params={"space": "homogeneous"})
def run_regime(cfg):
    rep = analysis.theorem_selector(cfg.n, cfg.kappa, cfg.s, str(cfg.param("space", "homogeneous")))
    return Outcome(rep.as_dict())


@experiment("strichartz", "analysis", "strichartz_quotient",
            "lower-bound probe of the homogeneous Strichartz constant on random band-limited data",
            n=2, N=128, L=100.0, seed=0,
            params={"p": "8", "r": "4", "s_gain": "1/4", "size": 8, "k0": 2.0, "samples": 64})
def run_strichartz(cfg):
    grid = cfg.grid()
    rng = np.random.default_rng(cfg.seed)
    ens = analysis.random_ensemble(grid, rng, int(cfg.param("size", 8)), float(cfg.param("k0", 2.0)))
    triple = analysis.ExponentTriple(cfg.param("p", "8"), cfg.param("r", "4"), cfg.param("s_gain", "1/4"))
    best, rows = analysis.strichartz_quotient(ens, triple, samples=int(cfg.param("samples", 64)))
    series = [{"index": r.index, "window": r.window, "lhs": r.lhs, "rhs": r.rhs,
               "quotient": r.quotient, "excluded": r.excluded} for r in rows]
    return Outcome({"max_quotient": best, "size": len(rows)}, series)


# -- zero dispersion and inflation --------------------------------------------------

@experiment("profile-ode", "dispersion", "solve_profile_ode",
            "periodic profile of -C'' = |C|^(kappa-1) C with a conserved Hamiltonian",
            uses_grid=False, kappa=3.0, tol=1e-12, params={"periods": 10.0})
def run_profile(cfg):
    P = dispersion.profile_period(cfg.kappa)
    tau_max = float(cfg.param("periods", 10.0)) * P
    prof = dispersion.solve_profile_ode(cfg.kappa, tau_max, tol=cfg.tol)
    fine = dispersion.solve_profile_ode(cfg.kappa, tau_max, tol=cfg.tol / 10)
    H = prof.hamiltonian()
    tau = np.linspace(0.0, tau_max, 2001)
    even = float(np.max(np.abs(prof(tau) - prof(-tau))))
    rows = [{"tau": float(t), "C": float(c), "Cp": float(cp), "H": float(h)}
            for t, c, cp, h in zip(prof.tau, prof.C, prof.Cp, H)]
    return Outcome({"period": prof.period, "period_closed_form": P,
                    "period_refined": fine.period,
                    "period_refinement_change": abs(prof.period - fine.period) / fine.period,
                    "hamiltonian_drift": float(np.max(np.abs(H - prof.H0))),
                    "max_abs_C": float(np.max(np.abs(prof.C))), "evenness_error": even,
                    "tau_max": tau_max, "nodes": int(prof.tau.size)}, rows)


def _initial(cfg, amplitude=1.0):
    return dispersion.InitialProfile(float(cfg.param("amplitude", amplitude)),
                                     float(cfg.param("width", 1.0)), int(cfg.param("l", 2)))


@experiment("small-dispersion", "dispersion", "closeness_check",
            "the small-dispersion solution stays O(nu) close to the pointwise ODE solution in H^k",
            n=1, N=256, L=20.0, kappa=3.0, dt=5e-4, nu=(0.2, 0.1, 0.05), T=(3.0,),
            params={"k": 1, "amplitude": 1.0, "width": 1.0, "l": 2})
def run_small_dispersion(cfg):
    reports, alpha = dispersion.closeness_scaling(
        _initial(cfg), cfg.grid(), cfg.nu, cfg.kappa, int(cfg.param("k", 1)),
        _times(cfg, (3.0,))[-1], cfg.dt)
    rows = [r.as_dict() for r in reports]
    res = {"alpha": alpha, "distances": [r.sup_distance for r in reports]}
    if len(reports) > 1:
        res["pair_ratios"] = [a.sup_distance / b.sup_distance for a, b in zip(reports, reports[1:])]
    return Outcome(res, rows)


@experiment("inflate", "dispersion", "inflation_experiment",
            "norm-inflation mechanism: H^s-small data whose rescaled profile grows like t^s",
            n=1, N=1024, L=16.0, kappa=13.0, s=0.1, dt=1e-3, eps=(0.5, 0.25),
            params={"nu_scale": 0.1, "amplitude": 1.07, "width": 1.0, "l": 2,
                    "tau_max": 6.0, "fit_from": 3.0, "validate": False})
def run_inflate(cfg):
    reports, rows = [], []
    for i, eps in enumerate(cfg.eps):
        nu = cfg.nu[i] if i < len(cfg.nu) else None
        plan = dispersion.InflationPlan(
            eps=eps, n=cfg.n, kappa=cfg.kappa, s=cfg.s, nu=nu,
            nu_scale=float(cfg.param("nu_scale", 0.1)), initial=_initial(cfg, 1.07),
            tau_max=float(cfg.param("tau_max", 6.0)), fit_from=float(cfg.param("fit_from", 3.0)),
            N=cfg.N, L=cfg.L, dt=cfg.dt)
        rep = dispersion.inflation_experiment(plan, validate=bool(cfg.param("validate", False)))
        reports.append(rep.as_dict())
        rows.extend({"eps": eps, **g} for g in rep.growth)
    at_report = [r["ratio_at_report"] for r in reports]
    return Outcome({"runs": reports,
                    "ratio_at_report_increasing": all(b > a for a, b in zip(at_report, at_report[1:])),
                    "limitation": dispersion.LIMITATION}, rows)


# -- scattering ---------------------------------------------------------------------

@experiment("scatter", "scattering", "scattering_experiment",
            "small-data scattering probe: pulled-back data form a Cauchy sequence in the "
            "critical energy space",
            n=1, N=4096, L=256.0, kappa=13.0, omega=-1.0, dt=0.01, T=(2.0, 4.0, 8.0),
            params={"amp": 0.01, "direction": "forward", "halve": True})
def run_scatter(cfg):
    grid = cfg.grid()
    amp = float(cfg.param("amp", 0.01))
    direction = str(cfg.param("direction", "forward"))
    T = _times(cfg, (2.0, 4.0, 8.0))
    rep = scattering.scattering_experiment(scattering.odd_data(grid, amp), cfg.kappa, cfg.omega,
                                           T, dt=cfg.dt, direction=direction)
    res = rep.as_dict()
    res["within_window"] = T[-1] <= rep.window
    if cfg.param("halve", True) and cfg.omega != 0:
        half = scattering.scattering_experiment(scattering.odd_data(grid, amp / 2), cfg.kappa,
                                                cfg.omega, T, dt=cfg.dt, direction=direction)
        res["halved_d"] = half.d
        res["halving_factors"] = [a / b if b > 0 else float("nan") for a, b in zip(rep.d, half.d)]
        res["expected_factor"] = 2.0 ** cfg.kappa
    rows = [{"j": j, "T": t, "d": (rep.d[j] if j < len(rep.d) else float("nan")),
             "forward_distance": f, "pullback_offset": o}
            for j, (t, f, o) in enumerate(zip(rep.T_list, rep.forward_distances, rep.pullback_offsets))]
    return Outcome(res, rows)
