"""Exponent arithmetic, admissibility, regime classification, scaling and quotient probes.

Exponent identities are decided in exact rational arithmetic: integers,
:class:`fractions.Fraction` and strings such as ``"8/3"`` are exact, floats
are rationalised with ``limit_denominator(10**6)`` and ``math.inf``/``"inf"``
stands for an infinite exponent (``1/inf = 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .propagator import free_trajectory
from .spectral import BeamState, Field, GridSpec, effective_bandwidth, hdot_norm, spacetime_norm

INF = math.inf

ENERGY_CLASSES = ("subcritical", "critical", "supercritical", "not-applicable")


def as_exponent(x):
    """Exact rational form of an exponent, or ``None`` for infinity."""
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "oo"):
            return None
        return Fraction(x.strip())
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if math.isinf(x):
        if x < 0:
            raise ConfigError("exponent cannot be -inf")
        return None
    return Fraction(x).limit_denominator(10**6)


def reciprocal(x):
    q = as_exponent(x)
    return Fraction(0) if q is None else 1 / q


def _in_range(x):
    q = as_exponent(x)
    return q is None or q >= 2


def critical_exponent_exact(n, kappa) -> Fraction:
    k = as_exponent(kappa)
    if k is None or k <= 1:
        raise ConfigError("kappa must satisfy 1 < kappa < inf", "kappa > 1")
    return Fraction(n, 2) - 4 / (k - 1)


def critical_exponent(n, kappa) -> float:
    """``s_c = n/2 - 4/(kappa-1)``."""
    if not kappa > 1:
        raise ConfigError("kappa must exceed 1", "kappa > 1")
    if isinstance(kappa, (int, Fraction)):
        return float(critical_exponent_exact(n, kappa))
    return n / 2 - 4 / (kappa - 1)


@dataclass(frozen=True)
class ExponentPair:
    p: object
    q: object

    def __post_init__(self):
        if not (_in_range(self.p) and _in_range(self.q)):
            raise ConfigError("pair exponents must lie in [2, inf]", "2 <= p, q <= inf")


@dataclass(frozen=True)
class ExponentTriple:
    p: object
    r: object
    s: float = 0.0

    def __post_init__(self):
        if not (_in_range(self.p) and _in_range(self.r)):
            raise ConfigError("triple exponents must lie in [2, inf]", "2 <= p, r <= inf")
        if as_exponent(self.s) is not None and as_exponent(self.s) < 0:
            raise ConfigError("triple regularity must be >= 0", "s >= 0")

    @property
    def p_float(self):
        q = as_exponent(self.p)
        return INF if q is None else float(q)

    @property
    def r_float(self):
        q = as_exponent(self.r)
        return INF if q is None else float(q)


def _is_endpoint(p, q, n):
    return as_exponent(p) == 2 and as_exponent(q) is None and n == 2


def is_schrodinger_admissible(p, q, n) -> bool:
    """``2 <= p, q <= inf``, ``2/p + n/q = n/2``, ``n >= 1``, excluding ``(2, inf, 2)``."""
    if n < 1 or not (_in_range(p) and _in_range(q)):
        return False
    if _is_endpoint(p, q, n):
        return False
    return 2 * reciprocal(p) + n * reciprocal(q) == Fraction(n, 2)


def is_beam_admissible(p, r, s, n) -> bool:
    """``s >= 0``, ``2 <= p, r <= inf``, ``2/p + n/r = n/2 - s``, ``n >= 2``, excluding ``(2, inf, 2)``."""
    sq = as_exponent(s)
    if sq is None or sq < 0 or n < 2:
        return False
    if not (_in_range(p) and _in_range(r)):
        return False
    if _is_endpoint(p, r, n):
        return False
    return 2 * reciprocal(p) + n * reciprocal(r) == Fraction(n, 2) - sq


def dual_space_exponent(n, b_prime, s):
    """``b~ = n b' / (n + (2 - s) b')``, the forcing exponent for ``0 <= s <= 2``."""
    b = as_exponent(b_prime)
    sq = as_exponent(s)
    if b is None:
        return Fraction(n) / (2 - sq)
    return n * b / (n + (2 - sq) * b)


def energy_critical_power(n):
    """``(n+4)/(n-4)`` for ``n > 4``, else ``None``."""
    return Fraction(n + 4, n - 4) if n > 4 else None


def energy_class(n, kappa):
    k = as_exponent(kappa)
    crit = energy_critical_power(n)
    if crit is None:
        return "not-applicable"
    if k is None or k > crit:
        return "supercritical"
    return "critical" if k == crit else "subcritical"


@dataclass
class RegimeReport:
    n: int
    kappa: float
    s: float
    space: str
    s_c: float
    energy_class: str
    theorem: Optional[str]
    checklist: List[tuple] = field(default_factory=list)
    boundary: bool = False

    def as_dict(self):
        return {
            "n": self.n,
            "kappa": self.kappa,
            "s": self.s,
            "space": self.space,
            "s_c": self.s_c,
            "energy_class": self.energy_class,
            "theorem": self.theorem,
            "checklist": [{"hypothesis": h, "holds": ok} for h, ok in self.checklist],
            "boundary": self.boundary,
        }


THEOREM_TAGS = {
    "critical-homogeneous": "local/small-data global existence in Hdot^s x Hdot^(s-2), kappa <= (n+4)/(n-4)",
    "supercritical-homogeneous": "local/small-data global existence in Hdot^s x Hdot^(s-2), kappa > (n+4)/(n-4)",
    "supercritical-inhomogeneous": "local existence in H^s x H^(s-2), kappa > (n+4)/(n-4)",
}


def _l_exists(sc, upper, lower_floor):
    lo = max(lower_floor, math.ceil(sc - 2))
    return lo <= math.floor(upper)


def theorem_selector(n: int, kappa, s, space: str = "homogeneous") -> RegimeReport:
    """Evaluate each well-posedness result's hypotheses literally.

    The tags are ``critical-homogeneous`` (regularity ``s = s_c`` with
    ``n > 3, 8/n + 1 < kappa <= (n+4)/(n-4)`` or ``n = 3, kappa > 5``),
    ``supercritical-homogeneous`` (``n > 4``, ``kappa > (n+4)/(n-4)`` and an
    integer ``l >= 1`` with ``s_c - 2 <= l <= kappa - 1``) and
    ``supercritical-inhomogeneous`` (same with ``l >= 0``, ``l <= kappa``).
    ``boundary`` flags a failed hypothesis that fails only by equality.
    """
    if space not in ("homogeneous", "inhomogeneous"):
        raise ConfigError(f"unknown space {space!r}")
    k = as_exponent(kappa)
    if k is None or k <= 1:
        raise ConfigError("kappa must satisfy 1 < kappa < inf", "kappa > 1")
    sq = as_exponent(s)
    sc = critical_exponent_exact(n, k)
    report = RegimeReport(n, float(k), float(sq), space, float(sc), energy_class(n, k), None)
    at_sc = sq == sc
    crit = energy_critical_power(n)
    chk = report.checklist

    if space == "homogeneous":
        chk.append(("s = n/2 - 4/(kappa-1)", at_sc))
        if n == 3:
            ok = k > 5
            chk.append(("n = 3, kappa > 5", ok))
            if not ok and k == 5:
                report.boundary = True
            if ok and at_sc:
                report.theorem = "critical-homogeneous"
            return report
        lower = 1 + Fraction(8, n)
        c1 = n > 3
        c2 = lower < k
        c3 = crit is not None and k <= crit
        chk.append(("n > 3", c1))
        chk.append(("8/n + 1 < kappa", c2))
        chk.append(("kappa <= (n+4)/(n-4)", c3))
        if c1 and c2 and c3 and at_sc:
            report.theorem = "critical-homogeneous"
            return report
        if c1 and k == lower:
            report.boundary = True
        if crit is not None and k > crit:
            has_l = _l_exists(sc, k - 1, 1)
            chk.append(("n > 4", n > 4))
            chk.append(("exists integer l >= 1 with s_c - 2 <= l <= kappa - 1", has_l))
            if has_l and at_sc:
                report.theorem = "supercritical-homogeneous"
        return report

    chk.append(("s = n/2 - 4/(kappa-1)", at_sc))
    c1 = n > 4
    chk.append(("n > 4", c1))
    c2 = crit is not None and k > crit
    chk.append(("kappa > (n+4)/(n-4)", c2))
    has_l = _l_exists(sc, k, 0)
    chk.append(("exists integer l >= 0 with s_c - 2 <= l <= kappa", has_l))
    if c1 and c2 and has_l and at_sc:
        report.theorem = "supercritical-inhomogeneous"
    elif c1 and crit is not None and k == crit:
        report.boundary = True
    return report


# -- scaling ---------------------------------------------------------------------

def scale_state(state: BeamState, lam: float, kappa: float) -> BeamState:
    """Apply ``f -> lam^{-a} f(x/lam)``, ``g -> lam^{-a-2} g(x/lam)``, ``a = 4/(kappa-1)``.

    The rescaled data live on the torus of period ``lam * L`` with the same
    samples, so Fourier coefficients are re-indexed exactly and no
    interpolation enters any norm.  Time stamps scale by ``lam^2``.
    """
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0):
        raise ConfigError(f"scaling factor must be positive and finite, got {lam}", "lam > 0")
    if kappa <= 1:
        raise ConfigError("kappa must exceed 1", "kappa > 1")
    a = 4.0 / (kappa - 1.0)
    g = state.grid
    new = GridSpec(g.n, g.N, g.L * lam)
    f = Field(new, lam ** (-a) * state.u.samples, state.u.real)
    v = Field(new, lam ** (-a - 2.0) * state.v.samples, state.v.real)
    return BeamState(f, v, state.t * lam * lam)


# -- random data and quotient probes ----------------------------------------------

def random_band_limited(grid: GridSpec, rng: np.random.Generator, k0: float = 2.0,
                        amplitude: float = 1.0) -> Field:
    """Real, mean-zero random field with Gaussian spectral envelope ``exp(-|xi|^2/k0^2)``.

    Draws ``grid.N**grid.n`` standard normals from ``rng`` (white noise in
    physical space), filters and normalises to unit ``L^2`` norm times
    ``amplitude``.
    """
    noise = rng.standard_normal(grid.shape)
    ch = np.fft.fftn(noise) * np.exp(-grid.rho / (k0 * k0))
    ch[(0,) * grid.n] = 0.0
    samples = np.fft.ifftn(ch).real
    norm = np.sqrt(grid.cell_volume * np.sum(samples**2))
    return Field(grid, amplitude * samples / norm, real=True)


def random_ensemble(grid, rng, size, k0=2.0):
    """``size`` random states ``(f, g)`` drawn in a fixed order (f then g per sample)."""
    out = []
    for _ in range(size):
        f = random_band_limited(grid, rng, k0)
        g = random_band_limited(grid, rng, k0)
        out.append(BeamState(f, g, 0.0))
    return out


@dataclass(frozen=True)
class QuotientRow:
    index: int
    window: float
    lhs: float
    rhs: float
    quotient: float
    excluded: bool


def strichartz_quotient(ensemble: Sequence[BeamState], triple: ExponentTriple, rhs_s=None,
                        samples: int = 64, window: Optional[float] = None,
                        window_fraction: float = 1.0):
    """Lower-bound probe of the homogeneous Strichartz constant.

    For each state evolves freely on ``[0, T]`` (``T`` = ``window`` or the
    state's validity window times ``window_fraction``) and returns
    ``max ||u||_{L^p L^r} / (||f||_{Hdot^s} + ||g||_{Hdot^{s-2}})`` with the
    per-sample table.  Zero data are excluded.
    """
    if not is_beam_admissible(triple.p, triple.r, triple.s, ensemble[0].grid.n):
        raise ConfigError(f"triple {triple} is not beam-admissible in n={ensemble[0].grid.n}",
                          "beam-admissible triple")
    s = float(as_exponent(triple.s)) if rhs_s is None else float(rhs_s)
    p, r = triple.p_float, triple.r_float
    rows = []
    for i, st in enumerate(ensemble):
        rhs = hdot_norm(st.u, s) + hdot_norm(st.v, s - 2.0)
        if rhs == 0.0:
            rows.append(QuotientRow(i, 0.0, 0.0, 0.0, float("nan"), True))
            continue
        if window is None:
            bw = max(effective_bandwidth(st.u), effective_bandwidth(st.v))
            T = st.grid.validity_window(bw if bw > 0 else None) * window_fraction
        else:
            T = window
        traj = free_trajectory(st, np.linspace(0.0, T, samples))
        lhs = spacetime_norm(traj, p, r)
        rows.append(QuotientRow(i, T, lhs, rhs, lhs / rhs, False))
    valid = [row.quotient for row in rows if not row.excluded]
    best = max(valid) if valid else float("nan")
    return best, rows
