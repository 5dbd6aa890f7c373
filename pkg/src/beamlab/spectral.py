"""Periodic grids, fields, Fourier multipliers and norms.

Conventions
-----------
The torus is ``[0, L)^n`` sampled at ``N`` points per dimension.  Spectral
coefficients are normalised so that ``f(x) = sum_k fhat[k] exp(i xi_k . x)``,
i.e. ``fhat = fftn(f) / N**n``.  With this choice

    ||f||_{L^2}^2 = L^n * sum_k |fhat[k]|^2,

so every norm is taken with respect to physical Lebesgue measure and
``||1||_{L^2} = L^{n/2}``.  Arrays are kept in numpy FFT order; the physical
frequency of index ``k`` is ``2*pi*k/L`` with ``k`` in ``{-N/2, ..., N/2-1}``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, NumericalError

SNAPSHOT_MAGIC = b"BEAM"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdB")

# relative size below which a zero mode counts as absent
MEAN_ZERO_RTOL = 1e-12


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, L)^n``."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ConfigError(f"grid dimension must be 1 or 2, got {self.n}", "n in {1,2}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two >= 16, got {self.N}", "N power of two >= 16")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ConfigError(f"L must be positive and finite, got {self.L}", "L > 0")
        object.__setattr__(self, "L", float(self.L))

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def dx(self):
        return self.L / self.N

    @property
    def cell_volume(self):
        return self.dx**self.n

    @property
    def volume(self):
        return self.L**self.n

    @property
    def xi_max(self):
        """Largest representable |xi| along one axis (the Nyquist frequency)."""
        return math.pi * self.N / self.L

    @cached_property
    def wavenumbers(self):
        """Integer mode indices in FFT order."""
        return _readonly(np.fft.fftfreq(self.N, 1.0 / self.N))

    @cached_property
    def xi1d(self):
        return _readonly(2.0 * np.pi / self.L * self.wavenumbers)

    @cached_property
    def xi(self):
        """Frequency vectors, shape ``(n, N, ..., N)``."""
        return _readonly(np.array(np.meshgrid(*([self.xi1d] * self.n), indexing="ij")))

    @cached_property
    def rho(self):
        """``|xi|^2`` on the grid."""
        return _readonly(np.sum(self.xi**2, axis=0))

    @cached_property
    def x1d(self):
        return _readonly(self.dx * np.arange(self.N))

    @cached_property
    def coords(self):
        """Sample positions in ``[0, L)``, shape ``(n, N, ..., N)``."""
        return _readonly(np.array(np.meshgrid(*([self.x1d] * self.n), indexing="ij")))

    @cached_property
    def centered_coords(self):
        """Sample positions mapped to ``[-L/2, L/2)``.

        Built from integer offsets so ``x_{-j} = -x_j`` holds bit for bit,
        which keeps odd data exactly odd.
        """
        c1 = self.dx * self.wavenumbers
        return _readonly(np.array(np.meshgrid(*([c1] * self.n), indexing="ij")))

    def dealias_mask(self):
        """Boolean mask of modes kept by the 2/3 rule."""
        keep = np.abs(self.wavenumbers) <= self.N / 3.0
        grids = np.meshgrid(*([keep] * self.n), indexing="ij")
        return np.logical_and.reduce(grids)

    def count_modes(self, lo, hi):
        """Number of lattice modes with ``lo <= |xi|^2 <= hi``."""
        return int(np.count_nonzero((self.rho >= lo) & (self.rho <= hi)))

    def validity_window(self, xi_max=None):
        """Time before packets at group speed ``2|xi|`` wrap half the box."""
        xi_max = self.xi_max if xi_max is None else xi_max
        return self.L / (4.0 * xi_max)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalised Fourier coefficients of a field (FFT order)."""

    grid: GridSpec
    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ConfigError(f"spectrum shape {c.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))


@dataclass(frozen=True, eq=False)
class Field:
    """A sampled function on a periodic grid.

    ``real=True`` tags a real-valued field; its samples are stored as float64.
    Instances are immutable, and the spectrum is computed once on demand.
    """

    grid: GridSpec
    samples: np.ndarray
    real: bool = False

    def __post_init__(self):
        a = np.asarray(self.samples)
        if a.shape != self.grid.shape:
            raise ConfigError(f"field shape {a.shape} does not match grid {self.grid.shape}")
        if self.real:
            if np.iscomplexobj(a):
                a = a.real
            a = np.array(a, dtype=np.float64)
        else:
            a = np.array(a, dtype=np.complex128)
        object.__setattr__(self, "samples", _readonly(a))

    @classmethod
    def from_function(cls, grid, func, real=True, centered=True):
        """Sample ``func(*coords)`` on the grid."""
        coords = grid.centered_coords if centered else grid.coords
        return cls(grid, func(*coords), real=real)

    @classmethod
    def zeros(cls, grid, real=True):
        return cls(grid, np.zeros(grid.shape), real=real)

    @classmethod
    def constant(cls, grid, c):
        real = not isinstance(c, complex)
        return cls(grid, np.full(grid.shape, c, dtype=float if real else complex), real=real)

    @cached_property
    def spectrum(self):
        return _readonly(np.fft.fftn(self.samples) / self.samples.size)

    def with_samples(self, samples, real=None):
        return Field(self.grid, samples, self.real if real is None else real)

    def __add__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.samples + other.samples, self.real and other.real)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.samples - other.samples, self.real and other.real)

    def __mul__(self, c):
        if isinstance(c, Field):
            _check_same_grid(self, c)
            return Field(self.grid, self.samples * c.samples, self.real and c.real)
        return Field(self.grid, self.samples * c, self.real and not isinstance(c, complex))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples, self.real)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ConfigError(f"fields live on different grids: {a.grid} vs {b.grid}")


def to_spectrum(f: Field) -> Spectrum:
    if f.samples.shape != f.grid.shape:
        raise ConfigError("field dimensions do not match grid")
    return Spectrum(f.grid, f.spectrum, f.real)


def from_spectrum(S: Spectrum) -> Field:
    samples = np.fft.ifftn(S.coeffs) * S.coeffs.size
    return Field(S.grid, samples.real if S.real else samples, S.real)


def field_from_coeffs(grid, coeffs, real):
    """Inverse transform of normalised coefficients straight to a Field."""
    samples = np.fft.ifftn(coeffs) * coeffs.size
    return Field(grid, samples.real if real else samples, real)


def is_conjugate_symmetric(coeffs, rtol=1e-12):
    """Check ``c[-k] == conj(c[k])`` on the FFT lattice."""
    c = np.asarray(coeffs)
    flipped = np.roll(np.flip(c), 1, axis=tuple(range(c.ndim)))
    scale = max(np.max(np.abs(c)), np.finfo(float).tiny)
    return bool(np.max(np.abs(flipped - np.conj(c))) <= rtol * scale)


Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float]


def _symbol_values(grid, m):
    if callable(m):
        vals = np.asarray(m(grid.xi))
    else:
        vals = np.asarray(m)
    return np.broadcast_to(vals, grid.shape)


def apply_multiplier(f: Field, m: Symbol) -> Field:
    """Multiply the spectrum of ``f`` pointwise by ``m(xi)``.

    ``m`` is either a callable taking the frequency vectors of shape
    ``(n, N, ..., N)`` or an array of values on the grid.  A real field stays
    real when the result is real to rounding.
    """
    vals = _symbol_values(f.grid, m)
    coeffs = f.spectrum
    occupied = coeffs != 0
    bad = ~np.isfinite(vals) & occupied
    if np.any(bad):
        raise ConfigError("multiplier is not finite at an occupied mode", "finite multiplier")
    out = np.where(occupied, vals * coeffs, 0.0)
    samples = np.fft.ifftn(out) * out.size
    if f.real:
        scale = max(np.max(np.abs(samples)), np.finfo(float).tiny)
        if np.max(np.abs(samples.imag)) <= 1e-12 * scale:
            return Field(f.grid, samples.real, True)
    return Field(f.grid, samples, False)


@dataclass(frozen=True)
class NormSpec:
    """Sobolev regularity ``s`` and flavor (homogeneous or inhomogeneous)."""

    s: float
    flavor: str = "inhomogeneous"

    def __post_init__(self):
        if self.flavor not in ("homogeneous", "inhomogeneous"):
            raise ConfigError(f"unknown norm flavor {self.flavor!r}")

    @property
    def homogeneous(self):
        return self.flavor == "homogeneous"


def sobolev_weight(grid, s, homogeneous):
    """Squared Fourier weight ``|xi|^{2s}`` or ``(1+|xi|^2)^s`` on the grid.

    For homogeneous weights the zero mode gets weight 0 when ``s > 0``, 1 when
    ``s == 0``; negative ``s`` leaves it at ``inf`` so callers must exclude it.
    """
    rho = grid.rho
    if not homogeneous:
        return (1.0 + rho) ** s
    if s == 0:
        return np.ones_like(rho)
    with np.errstate(divide="ignore"):
        w = rho**s
    return w


def coeff_sobolev_norm(grid, coeffs, s, homogeneous=False):
    """Sobolev norm from normalised coefficients (see :func:`sobolev_norm`)."""
    c2 = np.abs(coeffs) ** 2
    w = sobolev_weight(grid, s, homogeneous)
    if homogeneous and s < 0:
        zero = (0,) * grid.n
        scale = math.sqrt(float(np.sum(c2)))
        if math.sqrt(c2[zero]) > MEAN_ZERO_RTOL * scale:
            raise ConfigError(
                f"homogeneous norm with s={s} < 0 needs a mean-zero field "
                f"(zero mode {math.sqrt(c2[zero]):.3e})",
                "mean-zero field for negative homogeneous regularity",
            )
        w = w.copy()
        w[zero] = 0.0
    return math.sqrt(grid.volume * float(np.sum(w * c2)))


def sobolev_norm(f: Field, spec: NormSpec) -> float:
    """``(L^n sum_k w(xi_k) |fhat_k|^2)^{1/2}`` with the weight chosen by ``spec``.

    Raises :class:`ConfigError` for a homogeneous norm with ``s < 0`` on a
    field with non-zero mean.
    """
    return coeff_sobolev_norm(f.grid, f.spectrum, spec.s, spec.homogeneous)


def hs_norm(f, s):
    return coeff_sobolev_norm(f.grid, f.spectrum, s, False)


def hdot_norm(f, s):
    return coeff_sobolev_norm(f.grid, f.spectrum, s, True)


def _lebesgue(samples, cell_volume, r):
    if np.any(np.isnan(samples)):
        raise NumericalError("NaN in field samples")
    a = np.abs(samples)
    if math.isinf(r):
        return float(np.max(a))
    if r == 2:
        return math.sqrt(cell_volume * float(np.sum(a * a)))
    return float((cell_volume * np.sum(a**r)) ** (1.0 / r))


def lebesgue_norm(f: Field, r: float) -> float:
    """Rectangle-rule ``L^r`` norm over the box; ``r = inf`` gives the max."""
    if r < 1:
        raise ConfigError(f"Lebesgue exponent must be >= 1, got {r}", "r >= 1")
    return _lebesgue(f.samples, f.grid.cell_volume, r)


def spacetime_norm_samples(times, samples, grid, p, r):
    """``L^p_t L^r_x`` norm of a stacked array ``samples[j] ~ u(times[j])``."""
    if p < 1 or r < 1:
        raise ConfigError("space-time exponents must be >= 1", "p, r >= 1")
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ConfigError("space-time norm needs at least 2 time samples", "len(times) >= 2")
    if math.isinf(r):
        inner = np.max(np.abs(samples).reshape(len(times), -1), axis=1)
    else:
        a = np.abs(samples).reshape(len(times), -1)
        inner = (grid.cell_volume * np.sum(a**r, axis=1)) ** (1.0 / r)
    if math.isinf(p):
        return float(np.max(inner))
    return float(np.trapezoid(inner**p, times) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class BeamState:
    """Displacement ``u`` and velocity ``v = du/dt`` at time ``t``."""

    u: Field
    v: Field
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ConfigError("u and v must share one grid")

    @property
    def grid(self):
        return self.u.grid

    @property
    def real(self):
        return self.u.real and self.v.real

    @classmethod
    def from_data(cls, f, g=None, t=0.0):
        if g is None:
            g = Field.zeros(f.grid, real=f.real)
        return cls(f, g, t)

    @classmethod
    def zeros(cls, grid, real=True):
        z = Field.zeros(grid, real)
        return cls(z, z, 0.0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time samples of a solution.

    ``u`` (and optionally ``v``) are stacked arrays of shape ``(M, N, ..., N)``.
    Solvers that track the solution as free flow of ``free_data`` plus a
    deviation also store ``du``/``dv``; pullback and scattering diagnostics use
    the deviation to avoid cancellation when it is far below rounding of ``u``.
    """

    grid: GridSpec
    times: np.ndarray
    u: np.ndarray
    v: Optional[np.ndarray] = None
    real: bool = False
    free_data: Optional[BeamState] = None
    du: Optional[np.ndarray] = None
    dv: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ConfigError("trajectory needs at least 2 time samples", "len(times) >= 2")
        if np.any(np.diff(times) <= 0):
            raise ConfigError("trajectory times must be strictly increasing")
        expect = (times.size,) + self.grid.shape
        for name in ("u", "v", "du", "dv"):
            a = getattr(self, name)
            if a is not None and a.shape != expect:
                raise ConfigError(f"trajectory array {name} has shape {a.shape}, expected {expect}")
        object.__setattr__(self, "times", _readonly(times))

    def __len__(self):
        return self.times.size

    def index_of(self, t, atol=1e-9):
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > atol * max(1.0, abs(t)):
            raise ConfigError(f"time {t} is not a stored sample", "t in trajectory samples")
        return j

    def field(self, j):
        return Field(self.grid, self.u[j], self.real)

    def state(self, j):
        if self.v is None:
            raise ConfigError("trajectory carries no velocity samples")
        return BeamState(Field(self.grid, self.u[j], self.real), Field(self.grid, self.v[j], self.real), float(self.times[j]))

    def deviation_state(self, j):
        if self.du is None:
            raise ConfigError("trajectory carries no deviation samples")
        dv = self.dv if self.dv is not None else np.zeros_like(self.du)
        return BeamState(Field(self.grid, self.du[j], self.real), Field(self.grid, dv[j], self.real), float(self.times[j]))

    @property
    def states(self):
        return [self.state(j) for j in range(len(self))]

    @property
    def fields(self):
        return [self.field(j) for j in range(len(self))]

    @classmethod
    def from_states(cls, times, states: Sequence[BeamState]):
        if len(times) != len(states):
            raise ConfigError("times and states differ in length")
        grid = states[0].grid
        return cls(
            grid,
            np.asarray(times, dtype=float),
            np.stack([s.u.samples for s in states]),
            np.stack([s.v.samples for s in states]),
            real=all(s.real for s in states),
        )

    @classmethod
    def from_fields(cls, times, fields: Sequence[Field]):
        grid = fields[0].grid
        return cls(grid, np.asarray(times, dtype=float), np.stack([f.samples for f in fields]),
                   real=all(f.real for f in fields))


def spacetime_norm(traj: Trajectory, p: float, r: float) -> float:
    """Composite-trapezoid ``L^p`` in time of the ``L^r`` norms in space."""
    return spacetime_norm_samples(traj.times, traj.u, traj.grid, p, r)


def write_snapshot(path, f: Field):
    """Write ``f`` in the little-endian ``BEAM`` snapshot format."""
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, f.grid.n, f.grid.N, f.grid.L, 0 if f.real else 1)
    dtype = "<f8" if f.real else "<c16"
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.samples, dtype=dtype).tobytes(order="C"))
    return path


def read_snapshot(path) -> Field:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ConfigError("snapshot too short")
    magic, version, n, N, L, flavor = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ConfigError(f"bad snapshot magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ConfigError(f"unsupported snapshot version {version}")
    if flavor not in (0, 1):
        raise ConfigError(f"bad snapshot flavor {flavor}")
    grid = GridSpec(n, N, L)
    dtype = "<f8" if flavor == 0 else "<c16"
    count = N**n
    if len(data) != _HEADER.size + count * np.dtype(dtype).itemsize:
        raise ConfigError("snapshot length does not match header")
    body = np.frombuffer(data, dtype=dtype, count=count, offset=_HEADER.size)
    return Field(grid, body.reshape(grid.shape), real=flavor == 0)


def effective_bandwidth(f: Field, rtol=1e-8):
    """Largest ``|xi|`` whose coefficient exceeds ``rtol`` times the peak."""
    a = np.abs(f.spectrum)
    peak = float(np.max(a))
    if peak == 0.0:
        return 0.0
    return float(np.sqrt(np.max(f.grid.rho[a > rtol * peak])))
