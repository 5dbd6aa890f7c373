import os
import subprocess
import sys

import numpy as np
import pytest

from beamlab import kernels
from beamlab.dispersion import solve_profile_ode

compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels not built")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(11)
    u = rng.standard_normal(4096)
    return u, u + 1j * rng.standard_normal(4096)


@pytest.mark.parametrize("kappa", [3.0, 5.0, 13.0, 2.5, 7.3])
def test_python_power_reference(data, kappa):
    u, _ = data
    py, _ = kernels.get_backend("python")
    assert np.allclose(py(u, kappa, -1.0), -np.abs(u) ** (kappa - 1) * u, rtol=1e-14, atol=0)


@compiled
@pytest.mark.parametrize("kappa", [3.0, 5.0, 13.0, 2.5, 7.3])
@pytest.mark.parametrize("which", [0, 1])
def test_backends_agree_on_power(data, kappa, which):
    u = data[which]
    py, _ = kernels.get_backend("python")
    cc, _ = kernels.get_backend("compiled")
    a, b = py(u, kappa, 1.0), cc(u, kappa, 1.0)
    assert a.dtype == b.dtype
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-13


@compiled
def test_backends_agree_on_hermite():
    prof = solve_profile_ode(5.0, 20.0)
    q = np.random.default_rng(2).uniform(0, 20.0, 1000).reshape(10, 100)
    _, hp = kernels.get_backend("python")
    _, hc = kernels.get_backend("compiled")
    for x, y in zip(hp(prof.tau, prof.C, prof.Cp, prof.Cpp, q), hc(prof.tau, prof.C, prof.Cp, prof.Cpp, q)):
        assert x.shape == (10, 100)
        assert np.max(np.abs(x - y)) < 1e-13


def test_hermite_reproduces_quintic():
    _, h = kernels.get_backend()
    nodes = np.linspace(-1, 2, 7)
    p = np.polynomial.Polynomial([0.3, -1, 2, 0.5, -0.7, 0.2])
    q = np.linspace(-1, 2, 101)
    val, der = h(nodes, p(nodes), p.deriv()(nodes), p.deriv(2)(nodes), q)
    assert np.max(np.abs(val - p(q))) < 1e-13
    assert np.max(np.abs(der - p.deriv()(q))) < 1e-12


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("gpu")


def test_fallback_selected_by_environment():
    env = dict(os.environ, BEAMLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import beamlab; print(beamlab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
