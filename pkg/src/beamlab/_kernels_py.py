"""Pure numpy implementations of the hot pointwise kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop by loop.
"""
import numpy as np


def power_nonlinearity(u, kappa, omega):
    """Return ``omega * |u|**(kappa-1) * u`` as a new array."""
    u = np.asarray(u)
    a = np.abs(u)
    if kappa == 3.0:
        return omega * (a * a) * u
    return omega * np.power(a, kappa - 1.0) * u


def hermite5(nodes, y, dy, ddy, q):
    """Quintic Hermite interpolation of ``y`` and its first derivative.

    ``nodes`` must be strictly increasing and every query must lie inside
    ``[nodes[0], nodes[-1]]``.
    """
    nodes = np.asarray(nodes, dtype=float)
    q = np.asarray(q, dtype=float)
    idx = np.clip(np.searchsorted(nodes, q, side="right") - 1, 0, nodes.size - 2)
    t0 = nodes[idx]
    h = nodes[idx + 1] - t0
    s = (q - t0) / h
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s

    h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5
    h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5
    h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5)
    h3 = 0.5 * (s3 - 2.0 * s4 + s5)
    h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5
    h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5

    d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4
    d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4
    d2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4)
    d3 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4)
    d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4
    d5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4

    ya, yb = y[idx], y[idx + 1]
    pa, pb = dy[idx], dy[idx + 1]
    aa, ab = ddy[idx], ddy[idx + 1]
    hh = h * h
    val = ya * h0 + h * pa * h1 + hh * aa * h2 + hh * ab * h3 + h * pb * h4 + yb * h5
    der = (ya * d0 + h * pa * d1 + hh * aa * d2 + hh * ab * d3 + h * pb * d4 + yb * d5) / h
    return val, der
