"""Collocation grids: Chebyshev-Lobatto spectral and uniform finite-difference.

Everything downstream works on a node vector in [0, T] together with a
differentiation matrix and quadrature weights.  The spectral scheme is the
default; a 4th-order uniform scheme is kept as a cross-check fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def cheb_lobatto(n: int, a: float = 0.0, b: float = 1.0):
    """Chebyshev-Lobatto nodes on [a, b], increasing, with the
    differentiation matrix for that ordering.

    Returns (t, D) where t has n+1 entries and D @ v approximates v'.
    """
    if n < 1:
        raise ValueError("need at least 2 nodes")
    k = np.arange(n + 1)
    # standard nodes on [-1, 1], descending; flip to get increasing order
    x = np.cos(np.pi * k / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    # negative-sum trick: diagonal from exact row sums, better roundoff
    D -= np.diag(D.sum(axis=1))
    # map to [a, b] with increasing nodes
    t = a + (b - a) * (1.0 - x) / 2.0
    D = -D * (2.0 / (b - a))
    return t, D


def clenshaw_curtis_weights(n: int, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Quadrature weights for the n+1 Chebyshev-Lobatto nodes on [a, b]
    (increasing order), exact for polynomials of degree n."""
    if n == 1:
        return np.array([0.5, 0.5]) * (b - a)
    c = np.zeros(n + 1)
    c[::2] = 2.0 / (1.0 - np.arange(0, n + 1, 2) ** 2)
    # inverse DCT-I of the even-coefficient sequence
    w = np.zeros(n + 1)
    k = np.arange(n + 1)
    theta = np.pi * k / n
    for j in range(0, n + 1, 2):
        term = np.cos(j * theta) * c[j]
        if j == 0 or j == n:
            term *= 0.5
        w += term
    w *= 2.0 / n
    w[0] *= 0.5
    w[-1] *= 0.5
    # nodes were flipped to increasing order; weights are symmetric anyway
    return w[::-1] * (b - a) / 2.0


def uniform_fd4(n: int, a: float = 0.0, b: float = 1.0):
    """Uniform nodes with a 4th-order differentiation matrix
    (centered interior, one-sided at the edges)."""
    if n < 5:
        raise ValueError("need at least 6 nodes for the 4th-order stencil")
    t = np.linspace(a, b, n + 1)
    h = t[1] - t[0]
    D = np.zeros((n + 1, n + 1))
    for i in range(2, n - 1):
        D[i, i - 2:i + 3] = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    near = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    D[0, :5] = edge
    D[1, :5] = near
    D[-1, -5:] = -edge[::-1]
    D[-2, -5:] = -near[::-1]
    return t, D / h


def uniform_weights(n: int, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Composite 4th-order (Simpson-like, end-corrected) weights on the
    uniform grid."""
    t = np.linspace(a, b, n + 1)
    h = t[1] - t[0]
    w = np.full(n + 1, 1.0)
    # Gregory-type end correction of order 4
    head = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])
    w[:3] = head
    w[-3:] = head[::-1]
    return w * h


@dataclass(frozen=True)
class Scheme:
    """A node vector with differentiation matrix and quadrature weights."""

    t: np.ndarray
    D: np.ndarray
    w: np.ndarray
    kind: str = "chebyshev"

    @staticmethod
    def chebyshev(n: int, a: float = 0.0, b: float = 1.0) -> "Scheme":
        t, D = cheb_lobatto(n, a, b)
        return Scheme(t, D, clenshaw_curtis_weights(n, a, b), "chebyshev")

    @staticmethod
    def uniform(n: int, a: float = 0.0, b: float = 1.0) -> "Scheme":
        t, D = uniform_fd4(n, a, b)
        return Scheme(t, D, uniform_weights(n, a, b), "uniform")

    def integrate(self, F: np.ndarray) -> float:
        return float(self.w @ F)


def even_extrapolate(t: np.ndarray, v: np.ndarray, idx_end: int, npts: int = 5) -> float:
    """Fill a boundary value of a function known to be even in (t - t_end)
    by polynomial extrapolation in the squared distance.

    idx_end is 0 or -1; the nearest npts interior nodes are used.
    """
    if idx_end == 0:
        sel = slice(1, 1 + npts)
        te = t[0]
    else:
        sel = slice(-1 - npts, -1)
        te = t[-1]
    x = (t[sel] - te) ** 2
    scale = x.max()  # normalize for conditioning on clustered spectral nodes
    coeffs = np.polynomial.polynomial.polyfit(x / scale, v[sel], npts - 1)
    return float(np.polynomial.polynomial.polyval(0.0, coeffs))
