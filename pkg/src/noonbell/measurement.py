"""Quadrature-bin overlaps and the four hybrid correlation functions.

Quadrature convention: ``x = (a + a†)/2``, so vacuum has variance 1/4 and a
threshold ``x0`` here equals ``x0*sqrt(2)`` in the ``(a + a†)/sqrt(2)``
convention. Every ``x0`` in this package uses the ``(a + a†)/2`` scale.

With ``y = sqrt(2) x`` the number-state wavefunctions become the normalized
Hermite functions ``phi_n(y)``, so

    Q_nm(x0) = integral_{-sqrt(2) x0}^{sqrt(2) x0} phi_n(y) phi_m(y) dy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import check_cutoff, check_photon_threshold, check_threshold

_PANEL_WIDTH = 0.5  # in y units
_MIN_NODES = 32


@dataclass(frozen=True)
class Thresholds:
    """Photon-count threshold ``n0`` and quadrature-modulus threshold ``x0``."""

    n0: int
    x0: float

    def __post_init__(self):
        object.__setattr__(self, "n0", check_photon_threshold(self.n0))
        object.__setattr__(self, "x0", check_threshold(self.x0))


@dataclass(frozen=True)
class QTable:
    q: np.ndarray
    x0: float

    @property
    def nmax(self) -> int:
        return self.q.shape[0] - 1


def hermite_functions(y, nmax: int) -> np.ndarray:
    """Normalized Hermite functions ``phi_0..phi_nmax`` at points ``y``.

    Uses the three-term recurrence on the normalized functions directly, which
    stays finite at large ``n`` where ``H_n`` itself overflows.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((nmax + 1,) + y.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * y * y)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


@lru_cache(maxsize=16)
def _legendre(order: int):
    return leggauss(order)


def _panel_nodes(lo: float, hi: float, order: int):
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    npanel = max(1, int(math.ceil((hi - lo) / _PANEL_WIDTH)))
    g, w = _legendre(order)
    edges = np.linspace(lo, hi, npanel + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (half[:, None] * g[None, :] + mid[:, None]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _order_for(degree: int) -> int:
    return max(_MIN_NODES, degree + 16)


def _parity_mask(nmax: int) -> np.ndarray:
    idx = np.arange(nmax + 1)
    return (np.add.outer(idx, idx) % 2) == 1


def _half_integral(nmax: int, y_lo: float, y_hi: float) -> np.ndarray:
    nodes, weights = _panel_nodes(y_lo, y_hi, _order_for(2 * nmax))
    h = hermite_functions(nodes, nmax)
    return (h * weights) @ h.T


def q_overlap(n: int, m: int, x0: float) -> float:
    """Overlap ``<n| Pi_X^- |m>`` of two number states inside ``|x| <= x0``."""
    n, m = check_photon_threshold(n), check_photon_threshold(m)
    x0 = check_threshold(x0)
    if (n + m) % 2 == 1 or x0 == 0.0:
        return 0.0
    top = max(n, m)
    nodes, weights = _panel_nodes(0.0, math.sqrt(2.0) * x0, _order_for(n + m))
    h = hermite_functions(nodes, top)
    return float(2.0 * np.sum(weights * h[n] * h[m]))


def q_table(nmax: int, x0: float) -> QTable:
    """All overlaps ``Q_nm(x0)`` for ``n, m <= nmax``.

    Integrates over ``[0, sqrt(2) x0]`` and doubles; odd ``n + m`` entries are
    set to exactly zero.
    """
    nmax = check_cutoff(nmax)
    x0 = check_threshold(x0)
    if x0 == 0.0:
        return QTable(np.zeros((nmax + 1, nmax + 1)), 0.0)
    q = 2.0 * _half_integral(nmax, 0.0, math.sqrt(2.0) * x0)
    q[_parity_mask(nmax)] = 0.0
    q = 0.5 * (q + q.T)
    return QTable(q, x0)


def q_table_grid(nmax: int, x0_grid) -> np.ndarray:
    """Stack of Q tables over a sorted grid of thresholds, shape ``(G, D, D)``.

    Each table is the previous one plus the integral over the gap between
    consecutive thresholds, so the cost is that of a single wide table.
    """
    nmax = check_cutoff(nmax)
    x0_grid = np.asarray(x0_grid, dtype=float)
    if np.any(x0_grid < 0) or np.any(np.diff(x0_grid) <= 0):
        raise ValueError("x0 grid must be non-negative and strictly increasing")
    ys = np.concatenate(([0.0], math.sqrt(2.0) * x0_grid))
    out = np.empty((len(x0_grid), nmax + 1, nmax + 1))
    acc = np.zeros((nmax + 1, nmax + 1))
    mask = _parity_mask(nmax)
    for i in range(len(x0_grid)):
        if ys[i + 1] > ys[i]:
            acc = acc + 2.0 * _half_integral(nmax, ys[i], ys[i + 1])
        q = 0.5 * (acc + acc.T)
        q[mask] = 0.0
        out[i] = q
    return out


def quadrature_sign_operator(q: np.ndarray) -> np.ndarray:
    """Single-mode ``Pi_X^+ - Pi_X^-`` in the Fock basis."""
    return np.eye(q.shape[0]) - 2.0 * q


def count_sign_vector(nmax: int, n0: int) -> np.ndarray:
    """Diagonal of ``Pi_N^+ - Pi_N^-``: +1 up to ``n0`` photons, -1 above."""
    return np.where(np.arange(nmax + 1) <= n0, 1.0, -1.0)


def _q_array(q, rho_nmax: int, x0=None) -> np.ndarray:
    if isinstance(q, QTable):
        q = q.q
    if q is None:
        q = q_table(rho_nmax, x0).q
    q = np.asarray(q, dtype=float)
    if q.shape != (rho_nmax + 1, rho_nmax + 1):
        raise ValueError(f"Q table shape {q.shape} does not match cutoff {rho_nmax}")
    return q


# Correlations accept either a dense TwoModeDensity (index order
# rho[m, m', n, n'] for |m><n|_A (x) |m'><n'|_B) or a ProductFormDensity.
# The dense path evaluates the closed-form sums; the product path contracts
# each tensor factor separately.

def corr_xx(rho, x0: float | None = None, q=None) -> float:
    """Homodyne-homodyne correlation.

    Pass ``q`` (a QTable or array) to reuse a precomputed table, otherwise it
    is built from ``x0``.
    """
    q = _q_array(q, rho.nmax, x0)
    if _is_product(rho):
        ox = quadrature_sign_operator(q)
        return float(rho.expect_factorized(ox, ox))
    r = rho.rho
    both = np.einsum("abcd,ca,db->", r, q, q)
    qa = np.einsum("abcb,ca->", r, q)
    qb = np.einsum("abad,db->", r, q)
    return float(1.0 + 4.0 * (both - 0.5 * qa - 0.5 * qb))


def corr_xn(rho, x0: float | None = None, n0: int = 0, q=None) -> float:
    """Homodyne on A, photon counting on B."""
    n0 = check_photon_threshold(n0)
    q = _q_array(q, rho.nmax, x0)
    if _is_product(rho):
        return float(rho.expect_factorized(quadrature_sign_operator(q),
                                           np.diag(count_sign_vector(rho.nmax, n0))))
    r = rho.rho
    # reduced operator on A for each fixed B photon number m'
    block = np.einsum("abcb->bac", r)  # [m', m, n]
    below = block[: n0 + 1]
    above = block[n0 + 1:]
    diag_below = np.einsum("kaa->", below)
    total = diag_below - np.einsum("kac,ca->", below, q) + np.einsum("kac,ca->", above, q)
    return float(2.0 * total - 1.0)


def swap_modes(rho):
    """Exchange the roles of modes A and B."""
    from .channels import TwoModeDensity

    if _is_product(rho):
        return rho.swapped()
    return TwoModeDensity(np.transpose(rho.rho, (1, 0, 3, 2)))


def corr_nx(rho, x0: float | None = None, n0: int = 0, q=None) -> float:
    """Photon counting on A, homodyne on B; ``corr_xn`` on the mode-swapped state."""
    return corr_xn(swap_modes(rho), x0, n0, q=q)


def corr_nn(rho, n0: int = 0) -> float:
    n0 = check_photon_threshold(n0)
    nmax = rho.nmax
    if _is_product(rho):
        s = np.diag(count_sign_vector(nmax, n0))
        return float(rho.expect_factorized(s, s))
    pop = np.einsum("abab->ab", rho.rho)
    lo = slice(0, n0 + 1)
    hi = slice(n0 + 1, nmax + 1)
    return float(1.0 - 2.0 * pop[lo, hi].sum() - 2.0 * pop[hi, lo].sum())


def _is_product(rho) -> bool:
    return hasattr(rho, "expect_factorized")
