"""Brute-force reference implementations for cross-checking the fast paths.

These assemble full operators on the two-mode space and are only practical
at small cutoffs. Nothing outside the test suite depends on them.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import comb, eval_hermite, factorial

from .channels import TwoModeDensity
from .measurement import Thresholds

KRAUS_MAX_NMAX = 12
REFERENCE_MAX_N = 30


def _x_factor(nmax: int, x0: float) -> np.ndarray:
    q = np.array([[q_overlap_reference(n, m, x0) for m in range(nmax + 1)] for n in range(nmax + 1)])
    return np.eye(nmax + 1) - 2.0 * q


def _n_factor(nmax: int, n0: int) -> np.ndarray:
    return np.diag([1.0 if n <= n0 else -1.0 for n in range(nmax + 1)])


def build_correlation_operator(kind: str, thresholds: Thresholds, nmax: int) -> np.ndarray:
    """Dense ``(D^2, D^2)`` correlation operator for ``kind`` in ``XX, XN, NX, NN``.

    The first letter is Alice's (mode A) measurement.
    """
    if kind not in ("XX", "XN", "NX", "NN"):
        raise ValueError(f"unknown correlation kind {kind!r}")
    factors = {}
    if "X" in kind:
        factors["X"] = _x_factor(nmax, thresholds.x0)
    if "N" in kind:
        factors["N"] = _n_factor(nmax, thresholds.n0)
    return np.kron(factors[kind[0]], factors[kind[1]])


def bell_operator(thresholds: Thresholds, nmax: int) -> np.ndarray:
    ops = {k: build_correlation_operator(k, thresholds, nmax) for k in ("XX", "XN", "NX", "NN")}
    return ops["XX"] + ops["XN"] + ops["NX"] - ops["NN"]


def expectation(rho: TwoModeDensity, op: np.ndarray) -> float:
    return float(np.trace(rho.as_matrix() @ op))


def kraus_operators(lam: float, nmax: int) -> list[np.ndarray]:
    """``K_k = sum_n sqrt(C(n, k) lam^k (1-lam)^(n-k)) |n-k><n|``."""
    ops = []
    for k in range(nmax + 1):
        K = np.zeros((nmax + 1, nmax + 1))
        for n in range(k, nmax + 1):
            K[n - k, n] = math.sqrt(comb(n, k, exact=True) * lam**k * (1 - lam) ** (n - k))
        ops.append(K)
    return ops


def damp_via_kraus(rho: TwoModeDensity, lam: float, mode: str) -> TwoModeDensity:
    """Loss on one mode as an explicit Kraus sum on the flattened density matrix."""
    nmax = rho.nmax
    if nmax > KRAUS_MAX_NMAX:
        raise ValueError(f"damp_via_kraus is limited to nmax <= {KRAUS_MAX_NMAX}")
    if mode not in ("A", "B"):
        raise ValueError("mode must be 'A' or 'B'")
    eye = np.eye(nmax + 1)
    mat = rho.as_matrix()
    out = np.zeros_like(mat)
    for K in kraus_operators(lam, nmax):
        full = np.kron(K, eye) if mode == "A" else np.kron(eye, K)
        out += full @ mat @ full.T
    return TwoModeDensity.from_matrix(out)


def q_overlap_reference(n: int, m: int, x0: float) -> float:
    """Adaptive quadrature of ``<n|x><x|m>`` over ``|x| <= x0`` from scipy's Hermite polynomials."""
    if max(n, m) > REFERENCE_MAX_N:
        raise ValueError(f"reference overlap limited to n, m <= {REFERENCE_MAX_N}")
    if (n + m) % 2 == 1 or x0 == 0:
        return 0.0
    norm = math.sqrt(2.0 / math.pi) / math.sqrt(2.0**n * factorial(n, exact=True) * 2.0**m * factorial(m, exact=True))

    def integrand(x):
        y = math.sqrt(2.0) * x
        return norm * math.exp(-2.0 * x * x) * eval_hermite(n, y) * eval_hermite(m, y)

    val, _ = quad(integrand, 0.0, x0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 2.0 * val


def random_density(nmax: int, rng: np.random.Generator, rank: int | None = None) -> TwoModeDensity:
    """Random real positive two-mode density matrix with unit trace."""
    d = (nmax + 1) ** 2
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank))
    mat = g @ g.T
    mat /= np.trace(mat)
    return TwoModeDensity.from_matrix(mat)
