"""Photon-loss channels on two-mode density operators.

Loss with probability ``lam`` per photon maps

    rho'[m, m', n, n'] = sum_{k, k'} rho[k+m, k'+m', k+n, k'+n']
                         sqrt(B(k|lam_A, k+m) B(k|lam_A, k+n))
                         sqrt(B(k'|lam_B, k'+m') B(k'|lam_B, k'+n'))

with ``B`` the binomial pmf. Transmission ``t`` and detector efficiency
``eta`` combine into a single loss ``1 - t*eta`` per arm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from ._validation import check_unit_interval
from .fockspace import (
    DEFAULT_NMAX,
    InsufficientCutoffError,
    TwoModePureState,
    as_gain,
    squeeze_matrix,
)

TRACE_DRIFT_TOL = 1e-6

Measurement = Literal["N", "X"]


@dataclass(frozen=True)
class TwoModeDensity:
    """Dense real tensor ``rho[m, m', n, n']`` for ``|m><n|_A (x) |m'><n'|_B``."""

    rho: np.ndarray

    @property
    def nmax(self) -> int:
        return self.rho.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.einsum("abab->", self.rho))

    def as_matrix(self) -> np.ndarray:
        """Flatten to a ``D^2 x D^2`` matrix on the ``|m>_A|m'>_B`` basis."""
        d = self.nmax + 1
        return self.rho.reshape(d * d, d * d)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "TwoModeDensity":
        d = math.isqrt(mat.shape[0])
        return cls(np.asarray(mat, dtype=float).reshape(d, d, d, d))

    @classmethod
    def vacuum(cls, nmax: int) -> "TwoModeDensity":
        rho = np.zeros((nmax + 1,) * 4)
        rho[0, 0, 0, 0] = 1.0
        return cls(rho)


@dataclass(frozen=True)
class LossParams:
    """Channel transmittance and the two detector efficiencies."""

    t: float = 1.0
    eta_n: float = 1.0
    eta_x: float = 1.0

    def __post_init__(self):
        for name in ("t", "eta_n", "eta_x"):
            object.__setattr__(self, name, check_unit_interval(getattr(self, name), name))


class ProductFormDensity:
    """Density operator stored as ``sum_i w_i A_i (x) B_i``.

    The amplified N00N state is a sum of four such terms, and loss acts on
    each factor independently, so damping and every correlation reduce to
    single-mode matrix work.
    """

    def __init__(self, terms: Sequence[tuple[float, np.ndarray, np.ndarray]]):
        self.terms = [(float(w), np.asarray(a, dtype=float), np.asarray(b, dtype=float)) for w, a, b in terms]
        if not self.terms:
            raise ValueError("product form needs at least one term")

    @classmethod
    def from_pure_terms(cls, terms):
        """Build from ``(w, uA, vA, uB, vB)`` meaning ``w |uA><vA| (x) |uB><vB|``."""
        cache = {}

        def outer(u, v):
            key = (id(u), id(v))
            if key not in cache:
                cache[key] = np.outer(u, v)
            return cache[key]

        return cls([(w, outer(ua, va), outer(ub, vb)) for w, ua, va, ub, vb in terms])

    @property
    def nmax(self) -> int:
        return self.terms[0][1].shape[0] - 1

    @property
    def trace(self) -> float:
        return float(sum(w * np.trace(a) * np.trace(b) for w, a, b in self.terms))

    def expect_factorized(self, op_a: np.ndarray, op_b: np.ndarray) -> float:
        """``tr(rho op_a (x) op_b)``."""
        return float(sum(w * np.sum(a * op_a.T) * np.sum(b * op_b.T) for w, a, b in self.terms))

    def swapped(self) -> "ProductFormDensity":
        return ProductFormDensity([(w, b, a) for w, a, b in self.terms])

    def map_modes(self, fa, fb) -> "ProductFormDensity":
        """Apply single-mode maps to every A and B factor."""
        cache_a, cache_b = {}, {}
        out = []
        for w, a, b in self.terms:
            ka, kb = id(a), id(b)
            if ka not in cache_a:
                cache_a[ka] = fa(a)
            if kb not in cache_b:
                cache_b[kb] = fb(b)
            out.append((w, cache_a[ka], cache_b[kb]))
        return ProductFormDensity(out)

    def expand(self) -> TwoModeDensity:
        d = self.nmax + 1
        rho = np.zeros((d, d, d, d))
        for w, a, b in self.terms:
            rho += w * np.einsum("ac,bd->abcd", a, b)
        return TwoModeDensity(rho)


def binomial_pmf(k, p: float, n):
    """Binomial pmf ``C(n, k) p^k (1-p)^(n-k)`` evaluated through log-Gamma.

    ``k`` and ``n`` may be arrays; any ``k > n`` or negative entry raises.
    """
    k_arr = np.asarray(k)
    n_arr = np.asarray(n)
    if np.any(k_arr < 0) or np.any(k_arr > n_arr):
        raise ValueError("binomial_pmf requires 0 <= k <= n")
    p = check_unit_interval(p, "p")
    logp = (gammaln(n_arr + 1) - gammaln(k_arr + 1) - gammaln(n_arr - k_arr + 1)
            + xlogy(k_arr, p) + xlog1py(n_arr - k_arr, -p))
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def _damping_weights(nmax: int, lam: float) -> np.ndarray:
    """``w[k, m] = sqrt(B(k | lam, k + m))`` for ``k + m <= nmax``, zero elsewhere."""
    d = nmax + 1
    k = np.arange(d)[:, None]
    m = np.arange(d)[None, :]
    valid = k + m <= nmax
    kk = np.where(valid, k, 0)
    nn = np.where(valid, k + m, 0)
    w = np.sqrt(binomial_pmf(kk, lam, nn))
    return np.where(valid, w, 0.0)


def damp_single_mode(mat: np.ndarray, lam: float) -> np.ndarray:
    """Apply photon loss ``lam`` to one single-mode operator ``mat[m, n]``."""
    lam = check_unit_interval(lam, "lambda")
    d = mat.shape[0]
    if lam == 0.0:
        return mat.copy()
    w = _damping_weights(d - 1, lam)
    out = np.zeros_like(mat, dtype=float)
    for k in range(d):
        wk = w[k, : d - k]
        out[: d - k, : d - k] += wk[:, None] * mat[k:, k:] * wk[None, :]
    return out


def amplitude_damp(rho: TwoModeDensity, lambda_a: float, lambda_b: float) -> TwoModeDensity:
    """Dense loss channel on both modes; ``O(D^5)``, meant for moderate cutoffs."""
    lambda_a = check_unit_interval(lambda_a, "lambda_a")
    lambda_b = check_unit_interval(lambda_b, "lambda_b")
    r = rho.rho
    d = r.shape[0]
    if lambda_a > 0.0:
        w = _damping_weights(d - 1, lambda_a)
        out = np.zeros_like(r)
        for k in range(d):
            wk = w[k, : d - k]
            out[: d - k, :, : d - k, :] += (wk[:, None, None, None] * r[k:, :, k:, :]
                                            * wk[None, None, :, None])
        r = out
    if lambda_b > 0.0:
        w = _damping_weights(d - 1, lambda_b)
        out = np.zeros_like(r)
        for k in range(d):
            wk = w[k, : d - k]
            out[:, : d - k, :, : d - k] += (wk[None, :, None, None] * r[:, k:, :, k:]
                                            * wk[None, None, None, :])
        r = out
    return TwoModeDensity(r)


def damp_product(state: ProductFormDensity, lambda_a: float, lambda_b: float) -> ProductFormDensity:
    """Loss channel applied factor by factor, staying in product form."""
    return state.map_modes(lambda a: damp_single_mode(a, lambda_a),
                           lambda b: damp_single_mode(b, lambda_b))


def damp_product_form(state: ProductFormDensity, lambda_a: float, lambda_b: float) -> TwoModeDensity:
    """Same output as ``amplitude_damp(state.expand(), ...)`` at single-mode cost."""
    return damp_product(state, lambda_a, lambda_b).expand()


def loss_for_measurement(loss: LossParams, side_a: Measurement, side_b: Measurement) -> tuple[float, float]:
    """Per-arm loss when detector inefficiency is folded into the channel."""
    eff = {"N": loss.eta_n, "X": loss.eta_x}
    try:
        return 1.0 - loss.t * eff[side_a], 1.0 - loss.t * eff[side_b]
    except KeyError as exc:
        raise ValueError(f"measurement must be 'N' or 'X', got {exc.args[0]!r}") from None


def noon_product_form(gain, nmax: int = DEFAULT_NMAX) -> ProductFormDensity:
    """``|Psi2><Psi2|`` as four product terms over ``{Phi0, Phi2}`` pairs."""
    from .fockspace import squeezed_two_photon_coeffs, squeezed_vacuum_coeffs

    phi0 = squeezed_vacuum_coeffs(gain, nmax).c
    phi2 = squeezed_two_photon_coeffs(gain, nmax).c
    norm2 = float(np.dot(phi0, phi0) * np.dot(phi2, phi2) + np.dot(phi0, phi2) ** 2)
    w = 0.5 / norm2
    return ProductFormDensity.from_pure_terms([
        (w, phi2, phi2, phi0, phi0),
        (w, phi2, phi0, phi0, phi2),
        (w, phi0, phi2, phi2, phi0),
        (w, phi0, phi0, phi2, phi2),
    ])


def _bare_noon_product_form(nmax: int) -> ProductFormDensity:
    e0 = np.zeros(nmax + 1)
    e2 = np.zeros(nmax + 1)
    e0[0] = 1.0
    e2[2] = 1.0
    return ProductFormDensity.from_pure_terms([
        (0.5, e2, e2, e0, e0),
        (0.5, e2, e0, e0, e2),
        (0.5, e0, e2, e2, e0),
        (0.5, e0, e0, e2, e2),
    ])


def damp_then_amplify_product(t: float, gain, nmax: int = DEFAULT_NMAX) -> ProductFormDensity:
    """Bare N00N state sent through loss ``1 - t`` and then squeezed on each arm."""
    t = check_unit_interval(t, "t")
    sq = squeeze_matrix(as_gain(gain), nmax)
    if sq.interior_block < 2:
        raise InsufficientCutoffError("insufficient cutoff: squeeze columns 0..2 are not trusted")
    s = sq.s

    def amplify(mat):
        return s @ mat @ s.T

    damped = damp_product(_bare_noon_product_form(nmax), 1.0 - t, 1.0 - t)
    out = damped.map_modes(amplify, amplify)
    tr = out.trace
    if abs(tr - 1.0) >= TRACE_DRIFT_TOL:
        raise InsufficientCutoffError(f"insufficient cutoff: trace drift {abs(tr - 1.0):.2e} after amplification")
    return ProductFormDensity([(w / tr, a, b) for w, a, b in out.terms])


def damp_then_amplify(noon: TwoModePureState, t: float, gain, nmax: int | None = None) -> TwoModeDensity:
    """Dense result of losing photons from the bare N00N state before amplification.

    ``noon`` must be the unamplified two-photon N00N state; its cutoff sets
    the output cutoff unless ``nmax`` is given.
    """
    nmax = noon.nmax if nmax is None else nmax
    bare = np.zeros((noon.nmax + 1, noon.nmax + 1))
    bare[2, 0] = bare[0, 2] = 1.0 / math.sqrt(2.0)
    if not np.allclose(noon.c, bare, atol=1e-12):
        raise ValueError("damp_then_amplify expects the unamplified two-photon N00N state")
    return damp_then_amplify_product(t, gain, nmax).expand()
