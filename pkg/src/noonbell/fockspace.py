"""Squeezed Fock-state coefficients and the amplified two-photon N00N state.

Everything here is real-valued: the gain is a non-negative real number and the
N00N phase is zero, so all amplitudes stay real.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from ._validation import check_cutoff

DEFAULT_NMAX = 40
NORM_DEFICIT_TOL = 1e-8


class InsufficientCutoffError(ValueError):
    """Raised when the truncated Fock space loses too much norm."""


@dataclass(frozen=True)
class Gain:
    """Parametric gain of the amplifier, with ``mu = cosh(zeta)`` and ``nu = sinh(zeta)``."""

    zeta: float

    def __post_init__(self):
        z = float(self.zeta)
        if not np.isfinite(z) or z < 0:
            raise ValueError(f"gain zeta must be a finite non-negative number, got {self.zeta!r}")
        object.__setattr__(self, "zeta", z)

    @property
    def mu(self) -> float:
        return math.cosh(self.zeta)

    @property
    def nu(self) -> float:
        return math.sinh(self.zeta)


def as_gain(gain) -> Gain:
    return gain if isinstance(gain, Gain) else Gain(gain)


@dataclass(frozen=True)
class SingleModeCoeffs:
    c: np.ndarray
    norm_deficit: float = 0.0

    @property
    def nmax(self) -> int:
        return len(self.c) - 1


@dataclass(frozen=True)
class TwoModePureState:
    """Amplitudes ``c[m, m']`` on ``|m>_A |m'>_B``."""

    c: np.ndarray
    norm_deficit: float = 0.0

    @property
    def nmax(self) -> int:
        return self.c.shape[0] - 1

    def density(self):
        from .channels import TwoModeDensity

        return TwoModeDensity(np.einsum("ab,cd->abcd", self.c, self.c))


@dataclass(frozen=True)
class SqueezeMatrix:
    """Truncated matrix ``s[m, n] = <m|S(zeta)|n>``.

    Only columns ``n <= interior_block`` are accurate; higher columns leak
    weight past the cutoff.
    """

    s: np.ndarray
    interior_block: int
    working_nmax: int = field(default=0)


def _series_prefactors(nmax: int):
    # (-nu/2mu)^n sqrt((2n)!)/n! for 2n <= nmax, in log space
    n = np.arange(nmax // 2 + 1)
    log_comb = 0.5 * gammaln(2 * n + 1) - gammaln(n + 1)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    return n, sign, log_comb


def _finish(c: np.ndarray, label: str) -> SingleModeCoeffs:
    deficit = max(0.0, 1.0 - float(np.dot(c, c)))
    if deficit >= NORM_DEFICIT_TOL:
        raise InsufficientCutoffError(
            f"insufficient cutoff: {label} loses {deficit:.3e} of its norm at nmax={len(c) - 1}"
        )
    return SingleModeCoeffs(c, deficit)


def squeezed_vacuum_coeffs(gain, nmax: int = DEFAULT_NMAX) -> SingleModeCoeffs:
    """Fock amplitudes of ``S(zeta)|0>``."""
    gain = as_gain(gain)
    nmax = check_cutoff(nmax)
    c = np.zeros(nmax + 1)
    if gain.zeta == 0.0:
        c[0] = 1.0
        return SingleModeCoeffs(c, 0.0)
    mu, nu = gain.mu, gain.nu
    n, sign, log_comb = _series_prefactors(nmax)
    log_mag = log_comb + n * (math.log(nu) - math.log(2 * mu)) - 0.5 * math.log(mu)
    c[2 * n] = sign * np.exp(log_mag)
    return _finish(c, "squeezed vacuum")


def squeezed_two_photon_coeffs(gain, nmax: int = DEFAULT_NMAX) -> SingleModeCoeffs:
    """Fock amplitudes of ``S(zeta)|2>``.

    The series bracket ``nu - 2n/nu`` is 0/0 at ``zeta = 0``; that limit is
    returned directly as ``|2>``.
    """
    gain = as_gain(gain)
    nmax = check_cutoff(nmax)
    c = np.zeros(nmax + 1)
    if gain.zeta == 0.0:
        c[2] = 1.0
        return SingleModeCoeffs(c, 0.0)
    mu, nu = gain.mu, gain.nu
    n, sign, log_comb = _series_prefactors(nmax)
    # nu^n (nu - 2n/nu) split into nu^(n+1) - 2n nu^(n-1) so tiny gains stay finite
    log_base = log_comb - n * math.log(2 * mu) - 0.5 * math.log(2 * mu**3)
    log_nu = math.log(nu)
    first = np.exp(log_base + (n + 1) * log_nu)
    second = np.zeros_like(first)
    second[1:] = 2 * n[1:] * np.exp(log_base[1:] + (n[1:] - 1) * log_nu)
    c[2 * n] = sign * (first - second)
    return _finish(c, "squeezed two-photon state")


def amplified_noon(gain, nmax: int = DEFAULT_NMAX) -> TwoModePureState:
    """Two-photon N00N state with both modes squeezed by the same gain.

    Built as ``(Phi2_A Phi0_B + Phi0_A Phi2_B)/sqrt(2)`` and renormalized on the
    truncated space; the pre-normalization deficit is kept on the result.
    """
    phi0 = squeezed_vacuum_coeffs(gain, nmax).c
    phi2 = squeezed_two_photon_coeffs(gain, nmax).c
    half = np.outer(phi2, phi0)
    c = (half + half.T) / math.sqrt(2.0)
    norm2 = float(np.sum(c * c))
    deficit = max(0.0, 1.0 - norm2)
    if deficit >= NORM_DEFICIT_TOL:
        raise InsufficientCutoffError(f"insufficient cutoff: N00N state loses {deficit:.3e} of its norm")
    c = c / math.sqrt(norm2)
    # renormalization can leave c and c.T differing in the last ulp
    c = 0.5 * (c + c.T)
    return TwoModePureState(c, deficit)


def mean_total_photons(state: TwoModePureState) -> float:
    n = np.arange(state.nmax + 1)
    return float(np.sum(np.add.outer(n, n) * state.c**2))


def squeeze_matrix(gain, nmax: int = DEFAULT_NMAX, working_nmax: int | None = None,
                   tol: float = NORM_DEFICIT_TOL) -> SqueezeMatrix:
    """Truncated single-mode squeeze operator from a matrix exponential.

    The generator ``(zeta a^2 - zeta a†^2)/2`` is exponentiated in a space of
    ``working_nmax`` (at least ``2*nmax``) and cut back to ``nmax``.
    ``interior_block`` is the largest column index up to which every column
    keeps all but ``tol`` of its norm inside the returned rows.
    """
    gain = as_gain(gain)
    nmax = check_cutoff(nmax)
    if working_nmax is None:
        working_nmax = max(2 * nmax, nmax + 40)
    if working_nmax < 2 * nmax:
        raise ValueError("working cutoff must be at least twice nmax")
    dim = working_nmax + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    a2 = a @ a
    generator = 0.5 * gain.zeta * (a2 - a2.T)
    full = expm(generator)
    s = full[: nmax + 1, : nmax + 1].copy()
    s[np.add.outer(np.arange(nmax + 1), np.arange(nmax + 1)) % 2 == 1] = 0.0
    leak = 1.0 - np.sum(s * s, axis=0)
    bad = np.nonzero(leak > tol)[0]
    interior = nmax if bad.size == 0 else int(bad[0]) - 1
    if interior < 0:
        raise InsufficientCutoffError("insufficient cutoff: no trusted squeeze columns")
    return SqueezeMatrix(s, interior, working_nmax)
