"""CHSH value of the hybrid photon-counting / homodyne test and its optimization.

Alice and Bob each either count photons (outcome +1 for at most ``n0``
photons) or measure the quadrature (outcome +1 for ``|x| > x0``). The Bell
value is ``E_XX + E_XN + E_NX - E_NN``; local models stay at or below 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Literal

import numpy as np
from joblib import Parallel, delayed

from ._optimize import bisect_sign_change, golden_section_max
from ._validation import check_cutoff, check_grid, check_photon_threshold, check_threshold
from .channels import (
    LossParams,
    ProductFormDensity,
    damp_product,
    damp_then_amplify_product,
    loss_for_measurement,
    noon_product_form,
)
from .fockspace import DEFAULT_NMAX, amplified_noon, as_gain, mean_total_photons
from .measurement import (
    Thresholds,
    corr_nn,
    corr_nx,
    corr_xn,
    corr_xx,
    count_sign_vector,
    q_table,
    q_table_grid,
)

GainMode = Literal["fixed_zero", "optimized"]
Construction = Literal["amplify_then_loss", "loss_then_amplify"]

CLASSICAL_BOUND = 2.0
X0_RANGE = (0.01, 3.0)
X0_STEP = 0.01
X0_TOL = 1e-5
N0_MAX = 4
ZETA_RANGE = (0.0, 0.6)
ZETA_STEP = 0.025
ZETA_TOL = 1e-4
BOUNDARY_XTOL = 1e-4
SWAP_TOL = 1e-9


class NoViolationError(RuntimeError):
    """Raised when no setting in the search space exceeds the classical bound."""


@dataclass(frozen=True)
class BellResult:
    b_value: float
    e_xx: float
    e_xn: float
    e_nx: float
    e_nn: float
    zeta: float
    n0: int
    x0: float
    loss: LossParams = field(default_factory=LossParams)
    construction: str = "amplify_then_loss"

    @property
    def violates(self) -> bool:
        return self.b_value > CLASSICAL_BOUND

    def as_record(self) -> dict:
        return {
            "zeta": self.zeta, "n0": self.n0, "x0": self.x0,
            "t": self.loss.t, "eta_n": self.loss.eta_n, "eta_x": self.loss.eta_x,
            "construction": self.construction,
            "b_value": self.b_value, "e_xx": self.e_xx, "e_xn": self.e_xn,
            "e_nx": self.e_nx, "e_nn": self.e_nn,
        }


@dataclass(frozen=True)
class SweepPoint:
    zeta: float
    b_opt: float
    n0_opt: int
    x0_opt: float
    n_tot_mean: float
    result: BellResult


@dataclass(frozen=True)
class SweepSeries:
    points: list[SweepPoint]

    @property
    def zetas(self) -> np.ndarray:
        return np.array([p.zeta for p in self.points])

    @property
    def b_opt(self) -> np.ndarray:
        return np.array([p.b_opt for p in self.points])


@dataclass(frozen=True)
class BoundaryCurve:
    """Minimal threshold-detector efficiency per transmittance.

    ``eta_n_min`` is ``None`` where no efficiency up to 1 gives a violation.
    """

    points: list[tuple[float, float | None]]
    eta_x: float
    gain_mode: str

    @property
    def t(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def eta_n_min(self) -> np.ndarray:
        return np.array([np.nan if p[1] is None else p[1] for p in self.points])


def _check_gain_mode(mode) -> str:
    if mode not in ("fixed_zero", "optimized"):
        raise ValueError(f"gain_mode must be 'fixed_zero' or 'optimized', got {mode!r}")
    return mode


def _check_construction(construction) -> str:
    if construction not in ("amplify_then_loss", "loss_then_amplify"):
        raise ValueError(f"unknown construction {construction!r}")
    return construction


def lossy_states(gain, loss: LossParams, nmax: int = DEFAULT_NMAX,
                 construction: Construction = "amplify_then_loss") -> dict[str, ProductFormDensity]:
    """Damped product-form state for each measurement pairing ``XX, XN, NX, NN``.

    ``amplify_then_loss`` sends the amplified state through loss ``1 - t*eta``
    per arm. ``loss_then_amplify`` loses ``1 - t`` from the bare N00N state,
    amplifies, then applies detector loss ``1 - eta``.
    """
    construction = _check_construction(construction)
    if construction == "amplify_then_loss":
        base = noon_product_form(gain, nmax)
        det = loss
    else:
        base = damp_then_amplify_product(loss.t, gain, nmax)
        det = replace(loss, t=1.0)
    out = {}
    for pair in ("XX", "XN", "NX", "NN"):
        la, lb = loss_for_measurement(det, pair[0], pair[1])
        out[pair] = damp_product(base, la, lb)
    return out


def bell_value(gain, thresholds: Thresholds, loss: LossParams | None = None,
               nmax: int = DEFAULT_NMAX, construction: Construction = "amplify_then_loss") -> BellResult:
    """Bell value of the amplified N00N state at fixed thresholds and losses."""
    gain = as_gain(gain)
    loss = LossParams() if loss is None else loss
    nmax = check_cutoff(nmax)
    if thresholds.n0 > nmax:
        raise ValueError("n0 exceeds the Fock cutoff")
    states = lossy_states(gain, loss, nmax, construction)
    q = q_table(nmax, thresholds.x0)
    e_xx = corr_xx(states["XX"], q=q)
    e_xn = corr_xn(states["XN"], n0=thresholds.n0, q=q)
    e_nx = corr_nx(states["NX"], n0=thresholds.n0, q=q)
    e_nn = corr_nn(states["NN"], thresholds.n0)
    b = e_xx + e_xn + e_nx - e_nn
    if abs(e_xn - e_nx) > SWAP_TOL:
        raise ArithmeticError(f"swap symmetry broken: E_XN={e_xn!r}, E_NX={e_nx!r}")
    if abs(b - (e_xx + 2.0 * e_xn - e_nn)) > SWAP_TOL:
        raise ArithmeticError("symmetric Bell combination disagrees with the four-term sum")
    return BellResult(b, e_xx, e_xn, e_nx, e_nn, gain.zeta, thresholds.n0, thresholds.x0,
                      loss, construction)


class _ThresholdScan:
    """Bell value as a function of ``(n0, x0)`` for one fixed lossy state.

    Per product term only a handful of single-mode traces depend on the
    thresholds, so scanning thousands of settings costs a few matrix products.
    """

    def __init__(self, states: dict[str, ProductFormDensity], n0_max: int):
        self.nmax = states["XX"].nmax
        self.n0_values = np.arange(min(n0_max, self.nmax) + 1)
        signs = np.stack([count_sign_vector(self.nmax, n0) for n0 in self.n0_values])
        self.parts = {}
        for pair, st in states.items():
            w = np.array([t[0] for t in st.terms])
            a = np.stack([t[1] for t in st.terms])
            b = np.stack([t[2] for t in st.terms])
            self.parts[pair] = dict(
                w=w, a=a, b=b,
                tr_a=np.trace(a, axis1=1, axis2=2), tr_b=np.trace(b, axis1=1, axis2=2),
                n_a=np.einsum("kn,inn->ki", signs, a), n_b=np.einsum("kn,inn->ki", signs, b),
            )

    def _x_factor(self, part, side, q):
        # tr(M (I - 2Q)) for each term, q has shape (G, D, D) and is symmetric
        m = part[side]
        flat = q.reshape(q.shape[0], -1) @ m.reshape(m.shape[0], -1).T
        return part["tr_" + side][None, :] - 2.0 * flat

    def components(self, q: np.ndarray):
        """Correlations for a stack of Q tables; shapes ``(G,), (G, K), (G, K), (K,)``."""
        xx, xn, nx, nn = (self.parts[p] for p in ("XX", "XN", "NX", "NN"))
        e_xx = np.einsum("i,gi,gi->g", xx["w"], self._x_factor(xx, "a", q), self._x_factor(xx, "b", q))
        e_xn = np.einsum("i,gi,ki->gk", xn["w"], self._x_factor(xn, "a", q), xn["n_b"])
        e_nx = np.einsum("i,ki,gi->gk", nx["w"], nx["n_a"], self._x_factor(nx, "b", q))
        e_nn = np.einsum("i,ki,ki->k", nn["w"], nn["n_a"], nn["n_b"])
        return e_xx, e_xn, e_nx, e_nn

    def bell(self, q: np.ndarray) -> np.ndarray:
        e_xx, e_xn, e_nx, e_nn = self.components(q)
        return e_xx[:, None] + e_xn + e_nx - e_nn[None, :]


@lru_cache(maxsize=8)
def _x0_grid_tables(nmax: int, lo: float, hi: float, step: float):
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = np.round(lo + step * np.arange(count), 12)
    return grid, q_table_grid(nmax, grid)


def optimize_thresholds(gain, loss: LossParams | None = None, nmax: int = DEFAULT_NMAX,
                        n0_max: int = N0_MAX, x0_range=X0_RANGE,
                        construction: Construction = "amplify_then_loss",
                        x0_step: float = X0_STEP, x0_tol: float = X0_TOL) -> BellResult:
    """Maximize the Bell value over ``n0 in 0..n0_max`` and ``x0`` in ``x0_range``.

    ``x0`` is scanned on a uniform grid and the best grid cell is refined by
    golden-section search. Among equal values the smaller ``n0`` wins.
    """
    gain = as_gain(gain)
    loss = LossParams() if loss is None else loss
    nmax = check_cutoff(nmax)
    n0_max = check_photon_threshold(n0_max)
    lo, hi = (check_threshold(v) for v in x0_range)
    if not 0 < lo < hi:
        raise ValueError("x0_range must satisfy 0 < lo < hi")
    scan = _ThresholdScan(lossy_states(gain, loss, nmax, construction), n0_max)
    grid, tables = _x0_grid_tables(nmax, lo, hi, float(x0_step))
    values = scan.bell(tables)  # (G, K)

    best = None
    coarse_best = values.max()
    for k, n0 in enumerate(scan.n0_values):
        col = values[:, k]
        if col.max() < coarse_best - 1e-2:
            continue
        i = int(np.argmax(col))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]

        def f(x0, k=k):
            return float(scan.bell(q_table(nmax, x0).q[None])[0, k])

        x0, val = golden_section_max(f, a, b, x0_tol)
        if col[i] > val:
            x0, val = float(grid[i]), float(col[i])
        if best is None or val > best[0]:
            best = (val, int(n0), float(x0))

    _, n0, x0 = best
    e_xx, e_xn, e_nx, e_nn = scan.components(q_table(nmax, x0).q[None])
    k = int(n0)
    e_xx, e_xn, e_nx, e_nn = float(e_xx[0]), float(e_xn[0, k]), float(e_nx[0, k]), float(e_nn[k])
    return BellResult(e_xx + e_xn + e_nx - e_nn, e_xx, e_xn, e_nx, e_nn,
                      gain.zeta, n0, x0, loss, construction)


def optimize_gain(loss: LossParams | None = None, nmax: int = DEFAULT_NMAX,
                  zeta_range=ZETA_RANGE, zeta_step: float = ZETA_STEP, zeta_tol: float = ZETA_TOL,
                  construction: Construction = "amplify_then_loss", **threshold_kw) -> BellResult:
    """Maximize the threshold-optimized Bell value over the gain.

    A coarse scan over ``zeta_range`` picks a bracket that golden-section
    search then refines; the coarse scan guards against a second local
    maximum appearing under loss.
    """
    loss = LossParams() if loss is None else loss
    lo, hi = zeta_range
    zetas = np.linspace(lo, hi, int(round((hi - lo) / zeta_step)) + 1)
    cache: dict[float, BellResult] = {}

    def evaluate(z):
        z = float(z)
        if z not in cache:
            cache[z] = optimize_thresholds(z, loss, nmax, construction=construction, **threshold_kw)
        return cache[z]

    coarse = [evaluate(z) for z in zetas]
    i = int(np.argmax([r.b_value for r in coarse]))
    a, b = zetas[max(i - 1, 0)], zetas[min(i + 1, len(zetas) - 1)]
    golden_section_max(lambda z: evaluate(z).b_value, a, b, zeta_tol)
    return max(cache.values(), key=lambda r: (r.b_value, -r.zeta))


def best_bell(loss: LossParams, gain_mode: GainMode = "optimized", nmax: int = DEFAULT_NMAX,
              construction: Construction = "amplify_then_loss", **kw) -> BellResult:
    """Threshold-optimized Bell value, with the gain either fixed at 0 or optimized."""
    if _check_gain_mode(gain_mode) == "fixed_zero":
        return optimize_thresholds(0.0, loss, nmax, construction=construction, **kw)
    return optimize_gain(loss, nmax, construction=construction, **kw)


def sweep_gain(zeta_grid, loss: LossParams | None = None, nmax: int = DEFAULT_NMAX,
               n_jobs: int | None = None, **kw) -> SweepSeries:
    """Threshold-optimized Bell value at every gain on ``zeta_grid``."""
    zetas = check_grid(zeta_grid, "zeta_grid")
    loss = LossParams() if loss is None else loss

    def point(z):
        res = optimize_thresholds(float(z), loss, nmax, **kw)
        n_tot = mean_total_photons(amplified_noon(float(z), nmax))
        return SweepPoint(float(z), res.b_value, res.n0, res.x0, n_tot, res)

    points = Parallel(n_jobs=n_jobs)(delayed(point)(z) for z in zetas)
    return SweepSeries(list(points))


def _boundary_search(make_loss, gain_mode, nmax, construction, xtol, **kw):
    def excess(v):
        return best_bell(make_loss(v), gain_mode, nmax, construction, **kw).b_value - CLASSICAL_BOUND

    f_hi = excess(1.0)
    if f_hi <= 0:
        raise NoViolationError("no violation anywhere: the Bell value stays at or below 2")
    f_lo = excess(0.0)
    if f_lo > 0:
        return 0.0
    return bisect_sign_change(excess, 0.0, 1.0, xtol=xtol, f_lo=f_lo, f_hi=f_hi)


def min_detector_efficiency(t: float = 1.0, eta_x: float = 1.0, gain_mode: GainMode = "optimized",
                            nmax: int = DEFAULT_NMAX, construction: Construction = "amplify_then_loss",
                            xtol: float = BOUNDARY_XTOL, **kw) -> float:
    """Smallest photon-counting efficiency that still violates the CHSH bound."""
    _check_gain_mode(gain_mode)
    return _boundary_search(lambda v: LossParams(t=t, eta_n=v, eta_x=eta_x),
                            gain_mode, nmax, construction, xtol, **kw)


def min_transmittance(eta_n: float = 1.0, eta_x: float = 1.0, gain_mode: GainMode = "optimized",
                      nmax: int = DEFAULT_NMAX, construction: Construction = "amplify_then_loss",
                      xtol: float = BOUNDARY_XTOL, **kw) -> float:
    """Smallest channel transmittance that still violates the CHSH bound.

    ``construction="loss_then_amplify"`` sends the bare N00N state through
    the channels and amplifies at the receivers instead of at the source.
    """
    _check_gain_mode(gain_mode)
    return _boundary_search(lambda v: LossParams(t=v, eta_n=eta_n, eta_x=eta_x),
                            gain_mode, nmax, construction, xtol, **kw)


def _boundary_point(t, eta_x, gain_mode, nmax, xtol, kw):
    try:
        return float(t), min_detector_efficiency(t, eta_x, gain_mode, nmax, xtol=xtol, **kw)
    except NoViolationError:
        return float(t), None


def violation_boundary(t_grid, eta_x: float = 1.0, gain_mode: GainMode = "optimized",
                       nmax: int = DEFAULT_NMAX, n_jobs: int | None = None,
                       xtol: float = BOUNDARY_XTOL, **kw) -> BoundaryCurve:
    """Violation boundary in the ``(t, eta_n)`` plane for fixed homodyne efficiency."""
    ts = check_grid(t_grid, "t_grid")
    if ts[0] <= 0 or ts[-1] > 1:
        raise ValueError("t_grid must lie in (0, 1]")
    _check_gain_mode(gain_mode)
    points = Parallel(n_jobs=n_jobs)(
        delayed(_boundary_point)(t, eta_x, gain_mode, nmax, xtol, kw) for t in ts
    )
    return BoundaryCurve(list(points), float(eta_x), gain_mode)
