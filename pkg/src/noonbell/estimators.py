"""scikit-learn style wrappers around the Bell-test optimizers.

The estimators hold the physical settings as hyper-parameters, so they work
with ``get_params``/``set_params``, ``clone`` and grid-style tooling.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_cutoff, check_unit_interval
from .channels import LossParams
from .chsh import (
    BOUNDARY_XTOL,
    CLASSICAL_BOUND,
    N0_MAX,
    X0_RANGE,
    best_bell,
    bell_value,
    optimize_gain,
    optimize_thresholds,
    violation_boundary,
)
from .fockspace import DEFAULT_NMAX, Gain
from .measurement import Thresholds


class BellOptimizer(BaseEstimator):
    """Find the measurement thresholds (and optionally the gain) maximizing the Bell value.

    Parameters
    ----------
    zeta : float
        Parametric gain; ignored when ``gain_mode="optimized"``.
    gain_mode : {"fixed", "optimized"}
    t, eta_n, eta_x : float
        Channel transmittance and detector efficiencies.
    cutoff : int
        Largest photon number kept per mode.
    n0_max : int
        Largest photon-count threshold tried.
    x0_range : tuple of float
        Search interval for the quadrature threshold.
    construction : {"amplify_then_loss", "loss_then_amplify"}
        Whether amplification happens at the source or after the channel.

    Attributes
    ----------
    result_ : BellResult
    zeta_, n0_, x0_, b_opt_ : fitted optimum
    """

    def __init__(self, zeta=0.0, gain_mode="fixed", t=1.0, eta_n=1.0, eta_x=1.0,
                 cutoff=DEFAULT_NMAX, n0_max=N0_MAX, x0_range=X0_RANGE,
                 construction="amplify_then_loss"):
        self.zeta = zeta
        self.gain_mode = gain_mode
        self.t = t
        self.eta_n = eta_n
        self.eta_x = eta_x
        self.cutoff = cutoff
        self.n0_max = n0_max
        self.x0_range = x0_range
        self.construction = construction

    def _loss(self) -> LossParams:
        return LossParams(t=self.t, eta_n=self.eta_n, eta_x=self.eta_x)

    def fit(self, X=None, y=None):
        """Run the optimization. ``X`` and ``y`` are ignored."""
        if self.gain_mode not in ("fixed", "optimized"):
            raise ValueError(f"gain_mode must be 'fixed' or 'optimized', got {self.gain_mode!r}")
        nmax = check_cutoff(self.cutoff)
        kw = dict(n0_max=self.n0_max, x0_range=tuple(self.x0_range))
        if self.gain_mode == "optimized":
            res = optimize_gain(self._loss(), nmax, construction=self.construction, **kw)
        else:
            res = optimize_thresholds(Gain(self.zeta), self._loss(), nmax,
                                      construction=self.construction, **kw)
        self.result_ = res
        self.zeta_ = res.zeta
        self.n0_ = res.n0
        self.x0_ = res.x0
        self.b_opt_ = res.b_value
        self.correlations_ = {"XX": res.e_xx, "XN": res.e_xn, "NX": res.e_nx, "NN": res.e_nn}
        return self

    def predict(self, X):
        """Bell value at the fitted gain for each row ``(n0, x0)`` of ``X``."""
        check_is_fitted(self, "result_")
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected columns (n0, x0), got {X.shape[1]} columns")
        if np.any(X[:, 0] != np.round(X[:, 0])):
            raise ValueError("n0 column must hold integers")
        nmax = check_cutoff(self.cutoff)
        return np.array([
            bell_value(self.zeta_, Thresholds(int(n0), float(x0)), self._loss(), nmax,
                       construction=self.construction).b_value
            for n0, x0 in X
        ])

    def score(self, X=None, y=None):
        """Optimized Bell value; larger is a stronger violation."""
        check_is_fitted(self, "result_")
        return self.b_opt_


class ViolationBoundary(BaseEstimator):
    """Minimal photon-detector efficiency for a violation, as a function of transmittance.

    ``fit`` takes the transmittance grid as ``X`` (one value per row).
    ``predict`` labels ``(t, eta_n)`` rows 1 when the optimized Bell value
    there exceeds 2.
    """

    def __init__(self, eta_x=1.0, gain_mode="optimized", cutoff=DEFAULT_NMAX,
                 n_jobs=None, xtol=BOUNDARY_XTOL):
        self.eta_x = eta_x
        self.gain_mode = gain_mode
        self.cutoff = cutoff
        self.n_jobs = n_jobs
        self.xtol = xtol

    def fit(self, X, y=None):
        ts = check_array(X, ensure_2d=False, dtype=float).ravel()
        check_unit_interval(self.eta_x, "eta_x")
        self.curve_ = violation_boundary(ts, self.eta_x, self.gain_mode, check_cutoff(self.cutoff),
                                         n_jobs=self.n_jobs, xtol=self.xtol)
        self.t_ = self.curve_.t
        self.eta_n_min_ = self.curve_.eta_n_min
        return self

    def predict(self, X):
        check_is_fitted(self, "curve_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected columns (t, eta_n), got {X.shape[1]} columns")
        nmax = check_cutoff(self.cutoff)
        out = []
        for t, eta_n in X:
            loss = LossParams(t=t, eta_n=eta_n, eta_x=self.eta_x)
            out.append(int(best_bell(loss, self.gain_mode, nmax).b_value > CLASSICAL_BOUND))
        return np.array(out)
