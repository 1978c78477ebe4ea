import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from noonbell import BellOptimizer, ViolationBoundary


def test_params_roundtrip():
    est = BellOptimizer(zeta=0.2, t=0.9)
    params = est.get_params()
    assert params["zeta"] == 0.2 and params["t"] == 0.9
    est.set_params(zeta=0.3)
    assert clone(est).zeta == 0.3


def test_fit_fixed_gain():
    est = BellOptimizer(zeta=0.189).fit()
    assert est.n0_ == 0
    assert abs(est.x0_ - 0.465) < 0.005
    assert abs(est.score() - 2.423) < 0.005
    assert est.correlations_["XN"] == pytest.approx(est.correlations_["NX"], abs=1e-9)


def test_fit_optimized_gain():
    est = BellOptimizer(gain_mode="optimized").fit()
    assert abs(est.zeta_ - 0.189) < 0.01


def test_predict_rows():
    est = BellOptimizer(zeta=0.189).fit()
    pred = est.predict([[0, 0.465], [0, est.x0_]])
    assert pred.shape == (2,)
    assert abs(pred[1] - est.b_opt_) < 1e-9
    with pytest.raises(ValueError):
        est.predict([[0.5, 0.4]])
    with pytest.raises(ValueError):
        est.predict([[0, 0.4, 1.0]])


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        BellOptimizer().predict([[0, 0.4]])
    with pytest.raises(NotFittedError):
        BellOptimizer().score()


def test_invalid_settings():
    with pytest.raises(ValueError):
        BellOptimizer(gain_mode="sometimes").fit()
    with pytest.raises(ValueError):
        BellOptimizer(t=1.5).fit()
    with pytest.raises(TypeError):
        BellOptimizer(cutoff=40.5).fit()


def test_violation_boundary_estimator():
    est = ViolationBoundary(gain_mode="fixed_zero", n_jobs=1).fit([0.6, 1.0])
    assert np.isnan(est.eta_n_min_[0])
    assert abs(est.eta_n_min_[1] - 0.711) < 0.005
    labels = est.predict([[1.0, 0.9], [1.0, 0.6]])
    np.testing.assert_array_equal(labels, [1, 0])
