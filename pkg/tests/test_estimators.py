import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ptsim.estimators import NonHermitianChain, TwoLevelSystem


def test_params_round_trip():
    est = NonHermitianChain(L=4, gamma=0.3, epsilon=0.1, seed=5)
    params = est.get_params()
    assert params["L"] == 4 and params["gamma"] == 0.3
    other = clone(est).set_params(gamma=0.5)
    assert other.gamma == 0.5 and est.gamma == 0.3


def test_not_fitted():
    with pytest.raises(NotFittedError):
        NonHermitianChain(L=3).transform(np.ones(8))


def test_transform_inverse_round_trip(rng):
    est = NonHermitianChain(L=4, gamma=0.4, epsilon=0.1, seed=1).fit()
    X = rng.normal(size=(3, 16)) + 1j * rng.normal(size=(3, 16))
    C = est.transform(X)
    np.testing.assert_allclose(est.inverse_transform(C), X, atol=1e-10)
    # an eigenvector maps to a unit coordinate vector
    e = est.transform(est.spectrum_.P[:, 2])
    np.testing.assert_allclose(np.abs(e), np.eye(16)[2], atol=1e-10)
    with pytest.raises(ValueError):
        est.transform(np.ones(8))


def test_fitted_attributes_and_phase():
    est = NonHermitianChain(L=4, gamma=0.2).fit()
    assert est.phase_ == "mixed" and est.gap_ == 0.0
    assert est.fields_.shape == (4,) and est.couplings_.shape == (3,)
    pure = NonHermitianChain(L=4, gamma=2.5).fit()
    assert pure.phase_ == "pure" and pure.gap_ > 0


def test_explicit_fields():
    est = NonHermitianChain(L=3).fit(np.array([1.0, 1.1, 1.2]))
    np.testing.assert_array_equal(est.fields_, [1.0, 1.1, 1.2])
    with pytest.raises(ValueError):
        NonHermitianChain(L=3).fit(np.ones(4))


def test_two_level_system_pipeline():
    tls = TwoLevelSystem(b=0.5).fit()
    ss = tls.steady_state()
    assert ss.purity == pytest.approx(0.625)
    assert ss.sigma_z_mean == pytest.approx(-0.5)
    assert tls.effective_dimension() == pytest.approx(1.6)
    states = tls.evolve([1.0, 0.0], [0.0, 1.0])
    assert states.shape == (2, 2)
    pur, _ = tls.purity_series([0.0, 1.0])
    assert pur[0] == pytest.approx(0.5)


def test_chain_helpers():
    est = NonHermitianChain(L=6, epsilon=0.12, gamma=0.0, seed=2).fit()
    assert 0 < est.level_statistics().r_mean < 1
    assert est.entropy_profile().shape == (64, 2)
    assert est.effective_dimension() == pytest.approx(64)
