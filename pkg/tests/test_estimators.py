import numpy as np
import pytest
from sklearn.base import clone

from magwalk.estimators import BandFeatures, DensityOfStates, TraceMoments
from magwalk.lattice import Flux, reduce_flux
from magwalk.validation import check_angles, check_flux, check_fluxes, check_positive_int


def test_check_flux_forms():
    f = reduce_flux(3, 5)
    assert check_flux(f) is f
    assert check_flux("6/10") == f
    assert check_flux((3, 5)) == f
    assert check_flux(0) == reduce_flux(0, 1)
    with pytest.raises(TypeError):
        check_flux((0.5, 2))
    with pytest.raises(TypeError):
        check_flux(object())
    with pytest.raises(ValueError):
        check_flux((1, 0))


def test_check_fluxes_forms():
    assert check_fluxes(np.array([[1, 2], [2, 3]])) == [reduce_flux(1, 2), reduce_flux(2, 3)]
    assert check_fluxes(["1/3", "2/5"]) == [reduce_flux(1, 3), reduce_flux(2, 5)]
    assert check_fluxes([[1.0, 3.0]]) == [reduce_flux(1, 3)]
    with pytest.raises(ValueError):
        check_fluxes([[1, 2, 3]])
    with pytest.raises(ValueError):
        check_fluxes([[1.5, 2.0]])
    with pytest.raises(ValueError):
        check_angles([np.nan])
    with pytest.raises(ValueError):
        check_positive_int(0, "n")
    with pytest.raises(TypeError):
        check_positive_int(2.5, "n")


def test_band_features():
    est = BandFeatures(n_k=32)
    assert est.get_params() == {"n_k": 32}
    X = est.fit_transform(["1/3", "3/5"])
    assert X.shape == (2, 4)
    assert X[0, 3] == 6 and X[1, 3] == 10
    assert X[1, 1] == pytest.approx(1.0147, abs=2e-3)
    assert list(est.get_feature_names_out()) == ["phi", "band_measure", "n_arcs", "n_branches"]
    with pytest.raises(ValueError):
        BandFeatures(n_k=4).fit()


def test_density_of_states():
    est = DensityOfStates(L=4)
    est.fit("2/5")
    assert isinstance(est.flux_, Flux)
    assert est.eigenphases_.size == 162
    ids = est.predict([0.0, np.pi, 2 * np.pi - 1e-12])
    assert np.all(np.diff(ids) >= 0) and ids[-1] == pytest.approx(1.0)
    assert est.moments(2)(0) == pytest.approx(1.0)
    assert est.score(T=3) <= 0
    other = clone(est).set_params(L=6).fit((2, 5))
    assert other.eigenphases_.size == 2 * 13 ** 2
    with pytest.raises(ValueError):
        DensityOfStates().fit(["1/2", "1/3"])


def test_unfitted_raises():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        DensityOfStates().predict([0.0])


def test_trace_moments():
    est = TraceMoments(T=3).fit()
    X = est.transform(["0/1", "1/3"])
    assert X.shape == (2, 4)
    assert np.allclose(X[:, 0], 1) and np.allclose(X[:, 1], 0)
