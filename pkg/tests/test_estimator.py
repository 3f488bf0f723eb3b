import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from regmarket import RegulatoryMarket, analysis
from regmarket.model import ModelParams, ModelVariant, WelfareConfig


def test_get_set_params():
    est = RegulatoryMarket(scheme="Bounty", g=2.0)
    params = est.get_params()
    assert params["scheme"] == "Bounty" and params["g"] == 2.0
    est.set_params(g=3.0)
    assert est.g == 3.0


def test_clone_unfitted():
    est = RegulatoryMarket(s=2.0).fit()
    twin = clone(est)
    assert twin.s == 2.0
    assert not hasattr(twin, "stationary_")


def test_fit_attributes():
    est = RegulatoryMarket().fit()
    assert est.transition_matrix_.shape == (6, 6)
    assert est.states_[0] == "HQ-AS"
    assert est.stationary_.sum() == pytest.approx(1.0)
    assert est.spne_.regulator_choice.value == "HQ"
    expected = analysis.evaluate_cell(ModelParams(), ModelVariant(), WelfareConfig(), "Vigilant")
    np.testing.assert_array_equal(est.stationary_, expected.stationary.vector)
    assert est.score() == expected.delta_welfare


def test_government_fit():
    est = RegulatoryMarket(regulator="government").fit()
    assert est.transition_matrix_.shape == (3, 3)
    assert est.spne_ is None


def test_transform_rows():
    X = np.array([[1.5, 0.6], [4.0, 0.1]])
    est = RegulatoryMarket()
    out = est.fit(X).transform(X)
    assert out.shape == (2, 4)
    for row, (s, p_r) in zip(out, X):
        cell = analysis.evaluate_cell(ModelParams(s=s, p_r=p_r), ModelVariant(), WelfareConfig(), "Vigilant")
        assert row.tolist() == [cell.metric(m) for m in analysis.METRICS]
    assert list(est.get_feature_names_out()) == list(analysis.METRICS)


def test_other_features():
    est = RegulatoryMarket(features=("g",)).fit()
    out = est.transform([[0.5], [2.0]])
    assert out[0, 2] < out[1, 2]  # more HQ with a larger Vigilant incentive


def test_in_pipeline():
    pipe = make_pipeline(RegulatoryMarket())
    assert pipe.fit_transform([[1.5, 0.6]]).shape == (1, 4)


def test_errors():
    with pytest.raises(NotFittedError):
        RegulatoryMarket().transform([[1.5, 0.6]])
    with pytest.raises(ValueError):
        RegulatoryMarket().fit().transform([[1.5, 0.6, 1.0]])
    with pytest.raises(ValueError):
        RegulatoryMarket(features=("nope",)).fit()
    with pytest.raises(ValueError):
        RegulatoryMarket(regulator="king").fit()
    with pytest.raises(ValueError):
        RegulatoryMarket(p_r=2.0).fit()
