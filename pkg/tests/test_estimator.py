import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from redistrib import FIXTURES, FundRedistributor


def test_fit_predict_transform():
    e1 = FIXTURES["E1"]()
    est = FundRedistributor(scheme="naive").fit(e1)
    assert est.funded_ == {"A", "B"}
    assert est.predict() == {"A": True, "B": True}
    assert est.transform().funded == 2
    assert est.score() == 2


def test_params_and_clone():
    est = FundRedistributor(scheme="ordered", ordering="strict")
    assert est.get_params()["ordering"] == "strict"
    twin = clone(est).set_params(scheme="unordered")
    assert twin.scheme == "unordered" and est.scheme == "ordered"
    assert twin.fit(FIXTURES["E3"]()).score() == 2


def test_not_fitted():
    with pytest.raises(NotFittedError):
        FundRedistributor().predict()


def test_refit_on_new_instance():
    est = FundRedistributor(scheme="repurposing").fit(FIXTURES["E1"]())
    assert est.predict(FIXTURES["E2"]()) == {"A": False, "B": True}
