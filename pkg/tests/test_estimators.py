import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import all_points
from kcx.estimators import CircuitClassifier, CircuitExplainer
from kcx.explain import Instance, one_axp, one_cxp
from kcx.queries import evaluate


@pytest.fixture
def X16(running):
    return np.array(all_points(running.num_features))


def test_classifier_predicts_like_evaluate(running, X16):
    clf = CircuitClassifier(circuit=running).fit(X16)
    expected = [evaluate(running, tuple(row)) for row in X16]
    assert clf.predict(X16).tolist() == expected
    assert clf.classes_.tolist() == [0, 1]
    assert clf.n_features_in_ == 4


def test_classifier_score(running, X16):
    clf = CircuitClassifier(circuit=running).fit(X16)
    y = np.array([evaluate(running, tuple(row)) for row in X16])
    assert clf.score(X16, y) == 1.0
    assert clf.score(X16, 1 - y) == 0.0


def test_classifier_requires_fit(running, X16):
    with pytest.raises(NotFittedError):
        CircuitClassifier(circuit=running).predict(X16)


def test_classifier_requires_circuit(X16):
    with pytest.raises(ValueError, match="circuit must be set"):
        CircuitClassifier().fit(X16)


def test_classifier_input_validation(running, X16):
    clf = CircuitClassifier(circuit=running).fit(X16)
    with pytest.raises(ValueError, match="columns"):
        clf.predict(X16[:, :3])
    with pytest.raises(ValueError, match="0/1"):
        clf.predict(np.full((2, 4), 7))


def test_classifier_params_and_clone(running):
    clf = CircuitClassifier(circuit=running)
    assert clf.get_params() == {"circuit": running}
    twin = clone(clf)
    assert twin.circuit == running
    clf.set_params(circuit=None)
    assert clf.circuit is None


def test_explainer_axp_masks(running, X16):
    exp = CircuitExplainer(circuit=running).fit(X16)
    masks = exp.transform(X16)
    assert masks.shape == X16.shape
    for row, mask in zip(X16, masks):
        point = tuple(int(v) for v in row)
        inst = Instance(point, evaluate(running, point))
        want = one_axp(running, inst)
        assert {f for f in range(1, 5) if mask[f - 1]} == want


def test_explainer_cxp_with_order(running, X16):
    order = (4, 3, 2, 1)
    exp = CircuitExplainer(circuit=running, kind="cxp", order=order).fit(X16)
    masks = exp.transform(X16)
    for row, mask in zip(X16, masks):
        point = tuple(int(v) for v in row)
        inst = Instance(point, evaluate(running, point))
        want = one_cxp(running, inst, order=order)
        assert {f for f in range(1, 5) if mask[f - 1]} == want


def test_explainer_golden_row(running):
    exp = CircuitExplainer(circuit=running).fit(np.zeros((1, 4), dtype=int))
    assert exp.transform(np.zeros((1, 4), dtype=int)).tolist() == [[0, 0, 0, 1]]


def test_explainer_kind_validation(running, X16):
    with pytest.raises(ValueError, match="kind"):
        CircuitExplainer(circuit=running, kind="both").fit(X16)


def test_explainer_params(running):
    exp = CircuitExplainer(circuit=running, kind="cxp", order=(1, 2, 3, 4))
    params = exp.get_params()
    assert params["kind"] == "cxp" and params["order"] == (1, 2, 3, 4)
    assert clone(exp).get_params() == params
