"""Generalized decision functions: one circuit per class.

A GDF assigns the unique class whose circuit accepts the point; it must
be binding (some class always fires) and non-overlapping (never two).
Under those two promises the weak explanation tests need only
consistency of conditioned circuits: fixing S forces class p exactly
when every rival class is inconsistent with the fixed values. Validity
is never queried, so each per-class circuit only has to be decomposable
(DNNF), not deterministic.
"""

import json
import os
from dataclasses import dataclass

from .circuit import parse_c2d
from .explain import (ConstantFunctionError, Instance, _MarcoSession,
                      _check_features, _check_order, _shrink)
from .queries import PointQueries, condition_selector, evaluate, is_consistent


class GdfError(ValueError):
    """The per-class circuits do not partition the space at some point."""


class Gdf:
    """Class labels paired with per-class circuits over shared features."""

    def __init__(self, classes, functions):
        classes = tuple(classes)
        functions = tuple(functions)
        if len(classes) < 2:
            raise ValueError("a gdf needs at least two classes")
        if len(classes) != len(functions):
            raise ValueError("%d labels for %d circuits"
                             % (len(classes), len(functions)))
        if len(set(classes)) != len(classes):
            raise ValueError("class labels must be distinct")
        m = functions[0].num_features
        if any(f.num_features != m for f in functions):
            raise ValueError("per-class circuits disagree on num_features")
        self.classes = classes
        self.functions = functions
        self.num_features = m

    def __repr__(self):
        return "<Gdf %d classes, %d features>" % (len(self.classes), self.num_features)


@dataclass
class GdfValidation:
    binding: bool
    non_overlapping: bool
    counterexample: tuple | None


def validate_gdf(gdf, mode="brute_force", max_features=20):
    """Check binding and non-overlap.

    brute_force scans all points (refused above max_features);
    assert_only performs no scan and reports both promises as holding,
    trusting the caller.
    """
    if mode == "assert_only":
        return GdfValidation(True, True, None)
    if mode != "brute_force":
        raise ValueError("mode must be 'brute_force' or 'assert_only'")
    m = gdf.num_features
    if m > max_features:
        raise ValueError("brute-force validation refused above %d features"
                         % max_features)
    binding = True
    non_overlapping = True
    counterexample = None
    for idx in range(1 << m):
        point = tuple((idx >> (m - j)) & 1 for j in range(1, m + 1))
        fired = sum(evaluate(f, point) for f in gdf.functions)
        if fired == 0 and binding:
            binding = False
            if counterexample is None:
                counterexample = point
        elif fired > 1 and non_overlapping:
            non_overlapping = False
            if counterexample is None:
                counterexample = point
        if not binding and not non_overlapping:
            break
    return GdfValidation(binding, non_overlapping, counterexample)


def gdf_predict(gdf, point):
    """Index of the unique class whose circuit fires at the point."""
    fired = [q for q, f in enumerate(gdf.functions) if evaluate(f, point)]
    if len(fired) != 1:
        raise GdfError("point %s fires %d classes; gdf promises exactly one "
                       "(validation is stale or was skipped)"
                       % (list(point), len(fired)))
    return fired[0]


def gdf_classify(gdf, point):
    return Instance(tuple(int(v) for v in point), gdf_predict(gdf, point))


def _check_gdf_instance(gdf, instance):
    actual = gdf_predict(gdf, instance.point)
    if actual != instance.predicted_class:
        raise ValueError("instance labeled class %r but gdf predicts %r"
                         % (instance.predicted_class, actual))


def gdf_is_weak_axp(gdf, instance, features):
    """Does fixing `features` force the instance's class? Consistency only."""
    _check_gdf_instance(gdf, instance)
    feats = _check_features(gdf.num_features, features)
    for q, f in enumerate(gdf.functions):
        if q == instance.predicted_class:
            continue
        if is_consistent(condition_selector(f, feats, instance.point)):
            return False
    return True


def gdf_is_weak_cxp(gdf, instance, features):
    """Does freeing `features` let some rival class fire?"""
    _check_gdf_instance(gdf, instance)
    feats = _check_features(gdf.num_features, features)
    fixed = set(range(1, gdf.num_features + 1)) - feats
    for q, f in enumerate(gdf.functions):
        if q == instance.predicted_class:
            continue
        if is_consistent(condition_selector(f, fixed, instance.point)):
            return True
    return False


def _gdf_weak_tests(gdf, instance):
    rivals = [PointQueries(f, instance.point)
              for q, f in enumerate(gdf.functions)
              if q != instance.predicted_class]
    full = frozenset(range(1, gdf.num_features + 1))

    def weak_axp(s):
        return not any(pq.consistent(s) for pq in rivals)

    def weak_cxp(y):
        fixed = full - y
        return any(pq.consistent(fixed) for pq in rivals)

    return weak_axp, weak_cxp, full


def gdf_one_axp(gdf, instance, order=None):
    _check_gdf_instance(gdf, instance)
    order = _check_order(gdf.num_features, order)
    weak_axp, _, full = _gdf_weak_tests(gdf, instance)
    return _shrink(weak_axp, full, order)


def gdf_one_cxp(gdf, instance, order=None):
    _check_gdf_instance(gdf, instance)
    order = _check_order(gdf.num_features, order)
    _, weak_cxp, full = _gdf_weak_tests(gdf, instance)
    if not weak_cxp(full):
        raise ConstantFunctionError(
            "no rival class is ever consistent; gdf is constant at class %d"
            % instance.predicted_class)
    return _shrink(weak_cxp, full, order)


class GdfEnumerationSession(_MarcoSession):
    """MARCO enumeration with the consistency-only gdf weak tests."""

    def __init__(self, gdf, instance, oracle=None, order=None):
        _check_gdf_instance(gdf, instance)
        order = _check_order(gdf.num_features, order)
        weak_axp, weak_cxp, full = _gdf_weak_tests(gdf, instance)
        if not weak_cxp(full):
            raise ConstantFunctionError(
                "no rival class is ever consistent; gdf is constant at class %d"
                % instance.predicted_class)
        super().__init__(gdf.num_features, weak_axp, weak_cxp, oracle, order)
        self.gdf = gdf
        self.instance = instance


def gdf_enumerate(gdf, instance, oracle=None, order=None, limit=None):
    """Run a GdfEnumerationSession to completion (or `limit` explanations)."""
    session = GdfEnumerationSession(gdf, instance, oracle=oracle, order=order)
    explanations = session.run(limit)
    return explanations, session.state


def load_gdf(path):
    """Load a gdf manifest: {"classes": [...], "circuits": [c2d paths]}.

    Circuit paths are resolved relative to the manifest's directory.
    """
    with open(path) as handle:
        manifest = json.load(handle)
    if not isinstance(manifest, dict):
        raise ValueError("gdf manifest must be a JSON object")
    classes = manifest.get("classes")
    paths = manifest.get("circuits")
    if not isinstance(classes, list) or not isinstance(paths, list):
        raise ValueError("gdf manifest needs 'classes' and 'circuits' lists")
    if len(classes) != len(paths):
        raise ValueError("%d classes for %d circuits" % (len(classes), len(paths)))
    base = os.path.dirname(os.path.abspath(path))
    functions = []
    for rel in paths:
        with open(os.path.join(base, rel)) as handle:
            functions.append(parse_c2d(handle.read()))
    return Gdf(classes, functions)
