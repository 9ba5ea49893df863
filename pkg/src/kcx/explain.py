"""Abductive and contrastive explanations over d-DNNF classifiers.

A weak AXp is a feature set whose values at the instance force the
predicted class for every completion of the rest; a weak CXp is a set
whose freedom admits a completion with a different class. Both tests
reduce to one validity or consistency query on the conditioned circuit.
Minimal explanations come from greedy deletion over a feature order;
the full families are enumerated MARCO-style, with a SAT oracle
proposing seeds over selector variables and each reported explanation
blocked by one clause. Every seed yields an explanation: if the
proposed set is not a weak AXp, the complement of the set is a weak
CXp.
"""

from dataclasses import dataclass

from .queries import (PointQueries, condition_selector, is_consistent,
                      is_valid, evaluate)
from .solver import DpllOracle


class ConstantFunctionError(ValueError):
    """The classifier ignores its inputs, so no contrastive explanation exists."""


@dataclass(frozen=True)
class Instance:
    """A total 0/1 point and the class the classifier assigns it."""

    point: tuple
    predicted_class: int


@dataclass(frozen=True)
class Explanation:
    kind: str  # "axp" or "cxp"
    features: frozenset


@dataclass
class EnumerationState:
    hitting_formula: object
    axps: list
    cxps: list
    oracle_calls: int
    exhausted: bool


def classify(circuit, point):
    """Build a validated Instance from a circuit and a point."""
    return Instance(tuple(int(v) for v in point), evaluate(circuit, point))


def explanation_record(explanation, instance):
    """JSON-ready dict for one explanation at one instance."""
    return {
        "kind": explanation.kind,
        "features": sorted(explanation.features),
        "instance": list(instance.point),
        "class": instance.predicted_class,
    }


def _check_instance(circuit, instance):
    actual = evaluate(circuit, instance.point)
    if actual != instance.predicted_class:
        raise ValueError("instance labeled %r but circuit evaluates to %r"
                         % (instance.predicted_class, actual))


def _check_features(num_features, features):
    feats = set()
    for f in features:
        if not isinstance(f, int) or not 1 <= f <= num_features:
            raise ValueError("feature %r out of range" % (f,))
        feats.add(f)
    return feats


def _check_order(num_features, order):
    if order is None:
        return None
    order = [int(i) for i in order]
    if sorted(order) != list(range(1, num_features + 1)):
        raise ValueError("order must be a permutation of 1..%d" % num_features)
    return order


def _ordered(features, order):
    if order is None:
        return sorted(features)
    return [i for i in order if i in features]


def _shrink(weak, seed, order):
    """Greedy deletion: drop each feature whose removal keeps the set weak."""
    current = set(seed)
    for i in _ordered(seed, order):
        trial = current - {i}
        if weak(trial):
            current = trial
    return frozenset(current)


def is_weak_axp(circuit, instance, features):
    """Does fixing `features` at the instance's values force its class?"""
    _check_instance(circuit, instance)
    feats = _check_features(circuit.num_features, features)
    delta = condition_selector(circuit, feats, instance.point)
    if instance.predicted_class == 1:
        return is_valid(delta, circuit.num_features - len(feats))
    return not is_consistent(delta)


def is_weak_cxp(circuit, instance, features):
    """Does freeing `features` admit a completion with a different class?"""
    _check_instance(circuit, instance)
    feats = _check_features(circuit.num_features, features)
    fixed = set(range(1, circuit.num_features + 1)) - feats
    delta = condition_selector(circuit, fixed, instance.point)
    if instance.predicted_class == 1:
        return not is_valid(delta, len(feats))
    return is_consistent(delta)


def _weak_tests(circuit, instance):
    """Instance-bound weak-AXp/weak-CXp predicates over feature sets.

    Checks the label against the circuit on the way: with every feature
    fixed, validity and consistency both collapse to the value of the
    circuit at the point.
    """
    pq = PointQueries(circuit, instance.point)
    full = frozenset(range(1, circuit.num_features + 1))
    if instance.predicted_class == 1:
        if not pq.valid(full):
            raise ValueError("instance labeled 1 but circuit evaluates to 0")

        def weak_axp(s):
            return pq.valid(s)

        def weak_cxp(y):
            return not pq.valid(full - y)
    elif instance.predicted_class == 0:
        if pq.consistent(full):
            raise ValueError("instance labeled 0 but circuit evaluates to 1")

        def weak_axp(s):
            return not pq.consistent(s)

        def weak_cxp(y):
            return pq.consistent(full - y)
    else:
        raise ValueError("predicted_class must be 0 or 1, got %r"
                         % (instance.predicted_class,))
    return weak_axp, weak_cxp, full


def one_axp(circuit, instance, order=None):
    """One subset-minimal AXp by greedy deletion from the full feature set."""
    order = _check_order(circuit.num_features, order)
    weak_axp, _, full = _weak_tests(circuit, instance)
    return _shrink(weak_axp, full, order)


def one_cxp(circuit, instance, order=None):
    """One subset-minimal CXp by greedy deletion from the full feature set."""
    order = _check_order(circuit.num_features, order)
    _, weak_cxp, full = _weak_tests(circuit, instance)
    if not weak_cxp(full):
        raise ConstantFunctionError(
            "classifier is constant at class %d; no contrastive explanation"
            % instance.predicted_class)
    return _shrink(weak_cxp, full, order)


def find_axp_from_seed(circuit, instance, seed, order=None):
    """Shrink a weak AXp seed to a subset-minimal AXp within the seed."""
    order = _check_order(circuit.num_features, order)
    feats = _check_features(circuit.num_features, seed)
    weak_axp, _, _ = _weak_tests(circuit, instance)
    if not weak_axp(feats):
        raise ValueError("seed %s is not a weak AXp" % sorted(feats))
    return _shrink(weak_axp, feats, order)


def find_cxp_from_seed(circuit, instance, seed, order=None):
    """Shrink a weak CXp seed to a subset-minimal CXp within the seed."""
    order = _check_order(circuit.num_features, order)
    feats = _check_features(circuit.num_features, seed)
    _, weak_cxp, _ = _weak_tests(circuit, instance)
    if not weak_cxp(feats):
        raise ValueError("seed %s is not a weak CXp" % sorted(feats))
    return _shrink(weak_cxp, feats, order)


class _MarcoSession:
    """MARCO loop over selector variables, generic in the weak tests."""

    def __init__(self, num_features, weak_axp, weak_cxp, oracle, order):
        self.num_features = num_features
        self.full = frozenset(range(1, num_features + 1))
        self.weak_axp = weak_axp
        self.weak_cxp = weak_cxp
        self.oracle = oracle if oracle is not None else DpllOracle(num_features)
        if getattr(self.oracle, "num_vars", num_features) != num_features:
            raise ValueError("oracle has %d variables, need %d"
                             % (self.oracle.num_vars, num_features))
        self.order = order
        self.axps = []
        self.cxps = []
        self.oracle_calls = 0
        self.exhausted = False

    @property
    def state(self):
        return EnumerationState(
            hitting_formula=getattr(self.oracle, "formula", None),
            axps=list(self.axps),
            cxps=list(self.cxps),
            oracle_calls=self.oracle_calls,
            exhausted=self.exhausted,
        )

    def _advance(self):
        if self.exhausted:
            return None
        model = self.oracle.solve()
        self.oracle_calls += 1
        if model is None:
            self.exhausted = True
            return None
        seed = {i for i in self.full if model[i - 1]}
        if self.weak_axp(seed):
            found = _shrink(self.weak_axp, seed, self.order)
            self.oracle.add_clause([-i for i in sorted(found)])
            self.axps.append(found)
            return Explanation("axp", found)
        found = _shrink(self.weak_cxp, self.full - seed, self.order)
        self.oracle.add_clause(sorted(found))
        self.cxps.append(found)
        return Explanation("cxp", found)

    def __iter__(self):
        while True:
            explanation = self._advance()
            if explanation is None:
                return
            yield explanation

    def run(self, limit=None):
        out = []
        for explanation in self:
            out.append(explanation)
            if limit is not None and len(out) >= limit:
                break
        return out


class EnumerationSession(_MarcoSession):
    """Streams every minimal AXp and CXp of an instance exactly once.

    A completed run makes one oracle call per explanation plus the final
    unsatisfiable one. The session owns its oracle; iterate from a
    single consumer.
    """

    def __init__(self, circuit, instance, oracle=None, order=None):
        order = _check_order(circuit.num_features, order)
        weak_axp, weak_cxp, full = _weak_tests(circuit, instance)
        if not weak_cxp(full):
            raise ConstantFunctionError(
                "classifier is constant at class %d; enumeration needs a "
                "non-constant function" % instance.predicted_class)
        super().__init__(circuit.num_features, weak_axp, weak_cxp, oracle, order)
        self.circuit = circuit
        self.instance = instance


def enumerate_explanations(circuit, instance, oracle=None, order=None, limit=None):
    """Run an EnumerationSession to completion (or `limit` explanations)."""
    session = EnumerationSession(circuit, instance, oracle=oracle, order=order)
    explanations = session.run(limit)
    return explanations, session.state


def check_duality(axps, cxps):
    """Are the families exact minimal-hitting-set duals of each other?"""
    axps = [frozenset(a) for a in axps]
    cxps = [frozenset(c) for c in cxps]
    return _mhs_of(axps, cxps) and _mhs_of(cxps, axps)


def _mhs_of(family, against):
    for s in family:
        for t in against:
            if not s & t:
                return False
        for i in s:
            smaller = s - {i}
            if all(smaller & t for t in against):
                return False
    return True
