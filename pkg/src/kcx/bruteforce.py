"""Ground truth by exhaustion: decision trees, truth tables, families.

Everything here recomputes answers from pointwise evaluation without
touching the query or enumeration pipeline, so tests can cross-check
the engine against an independent route. Truth tables are big integers
with one bit per point; the bit index reads the point as a binary
number with feature 1 as the most significant bit, matching
itertools.product order.
"""

import csv
import random
from dataclasses import dataclass
from itertools import product

from .circuit import N_AND, N_FALSE, N_LIT, N_OR, N_TRUE

_FAMILY_LIMIT = 12
_SCAN_LIMIT = 20


@dataclass
class OracleReport:
    """Exhaustively computed explanation families and model count.

    weak_axp_by_mask[mask] tells whether the feature set encoded by
    mask (bit b for feature b+1) is a weak AXp; a set Y is a weak CXp
    exactly when the complement mask entry is False.
    """

    axps: set
    cxps: set
    model_count: int
    weak_axp_by_mask: tuple


def validate_tree(tree, num_features=None):
    """Check the decision-tree JSON schema and read-once property.

    Returns the largest variable tested. A num_features bound, when
    given, is enforced.
    """

    def walk(node, path):
        if not isinstance(node, dict):
            raise ValueError("tree nodes must be objects, got %r" % (node,))
        if "leaf" in node:
            if node["leaf"] not in (0, 1):
                raise ValueError("leaf must be 0 or 1, got %r" % (node["leaf"],))
            return 0
        if "var" not in node or "lo" not in node or "hi" not in node:
            raise ValueError("internal nodes need var, lo, hi")
        v = node["var"]
        if not isinstance(v, int) or v < 1:
            raise ValueError("var must be a positive integer, got %r" % (v,))
        if num_features is not None and v > num_features:
            raise ValueError("var %d beyond num_features=%d" % (v, num_features))
        if v in path:
            raise ValueError("variable %d repeats along a path" % v)
        deeper = path | {v}
        return max(v, walk(node["lo"], deeper), walk(node["hi"], deeper))

    return walk(tree, frozenset())


def evaluate_tree(tree, point):
    """Follow the tree at a total point; returns the leaf label."""
    node = tree
    while "leaf" not in node:
        node = node["hi"] if point[node["var"] - 1] else node["lo"]
    return node["leaf"]


def random_rodt(num_features, depth, seed):
    """Random full-depth read-once decision tree, never constant.

    Variables are drawn without replacement along each path; leaf labels
    are redrawn (whole tree regenerated) until both classes appear.
    Depth below 1 cannot yield a non-constant tree and is rejected.
    """
    if num_features < 1:
        raise ValueError("need at least one feature")
    if depth < 1:
        raise ValueError("depth must be at least 1 for a non-constant tree")
    rng = random.Random(seed)
    while True:
        leaf_labels = []

        def grow(avail, d):
            if d == depth or not avail:
                label = rng.randint(0, 1)
                leaf_labels.append(label)
                return {"leaf": label}
            v = rng.choice(sorted(avail))
            rest = avail - {v}
            return {"var": v, "lo": grow(rest, d + 1), "hi": grow(rest, d + 1)}

        tree = grow(frozenset(range(1, num_features + 1)), 0)
        if 0 in leaf_labels and 1 in leaf_labels:
            return tree


def _var_pattern(feature, num_features):
    """Bitmask of points (by table index) where the feature is 1."""
    npts = 1 << num_features
    block = 1 << (num_features - feature)
    period = block << 1
    base = ((1 << npts) - 1) // ((1 << period) - 1)
    return base * (((1 << block) - 1) << block)


def tree_truth_table(tree, num_features):
    """Truth table of a decision tree as a point-indexed bitmask."""
    npts = 1 << num_features
    full = (1 << npts) - 1

    def walk(node):
        if "leaf" in node:
            return full if node["leaf"] else 0
        pat = _var_pattern(node["var"], num_features)
        return (walk(node["hi"]) & pat) | (walk(node["lo"]) & ~pat & full)

    return walk(tree)


def circuit_truth_table(circuit):
    """Truth table of a circuit by bit-parallel pointwise evaluation."""
    m = circuit.num_features
    if m > _SCAN_LIMIT:
        raise ValueError("truth table refused above %d features" % _SCAN_LIMIT)
    npts = 1 << m
    full = (1 << npts) - 1
    pats = {j: _var_pattern(j, m) for j in range(1, m + 1)}
    vals = [0] * len(circuit)
    for i in range(len(circuit)):
        k = circuit.kinds[i]
        if k == N_TRUE:
            vals[i] = full
        elif k == N_LIT:
            lit = circuit.lits[i]
            vals[i] = pats[lit] if lit > 0 else full ^ pats[-lit]
        elif k == N_AND:
            r = full
            for c in circuit.children[i]:
                r &= vals[c]
            vals[i] = r
        elif k == N_OR:
            r = 0
            for c in circuit.children[i]:
                r |= vals[c]
            vals[i] = r
    return vals[circuit.root]


def brute_force_weak_axp(predict, num_features, point, klass, features):
    """Quantify over completions: does fixing `features` force `klass`?"""
    if num_features > _SCAN_LIMIT:
        raise ValueError("brute force refused above %d features" % _SCAN_LIMIT)
    free = sorted(set(range(1, num_features + 1)) - set(features))
    x = list(point)
    for combo in product((0, 1), repeat=len(free)):
        for f, v in zip(free, combo):
            x[f - 1] = v
        if predict(tuple(x)) != klass:
            return False
    return True


def brute_force_weak_cxp(predict, num_features, point, klass, features):
    """Does freeing `features` admit a completion predicted off-klass?"""
    if num_features > _SCAN_LIMIT:
        raise ValueError("brute force refused above %d features" % _SCAN_LIMIT)
    free = sorted(features)
    x = list(point)
    for f in range(1, num_features + 1):
        x[f - 1] = point[f - 1]
    for combo in product((0, 1), repeat=len(free)):
        for f, v in zip(free, combo):
            x[f - 1] = v
        if predict(tuple(x)) != klass:
            return True
    return False


def _bits(mask):
    out = []
    b = 0
    while mask:
        if mask & 1:
            out.append(b)
        mask >>= 1
        b += 1
    return out


def brute_force_families(predict, num_features, point, klass):
    """All minimal AXps and CXps by subset scan over the truth table.

    Weak-AXp status is monotone in the feature set, so one boolean per
    subset answers both families: a set Y is a weak CXp exactly when its
    complement is not a weak AXp.
    """
    m = num_features
    if m > _FAMILY_LIMIT:
        raise ValueError("family scan refused above %d features" % _FAMILY_LIMIT)
    # match marks points predicting the instance's class (any label kind);
    # ones marks truthy predictions and only feeds model_count.
    match = 0
    ones = 0
    for idx, pt in enumerate(product((0, 1), repeat=m)):
        got = predict(pt)
        if got == klass:
            match |= 1 << idx
        if got:
            ones |= 1 << idx
    npts = 1 << m
    full_pts = (1 << npts) - 1
    agree = []
    for j in range(1, m + 1):
        pat = _var_pattern(j, m)
        agree.append(pat if point[j - 1] else full_pts ^ pat)
    nmasks = 1 << m
    cube = [0] * nmasks
    cube[0] = full_pts
    weak = [False] * nmasks
    for mask in range(nmasks):
        if mask:
            low = mask & -mask
            cube[mask] = cube[mask ^ low] & agree[low.bit_length() - 1]
        sub = cube[mask]
        weak[mask] = (match & sub) == sub
    fullmask = nmasks - 1
    axps = set()
    cxps = set()
    for mask in range(nmasks):
        if weak[mask] and all(not weak[mask ^ (1 << b)] for b in _bits(mask)):
            axps.add(frozenset(b + 1 for b in _bits(mask)))
        comp = fullmask ^ mask
        if not weak[comp] and all(weak[comp | (1 << b)] for b in _bits(mask)):
            cxps.add(frozenset(b + 1 for b in _bits(mask)))
    return OracleReport(axps, cxps, ones.bit_count(), tuple(weak))


def load_instances_csv(path):
    """Read 0/1 instances from CSV with a header row.

    When the last header cell is class/label/target/y (any case) that
    column is split off as per-row classes. Returns (feature_names,
    points, classes-or-None).
    """
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise ValueError("csv file %s is empty" % path)
    header = [cell.strip() for cell in rows[0]]
    has_class = bool(header) and header[-1].lower() in ("class", "label", "target", "y")
    names = header[:-1] if has_class else header
    points = []
    classes = [] if has_class else None
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row]
        if len(cells) != len(header):
            raise ValueError("row %d has %d cells, header has %d"
                             % (lineno, len(cells), len(header)))
        try:
            values = [int(c) for c in cells]
        except ValueError:
            raise ValueError("row %d: non-integer cell" % lineno) from None
        if any(v not in (0, 1) for v in values):
            raise ValueError("row %d: values must be 0 or 1" % lineno)
        if has_class:
            points.append(tuple(values[:-1]))
            classes.append(values[-1])
        else:
            points.append(tuple(values))
    return names, points, classes
