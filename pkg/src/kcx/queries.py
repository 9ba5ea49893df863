"""Polytime queries on NNF circuits: evaluate, condition, CO, VA, CT.

Consistency (CO) is sound on any decomposable circuit; model counting
(CT) and validity (VA) additionally need determinism. Counting smooths
first so Or children range over equal var sets; validity reduces to
counting. Module-level counters record how often each query runs, so
callers can assert which query classes an algorithm exercised.

PointQueries answers CO/VA about a circuit conditioned on fixing any
subset of features to one reference point. It folds literals that agree
with the point at construction and answers each query with a single
bottom-up pass over the reduced structure, which is what makes
enumeration over many instances affordable; its answers are
property-tested against the condition/is_consistent/is_valid route.
"""

from collections import Counter
from dataclasses import dataclass

from .circuit import Circuit, N_FALSE, N_TRUE, N_LIT, N_AND, N_OR

QUERY_COUNTS = Counter()


def reset_query_counts():
    QUERY_COUNTS.clear()


def query_counts():
    return {kind: QUERY_COUNTS[kind] for kind in ("co", "va", "cd", "ct")}


@dataclass
class Count:
    """Model count over the variables the circuit mentions."""

    models: int
    free_vars: int


def _check_point(circuit, point):
    if len(point) != circuit.num_features:
        raise ValueError("point has %d values, circuit has %d features"
                         % (len(point), circuit.num_features))
    for v in point:
        if v not in (0, 1):
            raise ValueError("point values must be 0 or 1, got %r" % (v,))


def evaluate(circuit, point):
    """Evaluate the circuit at a total point, returning 0 or 1."""
    _check_point(circuit, point)
    kinds, lits, flat, start, end = circuit._flat()
    vals = [False] * len(kinds)
    for i in range(len(kinds)):
        k = kinds[i]
        if k == N_LIT:
            lit = lits[i]
            vals[i] = bool(point[lit - 1]) if lit > 0 else not point[-lit - 1]
        elif k == N_AND:
            r = True
            for j in range(start[i], end[i]):
                if not vals[flat[j]]:
                    r = False
                    break
            vals[i] = r
        elif k == N_OR:
            r = False
            for j in range(start[i], end[i]):
                if vals[flat[j]]:
                    r = True
                    break
            vals[i] = r
        elif k == N_TRUE:
            vals[i] = True
    return int(vals[circuit.root])


def condition(circuit, term):
    """Fix features to constants, returning a new simplified circuit.

    term maps feature -> 0/1. Literals of fixed features become
    constants, constants propagate eagerly, and unreachable nodes are
    dropped, so repeated conditioning stays cheap. The result mentions
    no conditioned feature.
    """
    QUERY_COUNTS["cd"] += 1
    fixed = {}
    for k, v in term.items():
        if not 1 <= k <= circuit.num_features:
            raise ValueError("feature %r out of range" % (k,))
        if v not in (0, 1):
            raise ValueError("term values must be 0 or 1, got %r" % (v,))
        fixed[k] = bool(v)

    FALSE_REF, TRUE_REF = -1, -2
    kinds, lits, children = [], [], []
    refs = [0] * len(circuit)
    for i in range(len(circuit)):
        k = circuit.kinds[i]
        if k == N_FALSE:
            refs[i] = FALSE_REF
        elif k == N_TRUE:
            refs[i] = TRUE_REF
        elif k == N_LIT:
            lit = circuit.lits[i]
            var = abs(lit)
            if var in fixed:
                refs[i] = TRUE_REF if fixed[var] == (lit > 0) else FALSE_REF
            else:
                kinds.append(N_LIT)
                lits.append(lit)
                children.append(())
                refs[i] = len(kinds) - 1
        elif k == N_AND:
            kept = []
            dead = False
            for c in circuit.children[i]:
                r = refs[c]
                if r == FALSE_REF:
                    dead = True
                    break
                if r != TRUE_REF:
                    kept.append(r)
            if dead:
                refs[i] = FALSE_REF
            elif not kept:
                refs[i] = TRUE_REF
            elif len(kept) == 1:
                refs[i] = kept[0]
            else:
                kinds.append(N_AND)
                lits.append(0)
                children.append(tuple(kept))
                refs[i] = len(kinds) - 1
        else:
            kept = []
            taut = False
            for c in circuit.children[i]:
                r = refs[c]
                if r == TRUE_REF:
                    taut = True
                    break
                if r != FALSE_REF:
                    kept.append(r)
            if taut:
                refs[i] = TRUE_REF
            elif not kept:
                refs[i] = FALSE_REF
            elif len(kept) == 1:
                refs[i] = kept[0]
            else:
                dvar = circuit.lits[i]
                kinds.append(N_OR)
                lits.append(0 if dvar in fixed else dvar)
                children.append(tuple(kept))
                refs[i] = len(kinds) - 1
    root = refs[circuit.root]
    if root == FALSE_REF:
        return Circuit([N_FALSE], [0], [()], 0, circuit.num_features)
    if root == TRUE_REF:
        return Circuit([N_TRUE], [0], [()], 0, circuit.num_features)
    return _compact(kinds, lits, children, root, circuit.num_features)


def _compact(kinds, lits, children, root, num_features):
    """Drop nodes unreachable from root and renumber."""
    keep = [False] * len(kinds)
    keep[root] = True
    for i in range(root, -1, -1):
        if keep[i]:
            for c in children[i]:
                keep[c] = True
    remap = [0] * len(kinds)
    nk, nl, nc = [], [], []
    for i in range(len(kinds)):
        if keep[i]:
            remap[i] = len(nk)
            nk.append(kinds[i])
            nl.append(lits[i])
            nc.append(tuple(remap[c] for c in children[i]))
    return Circuit(nk, nl, nc, remap[root], num_features)


def condition_selector(circuit, fixed, point):
    """Condition on point values for the chosen feature subset."""
    _check_point(circuit, point)
    return condition(circuit, {i: point[i - 1] for i in fixed})


def is_consistent(circuit):
    """CO query: does the circuit have a model? Sound on decomposable input."""
    QUERY_COUNTS["co"] += 1
    kinds, lits, flat, start, end = circuit._flat()
    vals = [False] * len(kinds)
    for i in range(len(kinds)):
        k = kinds[i]
        if k in (N_LIT, N_TRUE):
            vals[i] = True
        elif k == N_AND:
            r = True
            for j in range(start[i], end[i]):
                if not vals[flat[j]]:
                    r = False
                    break
            vals[i] = r
        elif k == N_OR:
            r = False
            for j in range(start[i], end[i]):
                if vals[flat[j]]:
                    r = True
                    break
            vals[i] = r
    return bool(vals[circuit.root])


def count_models(circuit):
    """CT query: smooth, then count bottom-up. Needs determinism to be exact."""
    from .circuit import smooth as _smooth

    QUERY_COUNTS["ct"] += 1
    sm = _smooth(circuit)
    kinds, lits, flat, start, end = sm._flat()
    counts = [0] * len(kinds)
    for i in range(len(kinds)):
        k = kinds[i]
        if k in (N_LIT, N_TRUE):
            counts[i] = 1
        elif k == N_AND:
            r = 1
            for j in range(start[i], end[i]):
                r *= counts[flat[j]]
            counts[i] = r
        elif k == N_OR:
            counts[i] = sum(counts[flat[j]] for j in range(start[i], end[i]))
    models = counts[sm.root]
    free_vars = len(sm.var_sets[sm.root])
    assert 0 <= models <= (1 << free_vars), "count out of range; input not deterministic?"
    return Count(models, free_vars)


def is_valid(circuit, num_free):
    """VA query: is the circuit satisfied by all 2**num_free completions?

    num_free counts the features treated as free; it must cover every
    variable the circuit mentions (variables the circuit omits multiply
    the model count by 2 each).
    """
    QUERY_COUNTS["va"] += 1
    c = count_models(circuit)
    if num_free < c.free_vars:
        raise ValueError("num_free=%d below the %d mentioned variables"
                         % (num_free, c.free_vars))
    return c.models == (1 << c.free_vars)


_G_VAR = 0   # true iff feature is not fixed
_G_NVAR = 1  # true iff feature is fixed
_G_AND = 2
_G_OR = 3
_G_ITE = 4   # feature free ? branch both : branch taken

_FALSE_REF, _TRUE_REF = -1, -2


def _compact_gates(gk, ga, gch, root):
    """Drop gates unreachable from the root ref."""
    if root < 0:
        return ([], [], [], root)
    keep = [False] * len(gk)
    keep[root] = True
    for g in range(root, -1, -1):
        if keep[g]:
            for c in gch[g]:
                if c >= 0:
                    keep[c] = True
    remap = [0] * len(gk)
    nk, na, nch = [], [], []
    for g in range(len(gk)):
        if keep[g]:
            remap[g] = len(nk)
            nk.append(gk[g])
            na.append(ga[g])
            nch.append(tuple(remap[c] if c >= 0 else c for c in gch[g]))
    return (nk, na, nch, remap[root])


class PointQueries:
    """CO/VA oracle for one circuit conditioned on subsets of one point."""

    def __init__(self, circuit, point):
        _check_point(circuit, point)
        self.circuit = circuit
        self.point = tuple(int(v) for v in point)
        self._co = None
        self._co_built = False
        self._va = None
        self._va_built = False

    # ---- structure construction ----

    def _build_co(self):
        circuit = self.circuit
        point = self.point
        kinds, lits, flat, start, end = circuit._flat()
        reach = circuit._reachable()
        gk, ga, gch = [], [], []
        refs = [0] * len(kinds)
        for i in range(len(kinds)):
            if not reach[i]:
                continue
            k = kinds[i]
            if k == N_LIT:
                lit = lits[i]
                var = lit if lit > 0 else -lit
                if (point[var - 1] == 1) == (lit > 0):
                    refs[i] = _TRUE_REF
                else:
                    refs[i] = len(gk)
                    gk.append(_G_VAR)
                    ga.append(var)
                    gch.append(())
            elif k == N_AND:
                kept = []
                acc = _TRUE_REF
                for j in range(start[i], end[i]):
                    r = refs[flat[j]]
                    if r == _FALSE_REF:
                        acc = _FALSE_REF
                        break
                    if r != _TRUE_REF:
                        kept.append(r)
                if acc == _FALSE_REF:
                    refs[i] = _FALSE_REF
                elif not kept:
                    refs[i] = _TRUE_REF
                elif len(kept) == 1:
                    refs[i] = kept[0]
                else:
                    refs[i] = len(gk)
                    gk.append(_G_AND)
                    ga.append(0)
                    gch.append(tuple(kept))
            elif k == N_OR:
                kept = []
                acc = _FALSE_REF
                for j in range(start[i], end[i]):
                    r = refs[flat[j]]
                    if r == _TRUE_REF:
                        acc = _TRUE_REF
                        break
                    if r != _FALSE_REF:
                        kept.append(r)
                if acc == _TRUE_REF:
                    refs[i] = _TRUE_REF
                elif not kept:
                    refs[i] = _FALSE_REF
                elif len(kept) == 1:
                    refs[i] = kept[0]
                else:
                    refs[i] = len(gk)
                    gk.append(_G_OR)
                    ga.append(0)
                    gch.append(tuple(kept))
            elif k == N_TRUE:
                refs[i] = _TRUE_REF
            else:
                refs[i] = _FALSE_REF
        return _compact_gates(gk, ga, gch, refs[circuit.root])

    def _build_va(self):
        """VA structure; needs every reachable Or in decision form."""
        circuit = self.circuit
        point = self.point
        kinds, lits, _, _, _ = circuit._flat()
        reach = circuit._reachable()
        splits = circuit._decision_table()
        gk, ga, gch = [], [], []
        refs = [0] * len(kinds)

        def fold_and(parts):
            kept = []
            for r in parts:
                if r == _FALSE_REF:
                    return _FALSE_REF
                if r != _TRUE_REF:
                    kept.append(r)
            if not kept:
                return _TRUE_REF
            if len(kept) == 1:
                return kept[0]
            gk.append(_G_AND)
            ga.append(0)
            gch.append(tuple(kept))
            return len(gk) - 1

        for i in range(len(kinds)):
            if not reach[i]:
                continue
            k = kinds[i]
            if k == N_LIT:
                lit = lits[i]
                var = lit if lit > 0 else -lit
                if (point[var - 1] == 1) == (lit > 0):
                    refs[i] = len(gk)
                    gk.append(_G_NVAR)
                    ga.append(var)
                    gch.append(())
                else:
                    refs[i] = _FALSE_REF
            elif k == N_AND:
                refs[i] = fold_and(refs[c] for c in circuit.children[i])
            elif k == N_OR:
                split = splits[i]
                if split is None:
                    return None
                var, pos_rest, neg_rest = split
                pos = _FALSE_REF if pos_rest is None else fold_and(refs[c] for c in pos_rest)
                neg = _FALSE_REF if neg_rest is None else fold_and(refs[c] for c in neg_rest)
                taken = pos if point[var - 1] == 1 else neg
                both = fold_and((pos, neg))
                if both == taken:
                    refs[i] = both
                else:
                    refs[i] = len(gk)
                    gk.append(_G_ITE)
                    ga.append(var)
                    gch.append((both, taken))
            elif k == N_TRUE:
                refs[i] = _TRUE_REF
            else:
                refs[i] = _FALSE_REF
        return _compact_gates(gk, ga, gch, refs[circuit.root])

    # ---- queries ----

    def _eval(self, structure, fixed):
        gk, ga, gch, root = structure
        if root == _TRUE_REF:
            return True
        if root == _FALSE_REF:
            return False
        vals = [False] * len(gk)
        for g in range(len(gk)):
            k = gk[g]
            if k == _G_VAR:
                vals[g] = ga[g] not in fixed
            elif k == _G_NVAR:
                vals[g] = ga[g] in fixed
            elif k == _G_AND:
                r = True
                for c in gch[g]:
                    if not vals[c]:
                        r = False
                        break
                vals[g] = r
            elif k == _G_OR:
                r = False
                for c in gch[g]:
                    if vals[c]:
                        r = True
                        break
                vals[g] = r
            else:
                branch = gch[g][0] if ga[g] not in fixed else gch[g][1]
                if branch == _TRUE_REF:
                    vals[g] = True
                elif branch == _FALSE_REF:
                    vals[g] = False
                else:
                    vals[g] = vals[branch]
        return vals[root]

    def consistent(self, fixed):
        """CO of the circuit with `fixed` features pinned to the point."""
        QUERY_COUNTS["co"] += 1
        QUERY_COUNTS["cd"] += 1
        if not self._co_built:
            self._co = self._build_co()
            self._co_built = True
        return self._eval(self._co, fixed)

    def valid(self, fixed):
        """VA of the circuit with `fixed` features pinned to the point."""
        QUERY_COUNTS["va"] += 1
        QUERY_COUNTS["cd"] += 1
        if not self._va_built:
            self._va = self._build_va()
            self._va_built = True
        if self._va is not None:
            return self._eval(self._va, fixed)
        return self._valid_by_count(fixed)

    def _valid_by_count(self, fixed):
        """Counting fallback for deterministic circuits not in decision form."""
        circuit = self.circuit
        point = self.point
        kinds, lits, flat, start, end = circuit._flat()
        var_sets = circuit.var_sets
        counts = [0] * len(kinds)
        frees = [0] * len(kinds)
        for i in range(len(kinds)):
            k = kinds[i]
            if k == N_TRUE:
                counts[i] = 1
            elif k == N_LIT:
                lit = lits[i]
                var = abs(lit)
                if var in fixed:
                    counts[i] = 1 if (point[var - 1] == 1) == (lit > 0) else 0
                else:
                    counts[i] = 1
                    frees[i] = 1
            elif k == N_AND:
                r = 1
                f = 0
                for j in range(start[i], end[i]):
                    c = flat[j]
                    r *= counts[c]
                    f += frees[c]
                counts[i] = r
                frees[i] = f
            elif k == N_OR:
                f = len(var_sets[i]) - sum(1 for v in var_sets[i] if v in fixed)
                total = 0
                for j in range(start[i], end[i]):
                    c = flat[j]
                    total += counts[c] << (f - frees[c])
                counts[i] = total
                frees[i] = f
        root = circuit.root
        return counts[root] == (1 << frees[root])
