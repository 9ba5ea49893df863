"""NNF circuit data model, parsers, and structural checks.

A circuit is a DAG of nodes stored in topological order, children
before parents. Node kinds are constants, literals, And, and Or. An Or
node may carry a decision variable; that annotation is the structural
evidence used to certify determinism (decision form). Supported inputs
are c2d's .nnf format, the UCLA .sdd format, and a JSON encoding of
read-once decision trees.
"""

from dataclasses import dataclass

N_FALSE = 0
N_TRUE = 1
N_LIT = 2
N_AND = 3
N_OR = 4

_KIND_NAMES = {N_FALSE: "false", N_TRUE: "true", N_LIT: "lit", N_AND: "and", N_OR: "or"}


class ParseError(ValueError):
    """Raised on malformed circuit input; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class Circuit:
    """Immutable NNF DAG.

    Parallel arrays describe the nodes: kinds[i] is one of the N_*
    constants, lits[i] holds the signed literal for N_LIT nodes and the
    decision variable (0 if none) for N_OR nodes, children[i] is a tuple
    of earlier node ids. Features are numbered 1..num_features; var sets
    may omit features the circuit never mentions.
    """

    def __init__(self, kinds, lits, children, root, num_features):
        n = len(kinds)
        if not (len(lits) == len(children) == n):
            raise ValueError("node arrays must have equal length")
        if n == 0:
            raise ValueError("circuit must have at least one node")
        if not 0 <= root < n:
            raise ValueError("root %r out of range" % (root,))
        if num_features < 0:
            raise ValueError("num_features must be nonnegative")
        var_sets = []
        for i in range(n):
            kind = kinds[i]
            ch = children[i]
            if kind in (N_FALSE, N_TRUE):
                if ch:
                    raise ValueError("node %d: constants take no children" % i)
                var_sets.append(frozenset())
            elif kind == N_LIT:
                if ch:
                    raise ValueError("node %d: literals take no children" % i)
                v = abs(lits[i])
                if not 1 <= v <= num_features:
                    raise ValueError("node %d: variable %d out of range" % (i, v))
                var_sets.append(frozenset((v,)))
            elif kind in (N_AND, N_OR):
                if not ch:
                    raise ValueError("node %d: empty %s" % (i, _KIND_NAMES[kind]))
                acc = set()
                for c in ch:
                    if not 0 <= c < i:
                        raise ValueError("node %d: child %r not an earlier node" % (i, c))
                    acc |= var_sets[c]
                if kind == N_OR and not 0 <= lits[i] <= num_features:
                    raise ValueError("node %d: decision variable out of range" % i)
                var_sets.append(frozenset(acc))
            else:
                raise ValueError("node %d: unknown kind %r" % (i, kind))
        self.kinds = tuple(kinds)
        self.lits = tuple(lits)
        self.children = tuple(tuple(c) for c in children)
        self.root = root
        self.num_features = num_features
        self.var_sets = tuple(var_sets)
        self._flat_cache = None
        self._reach_cache = None
        self._decision_cache = None

    def __len__(self):
        return len(self.kinds)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.kinds == other.kinds and self.lits == other.lits
                and self.children == other.children and self.root == other.root
                and self.num_features == other.num_features)

    def __hash__(self):
        return hash((self.kinds, self.lits, self.root, self.num_features))

    def __repr__(self):
        return "<Circuit %d nodes, %d features, root %d>" % (
            len(self.kinds), self.num_features, self.root)

    def _flat(self):
        """Node arrays with children flattened, for tight bottom-up loops."""
        if self._flat_cache is None:
            flat, start, end = [], [], []
            pos = 0
            for ch in self.children:
                start.append(pos)
                flat.extend(ch)
                pos += len(ch)
                end.append(pos)
            self._flat_cache = (list(self.kinds), list(self.lits), flat, start, end)
        return self._flat_cache

    def _reachable(self):
        """Boolean per node: reachable from the root."""
        if self._reach_cache is None:
            seen = [False] * len(self.kinds)
            seen[self.root] = True
            for i in range(self.root, -1, -1):
                if seen[i]:
                    for c in self.children[i]:
                        seen[c] = True
            self._reach_cache = seen
        return self._reach_cache

    def _decision_table(self):
        """Per node: decision split for Or nodes in decision form, else None."""
        if self._decision_cache is None:
            self._decision_cache = [
                _decision_split(self, i) if self.kinds[i] == N_OR else None
                for i in range(len(self.kinds))
            ]
        return self._decision_cache


class CircuitBuilder:
    """Accumulates nodes in topological order; shares constant and literal leaves."""

    def __init__(self, num_features):
        self.num_features = num_features
        self.kinds = []
        self.lits = []
        self.children = []
        self._leaf_ids = {}

    def _add(self, kind, lit, ch):
        self.kinds.append(kind)
        self.lits.append(lit)
        self.children.append(tuple(ch))
        return len(self.kinds) - 1

    def false(self):
        key = ("f",)
        if key not in self._leaf_ids:
            self._leaf_ids[key] = self._add(N_FALSE, 0, ())
        return self._leaf_ids[key]

    def true(self):
        key = ("t",)
        if key not in self._leaf_ids:
            self._leaf_ids[key] = self._add(N_TRUE, 0, ())
        return self._leaf_ids[key]

    def literal(self, lit):
        if lit == 0 or not 1 <= abs(lit) <= self.num_features:
            raise ValueError("literal %r out of range" % (lit,))
        if lit not in self._leaf_ids:
            self._leaf_ids[lit] = self._add(N_LIT, lit, ())
        return self._leaf_ids[lit]

    def conj(self, ids):
        ids = tuple(ids)
        if not ids:
            return self.true()
        if len(ids) == 1:
            return ids[0]
        return self._add(N_AND, 0, ids)

    def disj(self, ids, decision_var=0):
        ids = tuple(ids)
        if not ids:
            return self.false()
        if len(ids) == 1 and decision_var == 0:
            return ids[0]
        return self._add(N_OR, decision_var, ids)

    def build(self, root):
        return Circuit(self.kinds, self.lits, self.children, root, self.num_features)


@dataclass
class StructureReport:
    """Outcome of check_structure.

    offending_node is the first node (in topological order) violating
    decomposability or decision form; when only smoothness fails it is
    the first non-smooth Or node, and None when everything holds.
    """

    decomposable: bool
    decision_deterministic: bool
    smooth: bool
    offending_node: int | None


def _decision_split(circuit, i):
    """Decision form of Or node i: (var, pos_rest, neg_rest) or None.

    pos_rest/neg_rest are the child's conjuncts besides the decision
    literal (a bare literal child yields ()), or None when that polarity
    is absent.
    """
    dvar = circuit.lits[i]
    if dvar == 0:
        return None
    sides = {1: None, -1: None}
    for c in circuit.children[i]:
        kind = circuit.kinds[c]
        if kind == N_LIT and abs(circuit.lits[c]) == dvar:
            pol, rest = (1 if circuit.lits[c] > 0 else -1), ()
        elif kind == N_AND:
            hits = [g for g in circuit.children[c]
                    if circuit.kinds[g] == N_LIT and abs(circuit.lits[g]) == dvar]
            if len(hits) != 1:
                return None
            pol = 1 if circuit.lits[hits[0]] > 0 else -1
            rest = tuple(g for g in circuit.children[c] if g != hits[0])
        else:
            return None
        if sides[pol] is not None:
            return None
        sides[pol] = rest
    return (dvar, sides[1], sides[-1])


def check_structure(circuit):
    """Check decomposability, decision-form determinism, and smoothness."""
    var_sets = circuit.var_sets
    offending = None
    decomposable = True
    deterministic = True
    smooth_flag = True
    first_unsmooth = None
    for i in range(len(circuit)):
        kind = circuit.kinds[i]
        if kind == N_AND:
            total = sum(len(var_sets[c]) for c in circuit.children[i])
            if total != len(var_sets[i]):
                decomposable = False
                if offending is None:
                    offending = i
        elif kind == N_OR:
            if _decision_split(circuit, i) is None:
                deterministic = False
                if offending is None:
                    offending = i
            first = var_sets[circuit.children[i][0]]
            if any(var_sets[c] != first for c in circuit.children[i][1:]):
                smooth_flag = False
                if first_unsmooth is None:
                    first_unsmooth = i
    if offending is None and not smooth_flag:
        offending = first_unsmooth
    return StructureReport(decomposable, deterministic, smooth_flag, offending)


def smooth(circuit):
    """Pad Or children with (x or not x) gadgets until var sets match.

    Preserves the function and, for deterministic inputs, determinism;
    the gadgets themselves are decision nodes.
    """
    b = CircuitBuilder(circuit.num_features)
    mapped = [0] * len(circuit)
    gadgets = {}

    def gadget(v):
        if v not in gadgets:
            gadgets[v] = b.disj((b.literal(v), b.literal(-v)), decision_var=v)
        return gadgets[v]

    for i in range(len(circuit)):
        kind = circuit.kinds[i]
        if kind == N_FALSE:
            mapped[i] = b.false()
        elif kind == N_TRUE:
            mapped[i] = b.true()
        elif kind == N_LIT:
            mapped[i] = b.literal(circuit.lits[i])
        elif kind == N_AND:
            mapped[i] = b._add(N_AND, 0, tuple(mapped[c] for c in circuit.children[i]))
        else:
            full = circuit.var_sets[i]
            new_children = []
            for c in circuit.children[i]:
                missing = full - circuit.var_sets[c]
                if missing:
                    parts = (mapped[c],) + tuple(gadget(v) for v in sorted(missing))
                    new_children.append(b._add(N_AND, 0, parts))
                else:
                    new_children.append(mapped[c])
            mapped[i] = b._add(N_OR, circuit.lits[i], tuple(new_children))
    return b.build(mapped[circuit.root])


def parse_c2d(text):
    """Parse c2d's .nnf format.

    Header "nnf N E V", then one node per line in topological order:
    "L <signed-literal>", "A <k> <ids...>", "O <decision-var> <k>
    <ids...>". "A 0" is true, "O <j> 0" is false. Node ids are line
    order starting at 0; the root is the last node.
    """
    kinds, lits, children = [], [], []
    header = None
    edges = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        if header is None:
            if tokens[0] != "nnf" or len(tokens) != 4:
                raise ParseError("expected header 'nnf N E V'", lineno)
            try:
                header = tuple(int(t) for t in tokens[1:])
            except ValueError:
                raise ParseError("header counts must be integers", lineno) from None
            if any(x < 0 for x in header):
                raise ParseError("header counts must be nonnegative", lineno)
            continue
        tag = tokens[0]
        idx = len(kinds)
        try:
            args = [int(t) for t in tokens[1:]]
        except ValueError:
            raise ParseError("malformed integer in node line", lineno) from None
        if tag == "L":
            if len(args) != 1:
                raise ParseError("literal line takes one argument", lineno)
            lit = args[0]
            if lit == 0 or abs(lit) > header[2]:
                raise ParseError("literal %d out of range" % lit, lineno)
            kinds.append(N_LIT)
            lits.append(lit)
            children.append(())
        elif tag in ("A", "O"):
            if tag == "A":
                if not args:
                    raise ParseError("and line needs a child count", lineno)
                dvar, k, ids = 0, args[0], args[1:]
            else:
                if len(args) < 2:
                    raise ParseError("or line needs a decision variable and child count", lineno)
                dvar, k, ids = args[0], args[1], args[2:]
                if dvar < 0 or dvar > header[2]:
                    raise ParseError("decision variable %d out of range" % dvar, lineno)
            if k != len(ids):
                raise ParseError("child count %d does not match %d ids" % (k, len(ids)), lineno)
            for c in ids:
                if not 0 <= c < idx:
                    raise ParseError("child %d is not an earlier node" % c, lineno)
            edges += len(ids)
            if k == 0:
                kinds.append(N_TRUE if tag == "A" else N_FALSE)
                lits.append(0)
                children.append(())
            else:
                kinds.append(N_AND if tag == "A" else N_OR)
                lits.append(dvar)
                children.append(tuple(ids))
        else:
            raise ParseError("unknown node tag %r" % tag, lineno)
    if header is None:
        raise ParseError("missing 'nnf' header")
    if len(kinds) != header[0]:
        raise ParseError("header declares %d nodes, found %d" % (header[0], len(kinds)))
    if edges != header[1]:
        raise ParseError("header declares %d edges, found %d" % (header[1], edges))
    if not kinds:
        raise ParseError("circuit has no nodes")
    return Circuit(kinds, lits, children, len(kinds) - 1, header[2])


def serialize_c2d(circuit):
    """Emit the c2d .nnf text for a circuit (Unix newlines)."""
    lines = []
    edges = sum(len(ch) for ch in circuit.children)
    lines.append("nnf %d %d %d" % (len(circuit), edges, circuit.num_features))
    for i in range(len(circuit)):
        kind = circuit.kinds[i]
        if kind == N_TRUE:
            lines.append("A 0")
        elif kind == N_FALSE:
            lines.append("O 0 0")
        elif kind == N_LIT:
            lines.append("L %d" % circuit.lits[i])
        elif kind == N_AND:
            ch = circuit.children[i]
            lines.append("A %d %s" % (len(ch), " ".join(map(str, ch))))
        else:
            ch = circuit.children[i]
            lines.append("O %d %d %s" % (circuit.lits[i], len(ch), " ".join(map(str, ch))))
    return "\n".join(lines) + "\n"


def parse_sdd(text, num_features):
    """Parse the UCLA .sdd format into an Or-of-And circuit.

    Lines: "sdd <count>" header, "L <id> <vtree> <literal>", "T <id>",
    "F <id>", "D <id> <vtree> <k> <prime> <sub> ...". Each decomposition
    element becomes And(prime, sub) under an Or; vtree ids are
    discarded. The root is the last node defined.
    """
    b = CircuitBuilder(num_features)
    by_id = {}
    last = None
    saw_header = False

    def resolve(ref, lineno):
        if ref not in by_id:
            raise ParseError("reference to undefined sdd node %d" % ref, lineno)
        return by_id[ref]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        tag = tokens[0]
        if tag == "sdd":
            if saw_header:
                raise ParseError("duplicate sdd header", lineno)
            if len(tokens) != 2 or not tokens[1].lstrip("-").isdigit():
                raise ParseError("expected header 'sdd <count>'", lineno)
            saw_header = True
            continue
        if not saw_header:
            raise ParseError("missing 'sdd' header", lineno)
        try:
            args = [int(t) for t in tokens[1:]]
        except ValueError:
            raise ParseError("malformed integer in sdd line", lineno) from None
        if tag in ("T", "F"):
            if len(args) != 1:
                raise ParseError("%s line takes one id" % tag, lineno)
            sid = args[0]
            node = b.true() if tag == "T" else b.false()
        elif tag == "L":
            if len(args) != 3:
                raise ParseError("literal line takes id, vtree id, literal", lineno)
            sid, lit = args[0], args[2]
            if lit == 0 or abs(lit) > num_features:
                raise ParseError("literal %d out of range" % lit, lineno)
            node = b.literal(lit)
        elif tag == "D":
            if len(args) < 3:
                raise ParseError("decomposition line too short", lineno)
            sid, k, pairs = args[0], args[2], args[3:]
            if k < 1 or len(pairs) != 2 * k:
                raise ParseError("expected %d prime/sub pairs" % k, lineno)
            elements = []
            primes = []
            for j in range(k):
                p = resolve(pairs[2 * j], lineno)
                s = resolve(pairs[2 * j + 1], lineno)
                primes.append(p)
                elements.append(b._add(N_AND, 0, (p, s)))
            # Literal primes on one variable with distinct polarities make
            # the Or a decision node.
            prime_lits = [b.lits[p] for p in primes if b.kinds[p] == N_LIT]
            dvar = 0
            if len(prime_lits) == len(primes):
                if len({abs(l) for l in prime_lits}) == 1 and len(set(prime_lits)) == len(prime_lits):
                    dvar = abs(prime_lits[0])
            node = b._add(N_OR, dvar, tuple(elements))
        else:
            raise ParseError("unknown sdd line tag %r" % tag, lineno)
        if sid in by_id:
            raise ParseError("duplicate sdd node id %d" % sid, lineno)
        by_id[sid] = node
        last = node
    if last is None:
        raise ParseError("sdd file defines no nodes")
    return b.build(last)


def from_decision_tree(tree, num_features=None):
    """Compile a read-once decision tree (JSON dicts) to a decision circuit.

    Schema: {"leaf": 0 or 1} or {"var": i, "lo": subtree, "hi": subtree}
    with lo the var=0 branch. Each internal node maps to
    Or(And(not x, lo), And(x, hi)) with decision variable x. Repeating a
    variable along a path is rejected.
    """
    max_var = _max_tree_var(tree)
    if num_features is None:
        num_features = max_var
    elif max_var > num_features:
        raise ValueError("tree tests variable %d beyond num_features=%d"
                         % (max_var, num_features))
    b = CircuitBuilder(num_features)

    def walk(node, path):
        if not isinstance(node, dict):
            raise ValueError("tree nodes must be objects, got %r" % (node,))
        if "leaf" in node:
            if node["leaf"] not in (0, 1):
                raise ValueError("leaf must be 0 or 1, got %r" % (node["leaf"],))
            return b.true() if node["leaf"] else b.false()
        if "var" not in node or "lo" not in node or "hi" not in node:
            raise ValueError("internal nodes need var, lo, hi")
        v = node["var"]
        if not isinstance(v, int) or v < 1:
            raise ValueError("var must be a positive integer, got %r" % (v,))
        if v in path:
            raise ValueError("variable %d repeats along a path" % v)
        path = path | {v}
        lo = walk(node["lo"], path)
        hi = walk(node["hi"], path)
        lo_arm = b._add(N_AND, 0, (b.literal(-v), lo))
        hi_arm = b._add(N_AND, 0, (b.literal(v), hi))
        return b._add(N_OR, v, (lo_arm, hi_arm))

    return b.build(walk(tree, frozenset()))


def _max_tree_var(tree):
    if isinstance(tree, dict) and "var" in tree:
        v = tree["var"] if isinstance(tree["var"], int) else 0
        return max(v, _max_tree_var(tree.get("lo")), _max_tree_var(tree.get("hi")))
    return 0
