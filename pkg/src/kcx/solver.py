"""Complete SAT oracle for the hitting-set formulas driving enumeration.

The builtin solver is DPLL with unit propagation. Its decision policy
is fixed (branch on the highest-index unassigned variable, assign true
first) so model sequences, and therefore enumeration traces, are
reproducible run to run. An external solver speaking DIMACS on files
can be substituted; both back ends expose add_clause/solve/reset.
"""

import subprocess
import tempfile
import os


class CnfFormula:
    """Clause set over variables 1..num_vars."""

    def __init__(self, num_vars):
        if num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        self.num_vars = num_vars
        self.clauses = []

    def add_clause(self, lits):
        clause = []
        for lit in lits:
            if not isinstance(lit, int) or lit == 0 or abs(lit) > self.num_vars:
                raise ValueError("literal %r out of range" % (lit,))
            clause.append(lit)
        self.clauses.append(tuple(clause))

    def to_dimacs(self):
        lines = ["p cnf %d %d" % (self.num_vars, len(self.clauses))]
        for cl in self.clauses:
            lines.append(" ".join(map(str, cl)) + " 0")
        return "\n".join(lines) + "\n"


def solve(formula, branch="highest"):
    """Complete search; returns a model as a tuple of bools, or None.

    The model indexes variable i at position i-1. branch picks the
    decision variable ("highest" or "lowest" index); the first tried
    phase is always true.
    """
    if branch not in ("highest", "lowest"):
        raise ValueError("branch must be 'highest' or 'lowest'")
    n = formula.num_vars
    clauses = [tuple(c) for c in formula.clauses]
    assign = [0] * (n + 1)
    trail = []

    def propagate():
        changed = True
        while changed:
            changed = False
            for cl in clauses:
                sat = False
                unassigned = 0
                last = 0
                for lit in cl:
                    a = assign[lit] if lit > 0 else assign[-lit]
                    if a == 0:
                        unassigned += 1
                        last = lit
                    elif (a > 0) == (lit > 0):
                        sat = True
                        break
                if sat or unassigned > 1:
                    continue
                if unassigned == 0:
                    return False
                v = abs(last)
                assign[v] = 1 if last > 0 else -1
                trail.append(v)
                changed = True
        return True

    def undo_to(mark):
        while len(trail) > mark:
            assign[trail.pop()] = 0

    def search():
        mark = len(trail)
        if not propagate():
            undo_to(mark)
            return False
        v = 0
        order = range(n, 0, -1) if branch == "highest" else range(1, n + 1)
        for cand in order:
            if assign[cand] == 0:
                v = cand
                break
        if v == 0:
            return True
        for phase in (1, -1):
            inner = len(trail)
            assign[v] = phase
            trail.append(v)
            if search():
                return True
            undo_to(inner)
        undo_to(mark)
        return False

    if search():
        return tuple(assign[v] > 0 for v in range(1, n + 1))
    return None


class DpllOracle:
    """Builtin incremental oracle: a CnfFormula plus the DPLL search."""

    def __init__(self, num_vars, branch="highest"):
        self.formula = CnfFormula(num_vars)
        self.branch = branch

    @property
    def num_vars(self):
        return self.formula.num_vars

    def add_clause(self, lits):
        self.formula.add_clause(lits)

    def solve(self):
        return solve(self.formula, self.branch)

    def reset(self):
        self.formula = CnfFormula(self.formula.num_vars)


class DimacsOracle:
    """External solver invoked per solve call on a DIMACS file.

    Expects SAT-competition output on stdout: an "s SATISFIABLE" or
    "s UNSATISFIABLE" status line and, when satisfiable, "v" lines with
    a 0-terminated model. Variables missing from the model default to
    true.
    """

    def __init__(self, num_vars, path):
        self.formula = CnfFormula(num_vars)
        self.path = path

    @property
    def num_vars(self):
        return self.formula.num_vars

    def add_clause(self, lits):
        self.formula.add_clause(lits)

    def reset(self):
        self.formula = CnfFormula(self.formula.num_vars)

    def solve(self):
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as handle:
            handle.write(self.formula.to_dimacs())
            name = handle.name
        try:
            proc = subprocess.run([self.path, name], capture_output=True, text=True)
        finally:
            os.unlink(name)
        status = None
        lits = []
        for line in proc.stdout.splitlines():
            if line.startswith("s "):
                status = line.split(None, 1)[1].strip()
            elif line.startswith("v"):
                lits.extend(int(t) for t in line.split()[1:])
        if status == "UNSATISFIABLE":
            return None
        if status != "SATISFIABLE":
            raise RuntimeError("solver %s produced no status line" % self.path)
        model = [True] * self.formula.num_vars
        for lit in lits:
            if lit == 0:
                break
            if abs(lit) <= self.formula.num_vars:
                model[abs(lit) - 1] = lit > 0
        return tuple(model)


def make_oracle(num_vars, backend="builtin"):
    """Build an oracle from a backend string: 'builtin' or 'dimacs:<path>'."""
    if backend in (None, "", "builtin"):
        return DpllOracle(num_vars)
    if backend.startswith("dimacs:"):
        path = backend[len("dimacs:"):]
        if not path:
            raise ValueError("dimacs backend needs a solver path")
        return DimacsOracle(num_vars, path)
    raise ValueError("unknown oracle backend %r" % (backend,))
