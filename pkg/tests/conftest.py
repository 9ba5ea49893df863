import os
import stat

import pytest

from kcx.circuit import parse_c2d

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA, name)


def read_circuit(name):
    with open(data_path(name)) as handle:
        return parse_c2d(handle.read())


def all_points(m):
    return [tuple((idx >> (m - 1 - b)) & 1 for b in range(m))
            for idx in range(1 << m)]


def parity_tree(vars_, acc=0):
    """Full decision tree computing the parity of the listed features."""
    if not vars_:
        return {"leaf": acc}
    return {"var": vars_[0],
            "lo": parity_tree(vars_[1:], acc),
            "hi": parity_tree(vars_[1:], acc ^ 1)}


STUB_SOLVER = '''#!/usr/bin/env python3
import sys

from kcx.solver import CnfFormula, solve

formula = None
for line in open(sys.argv[1]):
    parts = line.split()
    if not parts or parts[0] == "c":
        continue
    if parts[0] == "p":
        formula = CnfFormula(int(parts[2]))
    else:
        formula = formula or CnfFormula(0)
        formula.add_clause([int(t) for t in parts[:-1]])
model = solve(formula if formula is not None else CnfFormula(0))
if model is None:
    print("s UNSATISFIABLE")
else:
    print("s SATISFIABLE")
    lits = " ".join(str(i + 1) if v else str(-(i + 1)) for i, v in enumerate(model))
    print("v %s 0" % lits)
'''


@pytest.fixture
def running():
    return read_circuit("running.nnf")


@pytest.fixture
def complement():
    return read_circuit("complement.nnf")


@pytest.fixture
def stub_solver(tmp_path):
    path = tmp_path / "stubsat"
    path.write_text(STUB_SOLVER)
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return str(path)
