"""Command-line driver: load a classifier, explain, enumerate, verify, report.

Commands operate on one model file (--model) in one of four formats
(--format nnf|sdd|tree|gdf) and, where needed, one instance given
inline (--instance 0,1,0,1) or as a CSV row (--csv data.csv --row 3).
Output is one JSON object per line; --pretty switches to a human
rendering. Exit codes: 0 success, 1 verification mismatch, 2 usage or
parse error, 3 structural rejection, 4 verification bound exceeded.
"""

import argparse
import json
import os
import random
import sys
import time

from .bruteforce import brute_force_families, load_instances_csv
from .circuit import ParseError, check_structure, from_decision_tree, parse_c2d, parse_sdd
from .explain import (Explanation, classify, enumerate_explanations,
                      explanation_record, one_axp, one_cxp)
from .gdf import gdf_classify, gdf_enumerate, gdf_one_axp, gdf_one_cxp, gdf_predict, load_gdf, validate_gdf
from .queries import evaluate
from .solver import make_oracle

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_STRUCTURE = 3
EXIT_BOUND = 4

VERIFY_MAX_FEATURES = 12
STATS_SWEEP_MAX_FEATURES = 12

# Test hook: when set, verify drops the first enumerated explanation
# before comparing, to exercise the mismatch path.
FAULT_ENV = "KCX_VERIFY_FAULT"
ORACLE_ENV = "KCX_ORACLE"


class CliError(Exception):
    """Carries the process exit code alongside the message."""

    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


class Model:
    """A loaded classifier: either one circuit or a gdf."""

    def __init__(self, fmt, circuit=None, gdf=None):
        self.format = fmt
        self.circuit = circuit
        self.gdf = gdf

    @property
    def is_gdf(self):
        return self.gdf is not None

    @property
    def num_features(self):
        target = self.gdf if self.is_gdf else self.circuit
        return target.num_features

    @property
    def nodes(self):
        if self.is_gdf:
            return sum(len(f) for f in self.gdf.functions)
        return len(self.circuit)

    def predict(self, point):
        if self.is_gdf:
            return gdf_predict(self.gdf, point)
        return evaluate(self.circuit, point)

    def label(self, klass):
        """User-facing class label; gdf predictions are label indices."""
        if self.is_gdf:
            return self.gdf.classes[klass]
        return klass

    def classify(self, point):
        if self.is_gdf:
            return gdf_classify(self.gdf, point)
        return classify(self.circuit, point)


def _read_text(path):
    try:
        with open(path) as handle:
            return handle.read()
    except OSError as exc:
        raise CliError("cannot read %s: %s" % (path, exc))


def load_model(args):
    fmt = args.format
    if fmt == "gdf":
        try:
            return Model(fmt, gdf=load_gdf(args.model))
        except (OSError, ValueError) as exc:
            raise CliError("bad gdf manifest: %s" % exc)
    text = _read_text(args.model)
    try:
        if fmt == "nnf":
            circuit = parse_c2d(text)
        elif fmt == "sdd":
            if args.num_features is None:
                raise CliError("--num-features is required for --format sdd")
            circuit = parse_sdd(text, args.num_features)
        else:
            tree = json.loads(text)
            circuit = from_decision_tree(tree, num_features=args.num_features)
    except CliError:
        raise
    except (ParseError, ValueError) as exc:
        raise CliError("bad model file: %s" % exc)
    if args.num_features is not None and circuit.num_features != args.num_features:
        raise CliError("model has %d features, --num-features says %d"
                       % (circuit.num_features, args.num_features))
    return Model(fmt, circuit=circuit)


def _structure_gate(model):
    """Refuse to explain over circuits whose queries would be unsound."""
    if model.is_gdf:
        for label, f in zip(model.gdf.classes, model.gdf.functions):
            if not check_structure(f).decomposable:
                raise CliError("circuit for class %r is not decomposable" % (label,),
                               EXIT_STRUCTURE)
    else:
        report = check_structure(model.circuit)
        if not report.decomposable:
            raise CliError("circuit is not decomposable (node %d)"
                           % report.offending_node, EXIT_STRUCTURE)
        if not report.decision_deterministic:
            raise CliError("circuit is not in decision form (node %d); "
                           "determinism cannot be certified"
                           % report.offending_node, EXIT_STRUCTURE)


def _parse_point(text, num_features):
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise CliError("--instance must be comma-separated 0/1 values")
    if any(v not in (0, 1) for v in values):
        raise CliError("--instance values must be 0 or 1")
    if len(values) != num_features:
        raise CliError("instance has %d values, model has %d features"
                       % (len(values), num_features))
    return tuple(values)


def _csv_rows(args, model):
    try:
        names, points, classes = load_instances_csv(args.csv)
    except (OSError, ValueError) as exc:
        raise CliError("bad csv file: %s" % exc)
    if len(names) != model.num_features:
        raise CliError("csv has %d feature columns, model has %d"
                       % (len(names), model.num_features))
    return points, classes


def _instance_from_row(model, point, declared):
    instance = model.classify(point)
    if declared is not None and declared != model.label(instance.predicted_class):
        raise CliError("csv labels the row %r but the model predicts %r"
                       % (declared, model.label(instance.predicted_class)))
    return instance


def resolve_instance(args, model):
    if args.instance is not None and args.csv is not None:
        raise CliError("--instance and --csv are mutually exclusive")
    if args.instance is not None:
        return model.classify(_parse_point(args.instance, model.num_features))
    if args.csv is not None:
        points, classes = _csv_rows(args, model)
        row = args.row if args.row is not None else 0
        if not 0 <= row < len(points):
            raise CliError("--row %d out of range; csv has %d data rows"
                           % (row, len(points)))
        declared = classes[row] if classes is not None else None
        return _instance_from_row(model, points[row], declared)
    raise CliError("provide an instance with --instance or --csv/--row")


def resolve_order(args, num_features):
    if args.order is not None and args.seed is not None:
        raise CliError("--order and --seed are mutually exclusive")
    if args.order is not None:
        try:
            order = [int(p) for p in args.order.split(",")]
        except ValueError:
            raise CliError("--order must be comma-separated feature indices")
        if sorted(order) != list(range(1, num_features + 1)):
            raise CliError("--order must be a permutation of 1..%d" % num_features)
        return order
    if args.seed is not None:
        order = list(range(1, num_features + 1))
        random.Random(args.seed).shuffle(order)
        return order
    return None


def _oracle(num_features):
    try:
        return make_oracle(num_features, os.environ.get(ORACLE_ENV))
    except ValueError as exc:
        raise CliError(str(exc))


class Output:
    def __init__(self, args):
        self.pretty = args.pretty
        self.path = args.output
        self._handle = None

    def __enter__(self):
        self._handle = open(self.path, "w") if self.path else sys.stdout
        return self

    def __exit__(self, *exc):
        if self.path and self._handle is not None:
            self._handle.close()
        return False

    def emit(self, obj, pretty_text=None):
        if self.pretty and pretty_text is not None:
            print(pretty_text, file=self._handle)
        else:
            print(json.dumps(obj, sort_keys=True), file=self._handle)


def _record(model, explanation, instance):
    rec = explanation_record(explanation, instance)
    rec["class"] = model.label(instance.predicted_class)
    return rec


def _pretty_explanation(rec):
    return "%s %s" % (rec["kind"].upper(), sorted(rec["features"]))


def cmd_check(args):
    model = load_model(args)
    if model.is_gdf:
        reports = [check_structure(f) for f in model.gdf.functions]
        obj = {
            "format": "gdf",
            "classes": list(model.gdf.classes),
            "num_features": model.num_features,
            "nodes": model.nodes,
            "functions": [
                {"class": label,
                 "nodes": len(f),
                 "decomposable": rep.decomposable,
                 "decision_deterministic": rep.decision_deterministic,
                 "smooth": rep.smooth,
                 "offending_node": rep.offending_node}
                for label, f, rep in zip(model.gdf.classes, model.gdf.functions, reports)
            ],
        }
        ok = all(rep.decomposable for rep in reports)
        if model.num_features <= VERIFY_MAX_FEATURES:
            val = validate_gdf(model.gdf)
            obj["binding"] = val.binding
            obj["non_overlapping"] = val.non_overlapping
            if val.counterexample is not None:
                obj["counterexample"] = list(val.counterexample)
            ok = ok and val.binding and val.non_overlapping
        lines = ["gdf with %d classes over %d features, %d nodes"
                 % (len(model.gdf.classes), model.num_features, model.nodes)]
        for entry in obj["functions"]:
            lines.append("  class %r: %d nodes, decomposable=%s"
                         % (entry["class"], entry["nodes"], entry["decomposable"]))
        if "binding" in obj:
            lines.append("  binding=%s non_overlapping=%s"
                         % (obj["binding"], obj["non_overlapping"]))
    else:
        rep = check_structure(model.circuit)
        obj = {
            "format": model.format,
            "num_features": model.num_features,
            "nodes": model.nodes,
            "decomposable": rep.decomposable,
            "decision_deterministic": rep.decision_deterministic,
            "smooth": rep.smooth,
            "offending_node": rep.offending_node,
        }
        ok = rep.decomposable and rep.decision_deterministic
        lines = ["%d nodes over %d features" % (model.nodes, model.num_features),
                 "decomposable: %s" % rep.decomposable,
                 "decision form: %s" % rep.decision_deterministic,
                 "smooth: %s" % rep.smooth]
        if rep.offending_node is not None:
            lines.append("first offending node: %d" % rep.offending_node)
    with Output(args) as out:
        out.emit(obj, "\n".join(lines))
    return EXIT_OK if ok else EXIT_STRUCTURE


def _single_explanation(args, kind):
    model = load_model(args)
    _structure_gate(model)
    instance = resolve_instance(args, model)
    order = resolve_order(args, model.num_features)
    if model.is_gdf:
        fn = gdf_one_axp if kind == "axp" else gdf_one_cxp
        features = fn(model.gdf, instance, order=order)
    else:
        fn = one_axp if kind == "axp" else one_cxp
        features = fn(model.circuit, instance, order=order)
    rec = _record(model, Explanation(kind, frozenset(features)), instance)
    with Output(args) as out:
        out.emit(rec, _pretty_explanation(rec))
    return EXIT_OK


def cmd_axp(args):
    return _single_explanation(args, "axp")


def cmd_cxp(args):
    return _single_explanation(args, "cxp")


def _run_enumeration(model, instance, order, limit=None):
    oracle = _oracle(model.num_features)
    if model.is_gdf:
        return gdf_enumerate(model.gdf, instance, oracle=oracle, order=order, limit=limit)
    return enumerate_explanations(model.circuit, instance, oracle=oracle,
                                  order=order, limit=limit)


def cmd_enumerate(args):
    model = load_model(args)
    _structure_gate(model)
    instance = resolve_instance(args, model)
    order = resolve_order(args, model.num_features)
    explanations, state = _run_enumeration(model, instance, order, limit=args.limit)
    axps = sum(1 for e in explanations if e.kind == "axp")
    cxps = len(explanations) - axps
    summary = {"axps": axps, "cxps": cxps, "oracle_calls": state.oracle_calls}
    with Output(args) as out:
        for e in explanations:
            rec = _record(model, e, instance)
            out.emit(rec, _pretty_explanation(rec))
        out.emit(summary, "%d AXps, %d CXps, %d oracle calls"
                 % (axps, cxps, state.oracle_calls))
    return EXIT_OK


def _family_diff(name, engine, oracle):
    return {
        "missing_" + name: sorted(sorted(s) for s in oracle - engine),
        "extra_" + name: sorted(sorted(s) for s in engine - oracle),
    }


def cmd_verify(args):
    model = load_model(args)
    _structure_gate(model)
    if model.num_features > VERIFY_MAX_FEATURES:
        raise CliError("verify is exhaustive and limited to %d features; "
                       "model has %d" % (VERIFY_MAX_FEATURES, model.num_features),
                       EXIT_BOUND)
    instance = resolve_instance(args, model)
    order = resolve_order(args, model.num_features)
    explanations, state = _run_enumeration(model, instance, order)
    if os.environ.get(FAULT_ENV):
        explanations = explanations[1:]
    engine_axps = {frozenset(e.features) for e in explanations if e.kind == "axp"}
    engine_cxps = {frozenset(e.features) for e in explanations if e.kind == "cxp"}
    report = brute_force_families(model.predict, model.num_features,
                                  instance.point, instance.predicted_class)
    oracle_axps = {frozenset(s) for s in report.axps}
    oracle_cxps = {frozenset(s) for s in report.cxps}
    ok = engine_axps == oracle_axps and engine_cxps == oracle_cxps
    obj = {
        "verified": ok,
        "axps": len(oracle_axps),
        "cxps": len(oracle_cxps),
        "oracle_calls": state.oracle_calls,
    }
    if ok:
        text = "families match: %d AXps, %d CXps" % (len(oracle_axps), len(oracle_cxps))
    else:
        obj.update(_family_diff("axps", engine_axps, oracle_axps))
        obj.update(_family_diff("cxps", engine_cxps, oracle_cxps))
        text = "MISMATCH: " + json.dumps(
            {k: v for k, v in obj.items() if k.startswith(("missing", "extra"))},
            sort_keys=True)
    with Output(args) as out:
        out.emit(obj, text)
    return EXIT_OK if ok else EXIT_MISMATCH


def _stats_instances(args, model):
    if args.instance is not None:
        return [resolve_instance(args, model)]
    if args.csv is not None:
        points, classes = _csv_rows(args, model)
        if args.row is not None:
            return [resolve_instance(args, model)]
        return [_instance_from_row(model, p,
                                   classes[i] if classes is not None else None)
                for i, p in enumerate(points)]
    m = model.num_features
    if m > STATS_SWEEP_MAX_FEATURES:
        raise CliError("full-space stats limited to %d features; model has %d "
                       "(pass --instance or --csv)" % (STATS_SWEEP_MAX_FEATURES, m))
    return [model.classify(tuple((idx >> (m - j)) & 1 for j in range(1, m + 1)))
            for idx in range(1 << m)]


def cmd_stats(args):
    model = load_model(args)
    _structure_gate(model)
    order = resolve_order(args, model.num_features)
    instances = _stats_instances(args, model)
    per_instance = []
    total_explanations = 0
    total_length = 0
    total_calls = 0
    started = time.monotonic()
    for instance in instances:
        explanations, state = _run_enumeration(model, instance, order)
        axps = sum(1 for e in explanations if e.kind == "axp")
        cxps = len(explanations) - axps
        per_instance.append({
            "instance": list(instance.point),
            "class": model.label(instance.predicted_class),
            "axps": axps,
            "cxps": cxps,
        })
        total_explanations += len(explanations)
        total_length += sum(len(e.features) for e in explanations)
        total_calls += state.oracle_calls
    elapsed = time.monotonic() - started
    n = len(instances)
    obj = {
        "nodes": model.nodes,
        "num_features": model.num_features,
        "instances": n,
        "per_instance": per_instance,
        "total_explanations": total_explanations,
        "explanations_per_instance": total_explanations / n,
        "average_explanation_length":
            total_length / total_explanations if total_explanations else 0.0,
        "oracle_calls": total_calls,
        "enumeration_seconds": elapsed,
    }
    lines = ["%d nodes over %d features" % (model.nodes, model.num_features),
             "%d instances, %d explanations (%.3f per instance)"
             % (n, total_explanations, obj["explanations_per_instance"]),
             "average explanation length: %.3f" % obj["average_explanation_length"],
             "oracle calls: %d" % total_calls,
             "enumeration time: %.3f s" % elapsed]
    with Output(args) as out:
        out.emit(obj, "\n".join(lines))
    return EXIT_OK


def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--model", required=True, help="path to the model file")
    shared.add_argument("--format", choices=["nnf", "sdd", "tree", "gdf"],
                        default="nnf", help="model file format (default nnf)")
    shared.add_argument("--num-features", type=int,
                        help="feature count (required for sdd, optional for tree)")
    shared.add_argument("--instance", help="inline instance, e.g. 0,1,0,1")
    shared.add_argument("--csv", help="CSV file of instances")
    shared.add_argument("--row", type=int, help="0-based data row in --csv")
    shared.add_argument("--order", help="feature order, e.g. 4,3,2,1")
    shared.add_argument("--seed", type=int,
                        help="seed for a shuffled feature order")
    shared.add_argument("--limit", type=int,
                        help="stop enumeration after this many explanations")
    shared.add_argument("--output", help="write output here instead of stdout")
    shared.add_argument("--pretty", action="store_true",
                        help="human-readable output instead of JSON lines")

    parser = argparse.ArgumentParser(
        prog="kcx",
        description="Explain d-DNNF classifiers: abductive and contrastive "
                    "explanations via polynomial-time circuit queries.",
        epilog="Exit codes: 0 ok, 1 verify mismatch, 2 usage or parse error, "
               "3 structural rejection, 4 verify bound exceeded. "
               "Set %s=dimacs:<solver> to use an external SAT solver." % ORACLE_ENV)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[shared],
                   help="parse a model and report its structural properties").set_defaults(func=cmd_check)
    sub.add_parser("axp", parents=[shared],
                   help="one subset-minimal abductive explanation").set_defaults(func=cmd_axp)
    sub.add_parser("cxp", parents=[shared],
                   help="one subset-minimal contrastive explanation").set_defaults(func=cmd_cxp)
    sub.add_parser("enumerate", parents=[shared],
                   help="enumerate all explanations of an instance").set_defaults(func=cmd_enumerate)
    sub.add_parser("verify", parents=[shared],
                   help="cross-check enumeration against exhaustive search").set_defaults(func=cmd_verify)
    sub.add_parser("stats", parents=[shared],
                   help="explanation counts, lengths and timing over instances").set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
