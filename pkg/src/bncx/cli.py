"""Command-line front end: ``bncx compile|explain|contrast|check|bench``.

Exit codes: 0 success, 1 a check failed, 2 bad input (parse, names, spec),
3 a cap or the time budget was exceeded, 4 the instance does not satisfy
the circuit.
"""

from __future__ import annotations

import argparse
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import explain as ex
from .bif import parse_bif
from .compiler import compile_class_formula, compile_complement
from .errors import BncxError, CapExceeded, CircuitFormatError, StructuralError, UsageError
from .ftree import extract_ftree
from .jointree import compile_jointree
from .network import ClassifierSpec, average_posterior, classify
from .nnf import NnfStore, check_and_decomposable, check_or_decomposable, read_circuit, write_circuit
from .verify import check_class_formula

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_LIMIT, EXIT_NOT_POSITIVE = 0, 1, 2, 3, 4


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


# --------------------------------------------------------------------------
# problems


@dataclass
class Problem:
    label: str
    spec: ClassifierSpec

    def class_index(self, name: str | None) -> int:
        var = self.spec.net.variables[self.spec.target]
        if name is None:
            raise InputError("a class is required (--class)")
        if name in var.states:
            return var.states.index(name)
        try:
            i = int(name)
        except ValueError:
            raise InputError(f"unknown class {name!r} of {var.name}") from None
        if not 0 <= i < var.card:
            raise InputError(f"class index {i} out of range")
        return i


def _load_net(source: str, seed: int):
    from . import fixtures

    if source.startswith("fixture:"):
        kind = source.split(":", 1)[1]
        if kind == "hub":
            return fixtures.hub_net(seed)
        if kind == "disease":
            return fixtures.disease_net()
        if kind == "random":
            return fixtures.random_bnc(seed).net
        raise InputError(f"unknown fixture {kind!r} (hub, disease, random)")
    path = Path(source)
    if not path.exists():
        raise InputError(f"no such file: {source}")
    net, diags = parse_bif(path.read_bytes())
    for d in diags:
        print(f"{path}:{d.line}: {d.severity}: {d.message}", file=sys.stderr)
    if net is None:
        raise InputError(f"could not parse {source}")
    return net


def _problem(args) -> Problem:
    net = _load_net(args.network, args.seed)
    try:
        target = net.index(args.target)
        if args.all_leaves:
            features = [v for v in net.leaves() if v != target]
        elif args.features:
            features = [net.index(n) for n in args.features.split(",") if n]
        else:
            raise InputError("give --features or --all-leaves")
        spec = ClassifierSpec(net, target, tuple(features))
        if args.threshold is not None or args.threshold_avg:
            if net.variables[target].card != 2:
                raise InputError("threshold modes need a binary target")
            tc = args.threshold_class
            t = args.threshold if args.threshold is not None else average_posterior(spec, tc)
            if not 0.0 < t < 1.0:
                raise InputError(f"threshold {t} is not strictly between 0 and 1")
            spec = spec.with_threshold(t, tc)
    except StructuralError as exc:
        raise InputError(str(exc)) from None
    return Problem(f"{args.network}:{args.target}", spec)


def _ftree(spec: ClassifierSpec):
    jt = compile_jointree(spec.net, spec.features, spec.target)
    return extract_ftree(jt, spec)


def _problem_args(p: argparse.ArgumentParser):
    p.add_argument("network", help="BIF file, or fixture:hub|disease|random")
    p.add_argument("--target", required=True, help="target variable name")
    feats = p.add_mutually_exclusive_group()
    feats.add_argument("--features", help="comma-separated feature names")
    feats.add_argument("--all-leaves", action="store_true", help="use every leaf as a feature")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--argmax", action="store_true", help="most probable class (default)")
    mode.add_argument("--threshold", type=float, help="binary target: P(class|x) > T")
    mode.add_argument("--threshold-avg", action="store_true", help="threshold = average posterior")
    p.add_argument("--threshold-class", type=int, default=0, help="class the threshold applies to")
    p.add_argument("--seed", type=int, default=0, help="seed for fixture networks")
    p.add_argument("--timeout", type=float, default=300.0, help="seconds per compilation")


# --------------------------------------------------------------------------
# instances


def parse_instance(text: str, names: dict[str, tuple[int, tuple[str, ...]]]) -> dict[int, int]:
    """``VAR=state,VAR=state`` -> ``{var id: state index}``."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"expected VAR=state, got {part!r}")
        var, state = (s.strip() for s in part.split("=", 1))
        if var not in names:
            raise InputError(f"unknown variable {var!r}")
        vid, states = names[var]
        if state not in states:
            raise InputError(f"unknown state {state!r} of {var}")
        out[vid] = states.index(state)
    return out


def _store_names(store: NnfStore):
    return {n: (i, st) for i, (n, st) in enumerate(store.varmeta)}


def _net_names(net):
    return {v.name: (v.id, v.states) for v in net.variables}


# --------------------------------------------------------------------------
# commands


def cmd_compile(args) -> int:
    prob = _problem(args)
    i = prob.class_index(args.cls)
    ft = _ftree(prob.spec)
    comp = compile_class_formula(prob.spec, ft, i, timeout=args.timeout)
    text = write_circuit(comp.store, comp.root)
    stats = f"problem={prob.label} class={i} {comp.stats.record()}"
    if args.out:
        Path(args.out).write_text(text)
        print(stats)
    else:
        sys.stdout.write(text)
        print(stats, file=sys.stderr)
    return EXIT_OK


def _print_set(store, title, members, text):
    print(f"{title}: {len(members)}")
    for m in members:
        print(f"  {text(store, m)}")


def cmd_explain(args) -> int:
    try:
        store, root = read_circuit(Path(args.circuit).read_text())
    except OSError as exc:
        raise InputError(str(exc)) from None
    x = parse_instance(args.instance, _store_names(store))
    missing = set(store.mentioned(root)) - set(x)
    if missing:
        raise InputError("instance leaves " + ",".join(store.varmeta[v][0] for v in sorted(missing)) + " unassigned")
    wanted = [k for k in ("complete", "general", "sr", "nr", "gsr", "gnr") if getattr(args, k)]
    if not wanted:
        wanted = ["complete", "general", "sr", "nr", "gsr", "gnr"]
    from .nnf import evaluate, to_text

    if not evaluate(store, root, x):
        print("not a positive instance: the instance does not satisfy the circuit", file=sys.stderr)
        return EXIT_NOT_POSITIVE
    complete = ex.complete_reason(store, root, x)
    general = ex.general_reason(store, root, x)
    if "complete" in wanted:
        print(f"complete reason: {to_text(store, complete.root)}")
    if "general" in wanted:
        print(f"general reason: {to_text(store, general.root)}")
    if "sr" in wanted:
        _print_set(store, "sufficient reasons", ex.prime_implicants(store, complete.root), ex.term_text)
    if "nr" in wanted:
        _print_set(store, "necessary reasons", ex.prime_implicates(store, complete.root), ex.clause_text)
    if "gsr" in wanted:
        _print_set(store, "general sufficient reasons", ex.gsr(store, root, x), ex.term_text)
    if "gnr" in wanted:
        _print_set(store, "general necessary reasons", ex.gnr(store, root, x), ex.clause_text)
    return EXIT_OK


def cmd_contrast(args) -> int:
    prob = _problem(args)
    spec = prob.spec
    x = parse_instance(args.instance, _net_names(spec.net))
    if set(x) != set(spec.features):
        raise InputError("the instance must assign exactly the features")
    k = prob.class_index(args.to)
    i = classify(spec, x)
    if i == k:
        raise InputError(f"the instance is already in class {args.to}")
    ft = _ftree(spec)
    comp = compile_complement(spec, ft, k, timeout=args.timeout)
    clauses = ex.gnr(comp.store, comp.root, x)
    names = spec.net.variables[spec.target].states
    _print_set(comp.store, f"contrastive explanations ({names[i]} -> {names[k]})", clauses, ex.clause_text)
    return EXIT_OK


def cmd_check(args) -> int:
    prob = _problem(args)
    spec = prob.spec
    failed = False
    if args.circuit:
        store, root = read_circuit(Path(args.circuit).read_text())
        if [v.name for v in spec.net.variables] != [n for n, _ in store.varmeta]:
            raise InputError("circuit variables do not match the network")
        i = prob.class_index(args.cls)
        report = check_class_formula(spec, i, store, root, object_id=Path(args.circuit).name)
        print(report.record())
        return EXIT_OK if report.passed else EXIT_CHECK
    ft = _ftree(spec)
    classes = range(spec.num_classes) if args.cls is None else [prob.class_index(args.cls)]
    for i in classes:
        comp = compile_class_formula(spec, ft, i, timeout=args.timeout)
        report = check_class_formula(spec, i, comp.store, comp.root, object_id=f"{prob.label}:class{i}")
        ok_and, _ = check_and_decomposable(comp.store, comp.inner)
        ok_or, _ = check_or_decomposable(comp.store, comp.root)
        print(f"{report.record()} and_decomposable={ok_and} or_decomposable={ok_or} ties={comp.stats.ties}")
        failed |= not (report.passed and ok_and and ok_or)
    return EXIT_CHECK if failed else EXIT_OK


# bench ---------------------------------------------------------------------


def _bench_one(line: str) -> dict:
    parser = argparse.ArgumentParser(prog="manifest", add_help=False, exit_on_error=False)
    _problem_args(parser)
    start = time.perf_counter()
    row = {"problem": line, "status": "ok", "omega": "", "omega_T": "", "nodes": 0, "seconds": 0.0}
    try:
        args = parser.parse_args(shlex.split(line))
        prob = _problem(args)
        row["problem"] = prob.label
        deadline = time.monotonic() + args.timeout
        ft = _ftree(prob.spec)
        for i in range(prob.spec.num_classes):
            comp = compile_class_formula(prob.spec, ft, i, timeout=max(0.0, deadline - time.monotonic()))
            row["omega"], row["omega_T"] = comp.stats.omega, comp.stats.omega_T
            row["nodes"] += comp.stats.nodes
    except CapExceeded as exc:
        row["status"] = "timeout" if "time" in str(exc) else "cap"
    except (InputError, BncxError, argparse.ArgumentError, SystemExit) as exc:
        row["status"] = f"error:{type(exc).__name__}"
    row["seconds"] = time.perf_counter() - start
    return row


def cactus(rows: list[dict]) -> list[tuple[int, float, float]]:
    """``(rank, seconds, cumulative seconds)`` over solved problems, fastest first."""
    times = sorted(r["seconds"] for r in rows if r["status"] == "ok")
    out, total = [], 0.0
    for k, t in enumerate(times, 1):
        total += t
        out.append((k, t, total))
    return out


def cmd_bench(args) -> int:
    try:
        lines = [
            ln.strip() for ln in Path(args.manifest).read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
    except OSError as exc:
        raise InputError(str(exc)) from None
    if args.timeout is not None:
        lines = [f"{ln} --timeout {args.timeout}" for ln in lines]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_one, lines))
    else:
        rows = [_bench_one(ln) for ln in lines]
    for r in rows:
        print(" ".join(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
    print("# rank seconds cumulative")
    for k, t, total in cactus(rows):
        print(f"{k} {t:.6f} {total:.6f}")
    if any(r["status"].startswith("error") for r in rows):
        return EXIT_INPUT
    if any(r["status"] != "ok" for r in rows):
        return EXIT_LIMIT
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bncx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a class formula to an mvnnf circuit")
    _problem_args(p)
    p.add_argument("--class", dest="cls", required=True, help="class name or index")
    p.add_argument("--out", help="circuit output path (default: stdout)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("explain", help="explain a decision from a class-formula circuit")
    p.add_argument("circuit")
    p.add_argument("instance", help="VAR=state,VAR=state,...")
    for flag in ("complete", "general", "sr", "nr", "gsr", "gnr"):
        p.add_argument(f"--{flag}", action="store_true")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("contrast", help="why not class K? (general necessary reasons of not-K)")
    _problem_args(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--to", required=True, help="class to contrast with")
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("check", help="verify compiled (or given) circuits against the oracle")
    _problem_args(p)
    p.add_argument("--class", dest="cls", help="only this class")
    p.add_argument("--circuit", help="check this circuit file instead of compiling")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="run a manifest of problems")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timeout", type=float, default=None, help="override per-problem seconds")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CircuitFormatError, UsageError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
