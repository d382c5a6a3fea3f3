"""Command-line front end: solve, price, gen, bench, verify.

Thin adapters over the library; all interchange happens through the JSON
instance/solution/priced-outcome schemas and the bench CSV.  Exit codes:
0 success, 1 validation failure, 2 size-guard refusal, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import baseline, bench, gapdp, hungarian, pricing
from .core import (
    AdRef,
    GuardError,
    Instance,
    Matching,
    has_gap_rules,
    instance_to_dict,
    load_instance,
    matching_from_list,
    matching_to_list,
    validate_instance,
    welfare,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GUARD = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_json(obj, path) -> None:
    if path is None or path == "-":
        json.dump(obj, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _solution_dict(algo: str, inst: Instance, matching: Matching,
                   duals=None) -> dict:
    out = {
        "algo": algo,
        "welfare": welfare(inst, matching),
        "assignment": matching_to_list(matching),
        "duals": None,
    }
    if duals is not None:
        out["duals"] = {"u": [list(row) for row in duals.u], "p": list(duals.p)}
    return out


def _cmd_solve(args) -> int:
    inst = load_instance(args.infile)
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    algo = args.algo
    if algo == "adtypes":
        sol = hungarian.solve_adtypes(inst, trace=trace)
        out = _solution_dict(algo, inst, sol.matching, sol.duals)
    elif algo == "generic":
        sol = baseline.solve_generic_hungarian(inst)
        out = _solution_dict(algo, inst, sol.matching, sol.duals)
    elif algo == "greedy":
        out = _solution_dict(algo, inst, baseline.solve_greedy(inst))
    elif algo == "brute":
        out = _solution_dict(algo, inst, baseline.solve_bruteforce(inst))
    elif algo == "gapdp":
        out = _solution_dict(algo, inst, gapdp.solve_gap_dp(inst))
    elif algo == "two-type":
        out = _solution_dict(algo, inst, gapdp.solve_two_type_dp(inst))
    else:  # pragma: no cover - argparse restricts choices
        raise _UsageError(f"unknown algorithm {algo}")
    _write_json(out, args.out)
    return EXIT_OK


def _load_reserves(path) -> dict[AdRef, float]:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    entries = data["reserves"] if isinstance(data, dict) else data
    return {AdRef(e["type"], e["rank"]): float(e["reserve"]) for e in entries}


def _cmd_price(args) -> int:
    inst = load_instance(args.infile)
    reserves = _load_reserves(args.reserves)
    if args.mechanism == "vcg":
        outcome = pricing.vcg_outcome(inst)
    elif args.mechanism == "reserve":
        outcome = pricing.price_with_reserves(inst, reserves)
    elif args.mechanism == "myerson-greedy":
        outcome = pricing.myerson_greedy_outcome(inst, reserves)
    else:  # pragma: no cover
        raise _UsageError(f"unknown mechanism {args.mechanism}")
    _write_json(pricing.priced_outcome_to_dict(outcome), args.out)
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.family == "random":
        inst = bench.gen_random(bench.GenConfig(
            args.n, args.k, args.seed, args.values, args.discounts))
    elif args.family == "greedy-tight":
        inst = bench.gen_greedy_tight(args.epsilon)
    elif args.family == "mis":
        if not args.graph:
            raise _UsageError("--graph is required for the mis family")
        with open(args.graph) as fh:
            g = gapdp.parse_graph_text(fh.read())
        inst = gapdp.mis_to_adtypes(g)
    elif args.family == "assignment":
        import numpy as np
        rng = np.random.default_rng(args.seed)
        weights = rng.integers(1, 100, size=(args.n, args.n)).astype(float)
        inst, offset = bench.assignment_to_adtypes(weights)
        print(f"offset={offset!r}")
    else:  # pragma: no cover
        raise _UsageError(f"unknown family {args.family}")
    _write_json(instance_to_dict(inst), args.out)
    return EXIT_OK


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for part in text.split(","):
        n, _, k = part.strip().partition(":")
        if not k:
            raise _UsageError(f"size {part!r} must look like n:k")
        sizes.append((int(n), int(k)))
    return sizes


def _cmd_bench(args) -> int:
    report = bench.bench_scaling(_parse_sizes(args.sizes), args.reps,
                                 seed=args.seed)
    text = report.to_csv()
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = load_instance(args.infile)
    with open(args.sol) as fh:
        data = json.load(fh)
    failures = []
    report = validate_instance(inst)
    failures.extend(f"instance: {e}" for e in report.errors)
    try:
        matching = matching_from_list(data["assignment"])
    except ValueError as exc:
        print(f"violation: assignment invalid: {exc}")
        return EXIT_INVALID
    try:
        w = welfare(inst, matching)
    except IndexError as exc:
        print(f"violation: assignment out of range: {exc}")
        return EXIT_INVALID
    stated = float(data.get("welfare", w))
    if abs(stated - w) > 1e-9 * max(1.0, abs(w)):
        failures.append(f"stated welfare {stated!r} != recomputed {w!r}")
    if has_gap_rules(inst) and not gapdp.check_gap_feasible(inst, matching):
        failures.append("assignment violates gap rules")
    if data.get("duals"):
        duals = hungarian.DualSolution(
            tuple(tuple(row) for row in data["duals"]["u"]),
            tuple(data["duals"]["p"]))
        sol = hungarian.OptimalSolution(matching, duals, stated)
        cert = hungarian.certify(inst, sol)
        if not cert.passed:
            failures.append("certificate failed: " + "; ".join(cert.messages)
                            + f" (worst violation {cert.worst_violation:g})")
    for f in failures:
        print(f"violation: {f}")
    if failures:
        return EXIT_INVALID
    print(f"ok: welfare {w!r}, {len(matching)} slots assigned")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="adtypes",
                     description="Typed ad-to-slot allocation: solvers, "
                                 "pricing, generators, benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--algo", default="adtypes",
                   choices=["adtypes", "generic", "greedy", "gapdp",
                            "brute", "two-type"])
    p.add_argument("--out", default=None)
    p.add_argument("--trace", action="store_true",
                   help="per-phase trace on stderr")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("price", help="compute incentive-compatible payments")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mechanism", required=True,
                   choices=["vcg", "reserve", "myerson-greedy"])
    p.add_argument("--reserves", default=None,
                   help='JSON file: [{"type": t, "rank": r, "reserve": x}]')
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_price)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--family", required=True,
                   choices=["random", "greedy-tight", "mis", "assignment"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--values", default="uniform-int",
                   choices=["uniform-int", "uniform-real", "pareto"])
    p.add_argument("--discounts", default="geometric",
                   choices=["geometric", "linear", "step"])
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--graph", default=None,
                   help='edge-list file: "n m" header then "u v" lines')
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="timing comparison of the two solvers")
    p.add_argument("--sizes", required=True, help='e.g. "100:4,200:4,400:4"')
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("verify", help="check a solution file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sol", required=True)
    p.set_defaults(func=_cmd_verify)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
