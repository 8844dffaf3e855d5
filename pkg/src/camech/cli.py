"""Command-line interface.

Verbs: `run` a mechanism over an instance file, `check` axioms and
misreports, `gen` seeded random instances, `experiment` for the bundled
suites.  Every command writes one JSON document; exit codes are the only
success channel (0 ok, 1 failed check, 2 parse/validation, 3 ties rejected,
4 size guard).  All randomness flows through --seed (default: the
CAMECH_SEED environment variable, then 0).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import documents
from .axioms import (
    AxiomCheck,
    check_critical,
    check_exactness,
    check_monotonicity,
    check_participation,
    clarke_greedy_mechanism,
    find_profitable_deviation,
    greedy_mechanism,
    gva_mechanism,
)
from .errors import (
    BundleSpaceTooLarge,
    CamechError,
    InstanceTooLarge,
    NonMonotoneDetected,
    ParseError,
    TiesPresent,
    TooManyTieOrders,
    UnknownScenario,
)
from .exact import SolverKind, clarke_with_greedy, optimal_allocation, run_gva
from .experiments import (
    ratio_experiment,
    random_instance,
    reproduce_all,
    revenue_compare_tie_orders,
    scenario,
    tight_family,
)
from .greedy import greedy_allocate, run_greedy
from .model import MAX_GOODS, allocation_value, validate_instance
from .money import Money
from .norm import NormConfig, TieRule

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_TIES = 3
EXIT_TOO_LARGE = 4

AXIOM_NAMES = ("exactness", "monotonicity", "participation", "critical")


def _default_seed() -> int:
    raw = os.environ.get("CAMECH_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camech",
        description="Mechanisms for single-bundle combinatorial auctions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="instance file, or - for stdin")
        p.add_argument("--output", default=None, help="output file (default: stdout)")

    run_p = sub.add_parser("run", help="run one mechanism over an instance")
    add_common(run_p)
    run_p.add_argument(
        "--mechanism", choices=("greedy", "gva", "clarke-greedy"), default="greedy"
    )
    run_p.add_argument("--norm-exponent", type=_fraction, default=Fraction(1))
    run_p.add_argument("--tie-rule", choices=("canonical", "reject"), default="canonical")
    run_p.add_argument("--solver", choices=("dp", "brute"), default="dp")

    check_p = sub.add_parser("check", help="check axioms and search for misreports")
    add_common(check_p)
    check_p.add_argument(
        "--mechanism", choices=("greedy", "gva", "clarke-greedy"), default="greedy"
    )
    check_p.add_argument("--norm-exponent", type=_fraction, default=Fraction(1))
    check_p.add_argument("--tie-rule", choices=("canonical", "reject"), default="canonical")
    check_p.add_argument("--solver", choices=("dp", "brute"), default="dp")
    check_p.add_argument(
        "--axioms",
        default="all",
        help="comma-separated subset of exactness,monotonicity,participation,critical "
             "(or 'all', or 'none')",
    )
    check_p.add_argument("--deviations", action="store_true",
                         help="exhaustive misreport search for every bidder")
    check_p.add_argument("--seed", type=int, default=None)
    check_p.add_argument("--samples", type=int, default=10,
                         help="monotonicity perturbations per granted bid")

    gen_p = sub.add_parser("gen", help="generate a seeded tie-free instance")
    add_common(gen_p, with_input=False)
    gen_p.add_argument("--goods", type=int, required=True)
    gen_p.add_argument("--bids", type=int, required=True)
    gen_p.add_argument("--bundle-prob", type=float, default=0.4)
    gen_p.add_argument("--seed", type=int, default=None)

    exp_p = sub.add_parser("experiment", help="run a bundled suite")
    add_common(exp_p, with_input=False)
    exp_p.add_argument("--suite", choices=("reproduce", "ratio", "revenue", "tight"),
                       required=True)
    exp_p.add_argument("--k", type=int, default=None, help="goods (ratio/tight suites)")
    exp_p.add_argument("--n", type=int, default=None, help="bids (ratio suite)")
    exp_p.add_argument("--trials", type=int, default=200)
    exp_p.add_argument("--l", type=_fraction, default=Fraction(1, 2),
                       help="norm exponent for the suite")
    exp_p.add_argument("--bundle-prob", type=float, default=0.4)
    exp_p.add_argument("--seed", type=int, default=None)
    exp_p.add_argument("--scenario", default=None, help="scenario name (revenue suite)")
    exp_p.add_argument("--format", choices=("json", "text"), default="json",
                       help="text gives a plain report (reproduce suite only)")
    return parser


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_output(doc, path) -> None:
    text = doc if isinstance(doc, str) else documents.to_json(doc)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_valid_instance(args):
    instance = documents.parse_instance_text(_read_input(args.input))
    violations = validate_instance(instance)
    if violations:
        raise _Invalid(violations)
    return instance


class _Invalid(Exception):
    def __init__(self, violations):
        self.violations = violations


def _norm_config(args) -> NormConfig:
    return NormConfig(args.norm_exponent, TieRule(args.tie_rule))


def _solver(args) -> SolverKind:
    return SolverKind(args.solver)


def _cmd_run(args) -> tuple[dict, int]:
    instance = _load_valid_instance(args)
    cfg = _norm_config(args)
    if args.mechanism == "greedy":
        outcome = run_greedy(instance, cfg)
        doc = documents.outcome_document(instance, outcome, mechanism="greedy", cfg=cfg)
    elif args.mechanism == "clarke-greedy":
        outcome = clarke_with_greedy(instance, cfg)
        doc = documents.outcome_document(instance, outcome, mechanism="clarke-greedy", cfg=cfg)
    else:
        outcome = run_gva(instance, _solver(args))
        doc = documents.outcome_document(
            instance, outcome, mechanism="gva", solver=args.solver
        )
    return doc, EXIT_OK


def _mechanism(args, cfg):
    if args.mechanism == "greedy":
        return greedy_mechanism(cfg)
    if args.mechanism == "clarke-greedy":
        return clarke_greedy_mechanism(cfg)
    return gva_mechanism(_solver(args))


def _cmd_check(args) -> tuple[dict, int]:
    instance = _load_valid_instance(args)
    cfg = _norm_config(args)
    mech = _mechanism(args, cfg)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.axioms == "all":
        selected = list(AXIOM_NAMES)
    elif args.axioms == "none":
        selected = []
    else:
        selected = [a.strip() for a in args.axioms.split(",") if a.strip()]
        unknown = set(selected) - set(AXIOM_NAMES)
        if unknown:
            raise ParseError(f"unknown axiom name: {sorted(unknown)[0]}")
    checks: list[AxiomCheck] = []
    if "exactness" in selected:
        checks.append(check_exactness(mech, [instance]))
    if "monotonicity" in selected:
        checks.append(
            check_monotonicity(mech, [instance], seed=seed, perturbations=args.samples)
        )
    if "participation" in selected:
        checks.append(check_participation(mech, [instance]))
    if "critical" in selected:
        try:
            checks.append(check_critical(mech, [instance]))
        except NonMonotoneDetected as exc:
            checks.append(AxiomCheck("critical", "violated", 1, detail=str(exc)))
    ok = all(c.verdict != "violated" for c in checks)
    doc = {
        "mechanism": mech.name,
        "seed": seed,
        "checks": [_check_entry(instance, c) for c in checks],
    }
    if args.deviations:
        deviations = []
        for j, b in enumerate(instance.bids):
            if b.is_reserve:
                continue
            found = find_profitable_deviation(mech, instance, j)
            deviations.append(documents.deviation_document(b.bidder, found))
            if found is not None:
                ok = False
        doc["deviations"] = deviations
    doc["all_hold"] = ok
    return doc, EXIT_OK if ok else EXIT_CHECK_FAILED


def _check_entry(instance, check: AxiomCheck) -> dict:
    entry = {"axiom": check.axiom, "verdict": check.verdict, "samples": check.samples}
    if check.detail:
        entry["detail"] = check.detail
    if check.witness is not None:
        entry["witness"] = {
            "description": check.witness.description,
            "bid": check.witness.bid_index,
            "instance": documents.instance_document(check.witness.instance),
        }
    return entry


def _cmd_gen(args) -> tuple[dict, int]:
    if args.goods > MAX_GOODS:
        raise InstanceTooLarge(f"at most {MAX_GOODS} goods are supported")
    seed = args.seed if args.seed is not None else _default_seed()
    instance = random_instance(
        args.goods, args.bids, seed=seed, bundle_prob=args.bundle_prob
    )
    return documents.instance_document(instance), EXIT_OK


def _cmd_experiment(args) -> tuple[dict, int]:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.suite == "reproduce":
        rows = reproduce_all()
        ok = all(r.passed for r in rows)
        code = EXIT_OK if ok else EXIT_CHECK_FAILED
        if args.format == "text":
            return documents.repro_text(rows), code
        return documents.repro_document(rows), code
    if args.suite == "ratio":
        stats = ratio_experiment(
            args.k or 8, args.n or 12, args.trials, args.l, seed,
            bundle_prob=args.bundle_prob,
        )
        doc = documents.ratio_document(stats)
        return doc, EXIT_OK if not stats.violations else EXIT_CHECK_FAILED
    if args.suite == "revenue":
        if not args.scenario:
            raise ParseError("the revenue suite needs --scenario")
        sc = scenario(args.scenario)
        comparison = revenue_compare_tie_orders(sc.instance, NormConfig(args.l))
        doc = documents.tie_orders_document(sc.name, comparison)
        expected = {
            e.quantity: e.expected
            for e in sc.expectations
            if e.mechanism == "tie-orders"
        }
        ok = True
        if "avg_revenue" in expected:
            ok = comparison.greedy_average == Money(Fraction(expected["avg_revenue"]))
            doc["expected_greedy_average"] = expected["avg_revenue"]
            doc["pass"] = ok
        return doc, EXIT_OK if ok else EXIT_CHECK_FAILED
    # tight families
    rows = []
    ok = True
    for k in (args.k,) if args.k is not None else (4, 9, 16):
        inst = tight_family(k, args.l)
        cfg = NormConfig(args.l)
        allocation, _ = greedy_allocate(inst, cfg)
        greedy_value = allocation_value(inst, allocation)
        opt = optimal_allocation(inst, SolverKind.BITMASK_DP).value
        ratio = opt.as_fraction() / greedy_value.as_fraction()
        if args.l == Fraction(1, 2):
            floor = Fraction(19, 20) ** 2 * k  # compare ratio**2 against (0.95**2) k
            good = ratio * ratio >= floor
            bound = f"sqrt({k})"
        else:
            good = ratio >= Fraction(19, 20) * k
            bound = str(k)
        ok = ok and good
        rows.append(
            {
                "goods": k,
                "bound": bound,
                "greedy": float(greedy_value),
                "optimal": float(opt),
                "ratio": float(ratio),
                "reaches_bound": good,
            }
        )
    return {"suite": "tight", "norm_exponent": str(args.l), "rows": rows,
            "all_pass": ok}, EXIT_OK if ok else EXIT_CHECK_FAILED


_HANDLERS = {
    "run": _cmd_run,
    "check": _cmd_check,
    "gen": _cmd_gen,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, code = _HANDLERS[args.command](args)
    except _Invalid as exc:
        _write_output(documents.violations_document(exc.violations), args.output)
        return EXIT_INVALID
    except ParseError as exc:
        _write_output(documents.error_document("parse", str(exc)), args.output)
        return EXIT_INVALID
    except TiesPresent as exc:
        _write_output(documents.error_document("ties", str(exc)), args.output)
        return EXIT_TIES
    except (InstanceTooLarge, BundleSpaceTooLarge, TooManyTieOrders) as exc:
        _write_output(documents.error_document("too-large", str(exc)), args.output)
        return EXIT_TOO_LARGE
    except UnknownScenario as exc:
        _write_output(documents.error_document("unknown-scenario", str(exc)), args.output)
        return EXIT_INVALID
    except CamechError as exc:
        _write_output(documents.error_document("error", str(exc)), args.output)
        return EXIT_INVALID
    _write_output(doc, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
