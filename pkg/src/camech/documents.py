"""JSON documents: instances in, outcomes and reports out.

One tree format everywhere.  Amounts travel as decimal strings (or "p/q"
literals when a denominator is not 10-smooth) so the exact rationals
round-trip; computed money is rendered at 12 significant digits.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional

from .axioms import AxiomReport, DeviationReport
from .errors import ParseError
from .experiments import RatioStats, ReproRow, TieOrderComparison
from .model import AuctionInstance, Outcome, SingleMindedBid, Violation
from .money import Money, fraction_to_decimal, parse_decimal
from .norm import NormConfig, RankedList

SIGNIFICANT_DIGITS = 12


def money_text(value: Money) -> str:
    return value.to_decimal(SIGNIFICANT_DIGITS)


def amount_text(value: Money) -> str:
    """Exact literal for an amount that must survive a round trip."""
    return fraction_to_decimal(value.as_fraction())


# --------------------------------------------------------------------------
# instances
# --------------------------------------------------------------------------


def _parse_amount(raw: Any, where: str) -> Money:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise ParseError(f"{where}: amount must be a decimal string or integer")
    try:
        return Money(parse_decimal(str(raw)))
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _parse_bid(entry: Any, where: str, *, allow_reserve: bool) -> SingleMindedBid:
    if not isinstance(entry, Mapping):
        raise ParseError(f"{where}: expected an object")
    unknown = set(entry) - {"bidder", "bundle", "amount", "reserve"}
    if unknown or (not allow_reserve and "reserve" in entry):
        raise ParseError(f"{where}: unknown field {sorted(unknown or {'reserve'})[0]!r}")
    bidder = entry.get("bidder")
    bundle = entry.get("bundle")
    if not isinstance(bidder, str) or not bidder:
        raise ParseError(f"{where}: bidder must be a non-empty string")
    if not isinstance(bundle, list) or not all(isinstance(g, str) for g in bundle):
        raise ParseError(f"{where}: bundle must be a list of good ids")
    reserve = entry.get("reserve", False)
    if not isinstance(reserve, bool):
        raise ParseError(f"{where}: reserve must be a boolean")
    return SingleMindedBid(
        bidder, frozenset(bundle), _parse_amount(entry.get("amount"), where), reserve
    )


def parse_instance(doc: Any) -> AuctionInstance:
    if not isinstance(doc, Mapping):
        raise ParseError("instance document must be an object")
    unknown = set(doc) - {"goods", "bids", "true_types"}
    if unknown:
        raise ParseError(f"unknown top-level field {sorted(unknown)[0]!r}")
    goods = doc.get("goods")
    if not isinstance(goods, list) or not all(isinstance(g, str) for g in goods):
        raise ParseError("goods must be a list of strings")
    bids_raw = doc.get("bids")
    if not isinstance(bids_raw, list):
        raise ParseError("bids must be a list")
    bids = tuple(
        _parse_bid(entry, f"bids[{i}]", allow_reserve=True)
        for i, entry in enumerate(bids_raw)
    )
    true_types = None
    if "true_types" in doc:
        raw = doc["true_types"]
        if not isinstance(raw, list):
            raise ParseError("true_types must be a list")
        parsed = [
            _parse_bid(entry, f"true_types[{i}]", allow_reserve=False)
            for i, entry in enumerate(raw)
        ]
        true_types = {t.bidder: t for t in parsed}
    return AuctionInstance(tuple(goods), bids, true_types)


def parse_instance_text(text: str) -> AuctionInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    return parse_instance(doc)


def instance_document(instance: AuctionInstance) -> dict:
    doc: dict[str, Any] = {
        "goods": list(instance.goods),
        "bids": [
            {
                "bidder": b.bidder,
                "bundle": sorted(b.bundle),
                "amount": amount_text(b.amount),
                **({"reserve": True} if b.is_reserve else {}),
            }
            for b in instance.bids
        ],
    }
    if instance.true_types is not None:
        doc["true_types"] = [
            {
                "bidder": t.bidder,
                "bundle": sorted(t.bundle),
                "amount": amount_text(t.amount),
            }
            for t in sorted(instance.true_types.values(), key=lambda t: t.bidder)
        ]
    return doc


# --------------------------------------------------------------------------
# outcomes and reports
# --------------------------------------------------------------------------


def outcome_document(
    instance: AuctionInstance,
    outcome: Outcome,
    *,
    mechanism: str,
    cfg: Optional[NormConfig] = None,
    solver: Optional[str] = None,
) -> dict:
    trace = outcome.trace
    ranking: Optional[RankedList] = getattr(trace, "ranking", None)
    blocked_by = getattr(trace, "blocked_by", {}) or {}
    granted = []
    denied = []
    for j, b in enumerate(instance.bids):
        if outcome.is_granted(j):
            entry = {
                "bidder": b.bidder,
                "bundle": sorted(outcome.allocation.bundle_granted(j)),
                "payment": money_text(outcome.payments[j]),
                "norm": ranking.norms[j].to_decimal() if ranking else None,
            }
            granted.append(entry)
        else:
            blocker = blocked_by.get(j)
            denied.append(
                {
                    "bidder": b.bidder,
                    "blocked_by": instance.bids[blocker].bidder if blocker is not None else None,
                }
            )
    doc: dict[str, Any] = {
        "mechanism": mechanism,
        "norm_exponent": str(cfg.exponent) if cfg else None,
        "tie_rule": cfg.tie_rule.value if cfg else None,
        "granted": granted,
        "denied": denied,
        "revenue": money_text(outcome.revenue),
    }
    if solver is not None:
        doc["solver"] = solver
    if ranking is not None:
        doc["had_ties"] = ranking.had_ties
    if outcome.meta:
        doc.update({k: v for k, v in outcome.meta.items() if k != "solver"})
    if outcome.utilities is not None:
        doc["utilities"] = {
            instance.bids[j].bidder: money_text(u)
            for j, u in sorted(outcome.utilities.items())
        }
    return doc


def violations_document(violations: list[Violation]) -> dict:
    return {
        "error": {
            "kind": "validation",
            "violations": [
                {"bid": v.bid_index, "reason": v.reason} for v in violations
            ],
        }
    }


def error_document(kind: str, message: str) -> dict:
    return {"error": {"kind": kind, "message": message}}


def axiom_report_document(report: AxiomReport) -> dict:
    checks = []
    for c in report.checks:
        entry: dict[str, Any] = {"axiom": c.axiom, "verdict": c.verdict, "samples": c.samples}
        if c.detail:
            entry["detail"] = c.detail
        if c.witness is not None:
            entry["witness"] = {
                "description": c.witness.description,
                "bid": c.witness.bid_index,
                "instance": instance_document(c.witness.instance),
            }
        checks.append(entry)
    return {
        "mechanism": report.mechanism,
        "seed": report.seed,
        "instances": report.instances,
        "checks": checks,
        "all_hold": report.all_hold,
    }


def deviation_document(bidder: str, report: Optional[DeviationReport]) -> dict:
    if report is None:
        return {"bidder": bidder, "profitable_deviation": None}
    return {
        "bidder": bidder,
        "profitable_deviation": {
            "bundle": sorted(report.misreport.bundle),
            "amount": money_text(report.misreport.amount),
            "truthful_utility": money_text(report.truthful_utility),
            "deviating_utility": money_text(report.deviating_utility),
            "bundles_searched": report.bundles_searched,
            "candidates_tested": report.candidates_tested,
            "note": report.note,
        },
    }


def repro_text(rows: list[ReproRow]) -> str:
    """Plain-text reproduction report, one aligned row per expectation."""
    header = (
        f"{'status':6} {'scenario':20} {'mechanism':13} {'quantity':28} "
        f"{'expected':16} {'actual':16} provenance"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{status:6} {r.scenario:20} {r.mechanism:13} {r.quantity:28} "
            f"{r.expected:16} {r.actual:16} {r.provenance}"
        )
    total = sum(r.passed for r in rows)
    lines.append(f"{total}/{len(rows)} expectations reproduced")
    return "\n".join(lines) + "\n"


def repro_document(rows: list[ReproRow]) -> dict:
    return {
        "rows": [
            {
                "scenario": r.scenario,
                "mechanism": r.mechanism,
                "quantity": r.quantity,
                "expected": r.expected,
                "actual": r.actual,
                "pass": r.passed,
                "provenance": r.provenance,
            }
            for r in rows
        ],
        "all_pass": all(r.passed for r in rows),
    }


def ratio_document(stats: RatioStats, *, include_trials: bool = False) -> dict:
    doc: dict[str, Any] = {
        "trials": stats.trials,
        "goods": stats.goods_count,
        "bids": stats.bids_count,
        "norm_exponent": str(stats.exponent),
        "bound": stats.bound_label,
        "max_ratio": stats.max_ratio,
        "violations": list(stats.violations),
    }
    if include_trials:
        doc["per_trial"] = [
            {"optimal": t.optimal, "greedy": t.greedy, "ratio": t.ratio}
            for t in stats.per_trial
        ]
    return doc


def tie_orders_document(name: str, comparison: TieOrderComparison) -> dict:
    return {
        "scenario": name,
        "orders": comparison.orders,
        "tie_group_sizes": list(comparison.group_sizes),
        "greedy_average_revenue": money_text(comparison.greedy_average),
        "gva_revenue": money_text(comparison.gva_revenue),
    }


def to_json(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
