"""Executable axioms, critical-value computation, and misreport search.

Four properties are checked against a runnable mechanism: exactness (full
bundle or nothing), monotonicity (more money for fewer goods never loses),
participation (denied bids pay zero), and critical pricing (winners pay the
threshold below which they would have lost).  A mechanism passing all four
on an instance family should admit no profitable single-bundle misreport;
`find_profitable_deviation` tests exactly that by exhaustive re-runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .errors import BundleSpaceTooLarge, NonMonotoneDetected, TiesPresent
from .model import AuctionInstance, Outcome, SingleMindedBid
from .money import Money
from .norm import NormConfig, TieRule, bundle_ratio_power, rank
from . import exact as _exact
from .greedy import run_greedy

#: Probe points sit at this fraction of the local gap away from a threshold.
PROBE_SCALE = Fraction(1, 2 ** 20)


@dataclass(frozen=True, eq=False)
class Mechanism:
    """A deterministic runnable mechanism: instance -> Outcome.

    `value_thresholds(instance, j)` lists the declared values at which bid
    j's outcome may change (used for exact critical values); norm-based
    mechanisms provide it, plugged mechanisms may leave it None and fall back
    to growth-and-bisection probing.  `deviation_thresholds` is the analogue
    for a hypothetical bundle.
    """

    name: str
    run: Callable[[AuctionInstance], Outcome]
    value_thresholds: Optional[Callable[[AuctionInstance, int], Sequence[Money]]] = None
    deviation_thresholds: Optional[
        Callable[[AuctionInstance, int, frozenset], Sequence[Money]]
    ] = None
    norm_exponent: Optional[Fraction] = None


def _crossing_values(instance: AuctionInstance, j: int, size: int, exponent: Fraction):
    """Values at which a size-`size` bundle's norm crosses each other bid's norm."""
    out = []
    for i, b in enumerate(instance.bids):
        if i != j:
            out.append(b.amount * bundle_ratio_power(size, len(b.bundle), exponent))
    return out


def greedy_mechanism(cfg: NormConfig) -> Mechanism:
    return Mechanism(
        name="greedy",
        run=lambda inst: run_greedy(inst, cfg),
        value_thresholds=lambda inst, j: _crossing_values(
            inst, j, len(inst.bids[j].bundle), cfg.exponent
        ),
        deviation_thresholds=lambda inst, j, bundle: _crossing_values(
            inst, j, len(bundle), cfg.exponent
        ),
        norm_exponent=cfg.exponent,
    )


def clarke_greedy_mechanism(cfg: NormConfig) -> Mechanism:
    # same allocation as greedy, so the same value thresholds apply
    return Mechanism(
        name="clarke-greedy",
        run=lambda inst: _exact.clarke_with_greedy(inst, cfg),
        value_thresholds=lambda inst, j: _crossing_values(
            inst, j, len(inst.bids[j].bundle), cfg.exponent
        ),
        deviation_thresholds=lambda inst, j, bundle: _crossing_values(
            inst, j, len(bundle), cfg.exponent
        ),
        norm_exponent=cfg.exponent,
    )


def gva_mechanism(solver: _exact.SolverKind) -> Mechanism:
    def deviation_thresholds(inst: AuctionInstance, j: int, bundle: frozenset):
        # the one value where j (with this bundle) enters the optimal allocation
        opt_without = _exact.optimal_allocation(inst.with_amount(j, 0), solver).value
        big = opt_without + 1
        forced = inst.with_bid(
            j, SingleMindedBid(inst.bids[j].bidder, bundle, big, inst.bids[j].is_reserve)
        )
        compatible = _exact.optimal_allocation(forced, solver).value - big
        t = opt_without - compatible
        return [t if t.sign() > 0 else Money(0)]

    return Mechanism(
        name="gva",
        run=lambda inst: _exact.run_gva(inst, solver),
        value_thresholds=None,
        deviation_thresholds=deviation_thresholds,
    )


@dataclass(frozen=True)
class CriticalValue:
    """Threshold below which a bid loses and above which it wins.

    `value` is None for +infinity.  `exact` marks the threshold-scan route;
    probed mechanisms report a bracket instead.
    """

    value: Optional[Money]
    exact: bool
    bracket: Optional[tuple[Money, Money]] = None
    probes: int = 0


def critical_value(
    mech: Mechanism,
    instance: AuctionInstance,
    j: int,
    *,
    epsilon: Fraction = Fraction(1, 10 ** 9),
    ceiling: Optional[Money] = None,
) -> CriticalValue:
    """Compute the grant threshold for bid j's declared bundle by re-running.

    Raises `NonMonotoneDetected` when probing finds a denial above a grant,
    i.e. when no single threshold exists.
    """
    bundle = instance.bids[j].bundle

    def granted_at(v: Money) -> bool:
        out = mech.run(instance.with_amount(j, v))
        return out.allocation.bundle_granted(j) == bundle

    if mech.value_thresholds is not None:
        return _critical_by_thresholds(mech, instance, j, granted_at)
    return _critical_by_probing(instance, j, granted_at, epsilon, ceiling)


def _critical_by_thresholds(mech, instance, j, granted_at) -> CriticalValue:
    zero = Money(0)
    thresholds = sorted(
        {t for t in mech.value_thresholds(instance, j) if t.sign() > 0}
    )
    # one probe inside each region between consecutive thresholds
    probes: list[Money] = []
    if not thresholds:
        probes.append(Money(PROBE_SCALE))
    else:
        probes.append(thresholds[0] * (1 - PROBE_SCALE))
        for a, b in zip(thresholds, thresholds[1:]):
            probes.append(a + (b - a) * PROBE_SCALE)
        probes.append(thresholds[-1] * (1 + PROBE_SCALE))
    status = [granted_at(p) for p in probes]
    first = next((i for i, s in enumerate(status) if s), None)
    if first is None:
        return CriticalValue(None, True, probes=len(probes))
    for i in range(first + 1, len(status)):
        if not status[i]:
            raise NonMonotoneDetected(
                f"bid {j}: granted at {probes[first].to_decimal()} "
                f"but denied at {probes[i].to_decimal()}",
                witness={"instance": instance, "bid": j,
                         "granted_at": probes[first], "denied_at": probes[i]},
            )
    vc = zero if first == 0 else thresholds[first - 1]
    return CriticalValue(vc, True, probes=len(probes))


def _critical_by_probing(instance, j, granted_at, epsilon, ceiling) -> CriticalValue:
    if ceiling is None:
        total = Money(0)
        for b in instance.bids:
            total = total + b.amount
        ceiling = (total + 1) * 2
    probes = 0
    lo, hi = Money(0), None
    v = Money(1)
    while v <= ceiling:
        probes += 1
        if granted_at(v):
            hi = v
            break
        lo = v
        v = v * 2
    if hi is None:
        return CriticalValue(None, False, probes=probes)
    for factor in (2, 4):  # spot-check monotonicity above the bracket
        check = hi * factor
        if check <= ceiling:
            probes += 1
            if not granted_at(check):
                raise NonMonotoneDetected(
                    f"bid {j}: granted at {hi.to_decimal()} but denied at {check.to_decimal()}",
                    witness={"instance": instance, "bid": j,
                             "granted_at": hi, "denied_at": check},
                )
    while (hi - lo).compare(epsilon) > 0:
        mid = (lo + hi) / 2
        probes += 1
        if granted_at(mid):
            hi = mid
        else:
            lo = mid
    return CriticalValue((lo + hi) / 2, False, bracket=(lo, hi), probes=probes)


@dataclass(frozen=True, eq=False)
class Witness:
    """Replayable evidence for a violated axiom."""

    instance: AuctionInstance
    bid_index: Optional[int]
    description: str


@dataclass(frozen=True, eq=False)
class AxiomCheck:
    axiom: str
    verdict: str  # "holds" | "violated" | "skipped"
    samples: int
    witness: Optional[Witness] = None
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


@dataclass(frozen=True, eq=False)
class AxiomReport:
    mechanism: str
    seed: Optional[int]
    instances: int
    checks: tuple[AxiomCheck, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.verdict != "violated" for c in self.checks)


def check_exactness(mech: Mechanism, instances: Iterable[AuctionInstance]) -> AxiomCheck:
    """Every bid receives exactly its declared bundle or nothing at all."""
    samples = 0
    for inst in instances:
        samples += 1
        out = mech.run(inst)
        for j, granted in out.allocation.grants.items():
            if granted and granted != inst.bids[j].bundle:
                return AxiomCheck(
                    "exactness", "violated", samples,
                    Witness(inst, j, f"bid {j} got {sorted(granted)} "
                                     f"instead of {sorted(inst.bids[j].bundle)}"),
                )
    return AxiomCheck("exactness", "holds", samples)


def check_participation(mech: Mechanism, instances: Iterable[AuctionInstance]) -> AxiomCheck:
    """Denied bids pay exactly zero."""
    samples = 0
    zero = Money(0)
    for inst in instances:
        samples += 1
        out = mech.run(inst)
        for j in range(len(inst.bids)):
            if not out.is_granted(j) and out.payments[j] != zero:
                return AxiomCheck(
                    "participation", "violated", samples,
                    Witness(inst, j, f"denied bid {j} pays {out.payments[j].to_decimal()}"),
                )
    return AxiomCheck("participation", "holds", samples)


def check_monotonicity(
    mech: Mechanism,
    instances: Iterable[AuctionInstance],
    *,
    seed: int = 0,
    perturbations: int = 10,
) -> AxiomCheck:
    """Raising a winner's amount, or shrinking its bundle, keeps it winning.

    Perturbations are sampled (the space is infinite) and kept tie-free when
    the mechanism ranks by a norm, since the tie-free assumption is what the
    property is stated under.
    """
    rng = random.Random(f"monotonicity:{seed}")
    samples = 0
    tried = 0
    for inst in instances:
        samples += 1
        out = mech.run(inst)
        for j in sorted(out.allocation.grants):
            bid = inst.bids[j]
            for _ in range(perturbations):
                perturbed = _tie_free_perturbation(rng, mech, inst, j)
                if perturbed is None:
                    continue
                tried += 1
                new_inst, new_bid = perturbed
                result = mech.run(new_inst)
                if result.allocation.bundle_granted(j) != new_bid.bundle:
                    return AxiomCheck(
                        "monotonicity", "violated", samples,
                        Witness(new_inst, j,
                                f"bid {j} was granted as {sorted(bid.bundle)}@"
                                f"{bid.amount.to_decimal()} but lost after moving to "
                                f"{sorted(new_bid.bundle)}@{new_bid.amount.to_decimal()}"),
                    )
    return AxiomCheck("monotonicity", "holds", samples, detail=f"{tried} perturbations")


def _tie_free_perturbation(rng, mech, inst, j, attempts: int = 20):
    bid = inst.bids[j]
    for _ in range(attempts):
        if len(bid.bundle) > 1 and rng.random() < 0.5:
            keep = rng.randint(1, len(bid.bundle) - 1)
            goods = sorted(bid.bundle)
            new_bundle = frozenset(rng.sample(goods, keep))
            new_bid = SingleMindedBid(bid.bidder, new_bundle, bid.amount, bid.is_reserve)
        else:
            bump = 1 + Fraction(rng.randint(1, 10 ** 6), 10 ** 6)
            new_bid = bid.with_amount(bid.amount * bump)
        new_inst = inst.with_bid(j, new_bid)
        if mech.norm_exponent is not None:
            try:
                rank(new_inst, NormConfig(mech.norm_exponent, TieRule.REJECT))
            except TiesPresent:
                continue
        return new_inst, new_bid
    return None


def check_critical(
    mech: Mechanism,
    instances: Iterable[AuctionInstance],
    *,
    tolerance: Optional[Fraction] = None,
) -> AxiomCheck:
    """Winners pay exactly their critical value.

    `tolerance=None` demands exact equality (threshold-route mechanisms);
    probed mechanisms compare against the bracket midpoint within tolerance.
    Propagates `NonMonotoneDetected` from the critical-value search.
    """
    samples = 0
    for inst in instances:
        samples += 1
        out = mech.run(inst)
        for j in sorted(out.allocation.grants):
            cv = critical_value(mech, inst, j)
            pay = out.payments[j]
            if cv.value is None:
                return AxiomCheck(
                    "critical", "violated", samples,
                    Witness(inst, j, f"granted bid {j} has an infinite critical value"),
                )
            if tolerance is None and cv.exact:
                bad = pay != cv.value
            else:
                tol = tolerance if tolerance is not None else Fraction(1, 10 ** 6)
                bad = abs(pay - cv.value).compare(tol) > 0
            if bad:
                return AxiomCheck(
                    "critical", "violated", samples,
                    Witness(inst, j, f"bid {j} pays {pay.to_decimal()} but its "
                                     f"critical value is {cv.value.to_decimal()}"),
                )
    return AxiomCheck("critical", "holds", samples)


def run_axiom_suite(
    mech: Mechanism,
    instances: Sequence[AuctionInstance],
    *,
    seed: int = 0,
    perturbations: int = 10,
    tolerance: Optional[Fraction] = None,
) -> AxiomReport:
    instances = list(instances)
    checks = (
        check_exactness(mech, instances),
        check_monotonicity(mech, instances, seed=seed, perturbations=perturbations),
        check_participation(mech, instances),
        check_critical(mech, instances, tolerance=tolerance),
    )
    return AxiomReport(mech.name, seed, len(instances), checks)


@dataclass(frozen=True, eq=False)
class DeviationReport:
    """A strictly profitable misreport found by exhaustive search."""

    bidder: str
    bid_index: int
    true_type: SingleMindedBid
    misreport: SingleMindedBid
    truthful_utility: Money
    deviating_utility: Money
    bundles_searched: int
    candidates_tested: int
    note: str = (
        "complete for mechanisms whose outcome is piecewise-constant in the "
        "declared value between norm crossings; sound for any mechanism"
    )


def _candidate_values(thresholds: Sequence[Money], true_amount: Money) -> list[Money]:
    if true_amount.is_rational and all(t.is_rational for t in thresholds):
        candidates = {Fraction(0), true_amount.as_fraction()}
        ts = sorted({t.as_fraction() for t in thresholds if t >= 0})
        for i, t in enumerate(ts):
            left_gap = t - ts[i - 1] if i > 0 else t
            right_gap = ts[i + 1] - t if i + 1 < len(ts) else (t if t > 0 else Fraction(1))
            below = t - left_gap * PROBE_SCALE
            if below >= 0:
                candidates.add(below)
            candidates.add(t + right_gap * PROBE_SCALE)
        return [Money(v) for v in sorted(candidates)]
    zero = Money(0)
    candidates = {zero, true_amount}
    ts = sorted({t for t in thresholds if t.sign() >= 0})
    for i, t in enumerate(ts):
        left_gap = t - ts[i - 1] if i > 0 else t
        right_gap = ts[i + 1] - t if i + 1 < len(ts) else (t if t.sign() > 0 else Money(1))
        below = t - left_gap * PROBE_SCALE
        above = t + right_gap * PROBE_SCALE
        if below.sign() >= 0:
            candidates.add(below)
        candidates.add(above)
    return sorted(candidates)


def find_profitable_deviation(
    mech: Mechanism, instance: AuctionInstance, j: int
) -> Optional[DeviationReport]:
    """Search every bundle and every norm-crossing value for a profitable lie.

    The bidder's true type comes from `instance.true_types` (falling back to
    the declared bid).  Any report returned is genuinely profitable: the
    deviating utility was computed by re-running the mechanism.
    """
    k = len(instance.goods)
    if k > 16:
        raise BundleSpaceTooLarge(f"cannot enumerate bundles over {k} goods")
    declared = instance.bids[j]
    true_type = (instance.true_types or {}).get(declared.bidder, declared)
    base = instance.without_true_types()

    def utility(out: Outcome) -> Money:
        granted = out.allocation.bundle_granted(j)
        value = true_type.amount if true_type.bundle <= granted else Money(0)
        return value - out.payments[j]

    truthful_bid = SingleMindedBid(
        declared.bidder, true_type.bundle, true_type.amount, declared.is_reserve
    )
    truthful_utility = utility(mech.run(base.with_bid(j, truthful_bid)))

    goods = base.goods
    best: Optional[tuple[Money, SingleMindedBid]] = None
    tested = 0
    for bundle_bits in range(1, 1 << k):
        bundle = frozenset(goods[i] for i in range(k) if bundle_bits >> i & 1)
        if mech.deviation_thresholds is not None:
            thresholds = mech.deviation_thresholds(base, j, bundle)
        else:
            thresholds = []
        for v in _candidate_values(thresholds, true_type.amount):
            tested += 1
            attempt = SingleMindedBid(declared.bidder, bundle, v, declared.is_reserve)
            u = utility(mech.run(base.with_bid(j, attempt)))
            if best is None or u > best[0]:
                best = (u, attempt)
    if best is not None and best[0] > truthful_utility:
        return DeviationReport(
            bidder=declared.bidder,
            bid_index=j,
            true_type=true_type,
            misreport=best[1],
            truthful_utility=truthful_utility,
            deviating_utility=best[0],
            bundles_searched=(1 << k) - 1,
            candidates_tested=tested,
        )
    return None
