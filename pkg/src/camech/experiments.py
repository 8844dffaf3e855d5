"""Worked scenarios, reproduction harness, and experiment suites.

The scenario registry holds the small instances used throughout the test
suite and the expected numbers for each, tagged with their provenance
("paper" for published figures, "derived" for values computed by an
independent oracle, "trivial" for direct consequences of a definition).
`reproduce_all` replays every expectation exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, isqrt
from typing import Mapping, Optional, Sequence

from .axioms import clarke_greedy_mechanism, find_profitable_deviation
from .errors import (
    InstanceTooLarge,
    TooManyTieOrders,
    UnknownScenario,
    ValuationUndefined,
)
from .exact import SolverKind, clarke_with_greedy, optimal_allocation, run_gva
from .greedy import greedy_allocate, run_greedy
from .model import (
    AuctionInstance,
    Outcome,
    SingleMindedBid,
    allocation_value,
    validate_instance,
)
from .money import Money
from .norm import NormConfig, TieRule, rank

F = Fraction

MAX_TIE_ORDERS = 10 ** 6


# --------------------------------------------------------------------------
# scenario registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Expectation:
    mechanism: str  # greedy | gva | optimal | clarke-greedy | tie-orders | deviation
    quantity: str   # e.g. "grants", "payment:red", "revenue", "value"; "@variant" suffix
    expected: str   # exact literal ("9.5", "2/3") or sorted name list ("blue,red")
    provenance: str  # paper | derived | trivial


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    summary: str
    instance: AuctionInstance
    norm_exponent: Fraction = F(1)
    variants: Mapping[str, AuctionInstance] = field(default_factory=dict)
    complex_owner: Optional[str] = None
    complex_table: Optional[Mapping[frozenset, Money]] = None
    expectations: tuple[Expectation, ...] = ()


def _inst(goods, bids, truthful=False) -> AuctionInstance:
    built = tuple(SingleMindedBid(name, frozenset(bundle), Money(amount)) for name, bundle, amount in bids)
    inst = AuctionInstance(tuple(goods), built)
    assert not validate_instance(inst)
    return inst.assuming_truthful() if truthful else inst


def _three_bidder_instance(truthful=False) -> AuctionInstance:
    return _inst(
        ["a", "b"],
        [("red", {"a"}, 10), ("green", {"a", "b"}, 19), ("blue", {"b"}, 8)],
        truthful=truthful,
    )


def _scenario_greedyall() -> Scenario:
    return Scenario(
        name="greedyall",
        summary="three bids on two goods; greedy picks the two singles, the "
                "efficient allocation picks the pair bid",
        instance=_three_bidder_instance(),
        expectations=(
            Expectation("greedy", "grants", "blue,red", "paper"),
            Expectation("optimal", "grants", "green", "paper"),
            Expectation("optimal", "value", "19", "paper"),
        ),
    )


def _scenario_clarke_fail() -> Scenario:
    return Scenario(
        name="clarke-fail",
        summary="greedy allocation billed with Clarke payments overcharges the "
                "top single-good bidder, who profits from under-bidding",
        instance=_three_bidder_instance(truthful=True),
        expectations=(
            Expectation("clarke-greedy", "payment:red", "11", "paper"),
            Expectation("clarke-greedy", "utility:red", "-1", "paper"),
            Expectation("deviation", "deviation_utility:red", "0", "paper"),
        ),
    )


def _scenario_greedyp() -> Scenario:
    return Scenario(
        name="greedyp",
        summary="critical payments on the three-bidder instance",
        instance=_three_bidder_instance(),
        expectations=(
            Expectation("greedy", "payment:red", "9.5", "paper"),
            Expectation("greedy", "payment:green", "0", "paper"),
            Expectation("greedy", "payment:blue", "0", "paper"),
            Expectation("gva", "grants", "green", "paper"),
            Expectation("gva", "payment:green", "18", "paper"),
        ),
    )


def _scenario_greedycomp() -> Scenario:
    return Scenario(
        name="greedycomp",
        summary="greedy happens to find the efficient allocation but charges "
                "nothing; the GVA charges the top bidder",
        instance=_inst(
            ["a", "b"],
            [("red", {"a"}, 20), ("green", {"b"}, 15), ("blue", {"a", "b"}, 20)],
        ),
        expectations=(
            Expectation("greedy", "grants", "green,red", "paper"),
            Expectation("greedy", "payment:red", "0", "paper"),
            Expectation("greedy", "payment:green", "0", "paper"),
            Expectation("greedy", "payment:blue", "0", "trivial"),
            Expectation("gva", "payment:red", "5", "paper"),
            Expectation("gva", "payment:green", "0", "paper"),
        ),
    )


def _complex_green_instance(pair_amount) -> AuctionInstance:
    inst = _inst(
        ["a", "b"],
        [
            ("red", {"a"}, 12),
            ("green:a", {"a"}, 10),
            ("green:b", {"b"}, 10),
            ("green:ab", {"a", "b"}, pair_amount),
        ],
    )
    return inst


def _scenario_complex_green() -> Scenario:
    table = {
        frozenset({"a"}): Money(10),
        frozenset({"b"}): Money(10),
        frozenset({"a", "b"}): Money(30),
    }
    return Scenario(
        name="complex-green",
        summary="a complementarity-valuing owner splits into three agents; "
                "truth-telling loses to shading the pair bid",
        instance=_complex_green_instance(30),
        variants={"deviating": _complex_green_instance(23)},
        complex_owner="green",
        complex_table=table,
        expectations=(
            Expectation("greedy", "grants", "green:ab", "paper"),
            Expectation("greedy", "payment:green:ab", "24", "paper"),
            Expectation("greedy", "owner_utility", "6", "paper"),
            Expectation("greedy", "grants@deviating", "green:b,red", "paper"),
            Expectation("greedy", "payment:red@deviating", "11.5", "paper"),
            Expectation("greedy", "owner_utility@deviating", "10", "paper"),
        ),
    )


def _impossibility_instance(pair_amount) -> AuctionInstance:
    return _inst(
        ["a", "b"],
        [
            ("red", {"a"}, 10),
            ("green:b", {"b"}, 5),
            ("green:ab", {"a", "b"}, pair_amount),
        ],
    )


def _scenario_impossibility() -> Scenario:
    return Scenario(
        name="impossibility-setup",
        summary="two-bidder family behind the no-payment-scheme argument for "
                "double-minded players; the pair bid flips the allocation at 20",
        instance=_impossibility_instance(25),
        variants={"low": _impossibility_instance(15)},
        expectations=(
            Expectation("greedy", "grants", "green:ab", "paper"),
            Expectation("greedy", "grants@low", "green:b,red", "paper"),
        ),
    )


def _scenario_better() -> Scenario:
    return Scenario(
        name="better",
        summary="three tied pair bids; greedy earns 2/3 on average over tie "
                "orders while the GVA earns nothing",
        instance=_inst(
            ["a", "b", "c", "d"],
            [("green", {"a", "b"}, 1), ("red", {"c", "d"}, 1), ("black", {"a", "c"}, 1)],
        ),
        expectations=(
            Expectation("tie-orders", "avg_revenue", "2/3", "paper"),
            Expectation("gva", "revenue", "0", "paper"),
        ),
    )


def _scenario_notgood() -> Scenario:
    return Scenario(
        name="notgood",
        summary="four tied pair bids; the GVA extracts the full surplus",
        instance=_inst(
            ["a", "b", "c", "d"],
            [
                ("green", {"a", "b"}, 1),
                ("red", {"c", "d"}, 1),
                ("black", {"a", "c"}, 1),
                ("blue", {"b", "d"}, 1),
            ],
        ),
        expectations=(
            Expectation("tie-orders", "avg_revenue", "2/3", "paper"),
            Expectation("gva", "revenue", "2", "paper"),
        ),
    )


def _scenario_best() -> Scenario:
    return Scenario(
        name="best",
        summary="strong complementarity: the critical payment beats the GVA's",
        instance=_inst(
            ["a", "b"],
            [("red", {"a", "b"}, 20), ("green", {"a"}, 9), ("black", {"b"}, 1)],
        ),
        expectations=(
            Expectation("greedy", "payment:red", "18", "paper"),
            Expectation("greedy", "revenue", "18", "trivial"),
            Expectation("gva", "payment:red", "10", "paper"),
            Expectation("gva", "revenue", "10", "trivial"),
        ),
    )


def _scenario_worseeff() -> Scenario:
    return Scenario(
        name="worseeff",
        summary="same efficient allocation, but the GVA collects from both winners",
        instance=_inst(
            ["a", "b"],
            [("green", {"a"}, 20), ("red", {"a", "b"}, 37), ("black", {"b"}, 18)],
        ),
        expectations=(
            Expectation("greedy", "payment:green", "18.5", "paper"),
            Expectation("greedy", "payment:black", "0", "paper"),
            Expectation("greedy", "revenue", "18.5", "paper"),
            Expectation("gva", "payment:green", "19", "paper"),
            Expectation("gva", "payment:black", "17", "paper"),
            Expectation("gva", "revenue", "36", "paper"),
        ),
    )


def _scenario_worsenoteff() -> Scenario:
    return Scenario(
        name="worsenoteff",
        summary="greedy sells one good for nearly the GVA's whole revenue",
        instance=_inst(
            ["a", "b"],
            [("green", {"a"}, 10), ("red", {"a", "b"}, 19)],
        ),
        expectations=(
            Expectation("greedy", "payment:green", "9.5", "paper"),
            Expectation("greedy", "revenue", "9.5", "paper"),
            Expectation("gva", "payment:red", "10", "paper"),
            Expectation("gva", "revenue", "10", "paper"),
        ),
    )


_BUILDERS = {
    "greedyall": _scenario_greedyall,
    "clarke-fail": _scenario_clarke_fail,
    "greedyp": _scenario_greedyp,
    "greedycomp": _scenario_greedycomp,
    "complex-green": _scenario_complex_green,
    "impossibility-setup": _scenario_impossibility,
    "better": _scenario_better,
    "notgood": _scenario_notgood,
    "best": _scenario_best,
    "worseeff": _scenario_worseeff,
    "worsenoteff": _scenario_worsenoteff,
}


def scenario_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def scenario(name: str) -> Scenario:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownScenario(f"no scenario named {name!r}; "
                              f"known: {', '.join(_BUILDERS)}") from None
    return builder()


# --------------------------------------------------------------------------
# reproduction harness
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReproRow:
    scenario: str
    mechanism: str
    quantity: str
    expected: str
    actual: str
    passed: bool
    provenance: str


def _bid_index(inst: AuctionInstance, bidder: str) -> int:
    for j, b in enumerate(inst.bids):
        if b.bidder == bidder:
            return j
    raise KeyError(bidder)


def _granted_names(inst: AuctionInstance, grants) -> str:
    return ",".join(sorted(inst.bids[j].bidder for j in grants))


def _evaluate(sc: Scenario, exp: Expectation) -> tuple[str, bool]:
    quantity, _, variant = exp.quantity.partition("@")
    inst = sc.variants[variant] if variant else sc.instance
    cfg = NormConfig(sc.norm_exponent)

    def numeric(actual: Money) -> tuple[str, bool]:
        return actual.to_decimal(), actual == Money(F(exp.expected))

    if exp.mechanism == "greedy":
        out = run_greedy(inst, cfg)
        if quantity == "grants":
            names = _granted_names(inst, out.allocation.grants)
            return names, names == exp.expected
        if quantity.startswith("payment:"):
            return numeric(out.payments[_bid_index(inst, quantity.split(":", 1)[1])])
        if quantity == "revenue":
            return numeric(out.revenue)
        if quantity == "owner_utility":
            value = complex_player_utility(inst, sc.complex_owner, sc.complex_table, out)
            return numeric(value)
    elif exp.mechanism == "gva":
        out = run_gva(inst, SolverKind.BITMASK_DP)
        if quantity == "grants":
            names = _granted_names(inst, out.allocation.grants)
            return names, names == exp.expected
        if quantity.startswith("payment:"):
            return numeric(out.payments[_bid_index(inst, quantity.split(":", 1)[1])])
        if quantity == "revenue":
            return numeric(out.revenue)
    elif exp.mechanism == "optimal":
        solution = optimal_allocation(inst, SolverKind.BITMASK_DP)
        if quantity == "grants":
            names = _granted_names(inst, solution.allocation.grants)
            return names, names == exp.expected
        if quantity == "value":
            return numeric(solution.value)
    elif exp.mechanism == "clarke-greedy":
        out = clarke_with_greedy(inst, cfg)
        if quantity.startswith("payment:"):
            return numeric(out.payments[_bid_index(inst, quantity.split(":", 1)[1])])
        if quantity.startswith("utility:"):
            j = _bid_index(inst, quantity.split(":", 1)[1])
            return numeric(out.utilities[j])
    elif exp.mechanism == "tie-orders":
        comparison = revenue_compare_tie_orders(inst, cfg)
        if quantity == "avg_revenue":
            return numeric(comparison.greedy_average)
    elif exp.mechanism == "deviation":
        bidder = quantity.split(":", 1)[1]
        j = _bid_index(inst, bidder)
        report = find_profitable_deviation(clarke_greedy_mechanism(cfg), inst, j)
        if report is None:
            return "none", False
        return numeric(report.deviating_utility)
    raise ValueError(f"unhandled expectation {exp.mechanism}/{exp.quantity}")


def reproduce_all() -> list[ReproRow]:
    """Replay every registered expectation; failures come back as rows, not errors."""
    rows = []
    for name in scenario_names():
        sc = scenario(name)
        for exp in sc.expectations:
            actual, passed = _evaluate(sc, exp)
            rows.append(
                ReproRow(name, exp.mechanism, exp.quantity, exp.expected, actual, passed, exp.provenance)
            )
    return rows


# --------------------------------------------------------------------------
# tie-order revenue enumeration
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TieOrderComparison:
    greedy_average: Money
    gva_revenue: Money
    orders: int
    group_sizes: tuple[int, ...]


def revenue_compare_tie_orders(instance: AuctionInstance, cfg: NormConfig) -> TieOrderComparison:
    """Average greedy revenue over every resolution of the norm ties.

    Enumerates all permutations within each group of equal-norm bids (their
    count is the product of the groups' factorials) and compares against the
    GVA's single revenue figure.
    """
    base = rank(instance, NormConfig(cfg.exponent, TieRule.CANONICAL))
    groups: list[list[int]] = []
    for j in base.order:
        if groups and base.norms[groups[-1][0]].compare(base.norms[j]) == 0:
            groups[-1].append(j)
        else:
            groups.append([j])
    total_orders = 1
    for g in groups:
        total_orders *= factorial(len(g))
        if total_orders > MAX_TIE_ORDERS:
            raise TooManyTieOrders(
                f"tie groups admit more than {MAX_TIE_ORDERS} orders"
            )
    revenue_sum = Money(0)
    count = 0
    for perm_groups in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = tuple(itertools.chain.from_iterable(perm_groups))
        out = run_greedy(instance, NormConfig(cfg.exponent, TieRule.EXPLICIT, order))
        revenue_sum = revenue_sum + out.revenue
        count += 1
    assert count == total_orders
    gva = run_gva(instance, SolverKind.BITMASK_DP)
    return TieOrderComparison(
        revenue_sum / count, gva.revenue, count, tuple(len(g) for g in groups)
    )


# --------------------------------------------------------------------------
# random instances and the approximation-ratio suite
# --------------------------------------------------------------------------

DEFAULT_TIE_FREE_EXPONENTS = (F(0), F(1, 2), F(1))


def random_instance(
    goods_count: int,
    bids_count: int,
    *,
    seed,
    bundle_prob: float = 0.4,
    scale: int = 1000,
    tie_free_exponents: Sequence[Fraction] = DEFAULT_TIE_FREE_EXPONENTS,
    max_attempts: int = 200,
) -> AuctionInstance:
    """Seeded instance with distinct norms under each requested exponent.

    Bundles include each good independently with `bundle_prob` (empty bundles
    are redrawn); amounts are distinct integers up to 10**6 over a fixed
    decimal scale, so they serialise exactly.  The whole draw is retried on a
    norm collision, which keeps every suite tie-free by construction.
    """
    if goods_count > 63:
        raise InstanceTooLarge("at most 63 goods are supported")
    rng = random.Random(f"camech-instance:{seed}")
    goods = tuple(f"g{i + 1}" for i in range(goods_count))
    for _ in range(max_attempts):
        bundles = []
        for _ in range(bids_count):
            bundle = frozenset(g for g in goods if rng.random() < bundle_prob)
            while not bundle:
                bundle = frozenset(g for g in goods if rng.random() < bundle_prob)
            bundles.append(bundle)
        amounts = rng.sample(range(1, 10 ** 6 + 1), bids_count)
        bids = tuple(
            SingleMindedBid(f"b{i + 1}", bundle, Money(F(amount, scale)))
            for i, (bundle, amount) in enumerate(zip(bundles, amounts))
        )
        inst = AuctionInstance(goods, bids)
        try:
            for exponent in tie_free_exponents:
                rank(inst, NormConfig(exponent, TieRule.REJECT))
        except TiesPresent:
            continue
        return inst
    raise RuntimeError("could not draw a tie-free instance; lower the bid count")


@dataclass(frozen=True, eq=False)
class RatioTrial:
    optimal: float
    greedy: float
    ratio: float


@dataclass(frozen=True, eq=False)
class RatioStats:
    trials: int
    goods_count: int
    bids_count: int
    exponent: Fraction
    bound_label: str
    per_trial: tuple[RatioTrial, ...]
    max_ratio: float
    violations: tuple[int, ...]  # trial indices breaking the bound; must be empty


def _bound_violated(opt: Money, greedy: Money, goods_count: int, exponent: Fraction) -> Optional[bool]:
    """Exact check of opt <= bound * greedy; None when no bound is claimed."""
    if exponent == F(1, 2):
        return (opt * opt).compare(greedy * greedy * goods_count) > 0
    if exponent == F(1):
        return opt.compare(greedy * goods_count) > 0
    return None


def ratio_experiment(
    goods_count: int,
    bids_count: int,
    trials: int,
    exponent: Fraction,
    seed,
    *,
    bundle_prob: float = 0.4,
) -> RatioStats:
    """Optimal-to-greedy value ratios over seeded random instances.

    For exponent 1/2 the ratio is asserted (exactly) to stay within the
    square root of the number of goods; for exponent 1, within the number of
    goods itself.
    """
    exponent = F(exponent)
    cfg = NormConfig(exponent)
    per_trial = []
    violations = []
    max_ratio = F(0)
    for t in range(trials):
        inst = random_instance(
            goods_count, bids_count, seed=f"{seed}:{t}", bundle_prob=bundle_prob
        )
        allocation, _ = greedy_allocate(inst, cfg)
        greedy_value = allocation_value(inst, allocation)
        opt = optimal_allocation(inst, SolverKind.BITMASK_DP).value
        ratio = opt.as_fraction() / greedy_value.as_fraction()
        max_ratio = max(max_ratio, ratio)
        per_trial.append(RatioTrial(float(opt), float(greedy_value), float(ratio)))
        if _bound_violated(opt, greedy_value, goods_count, exponent):
            violations.append(t)
    if exponent == F(1, 2):
        bound_label = f"sqrt({goods_count})"
    elif exponent == F(1):
        bound_label = str(goods_count)
    else:
        bound_label = "none"
    return RatioStats(
        trials, goods_count, bids_count, exponent, bound_label,
        tuple(per_trial), float(max_ratio), tuple(violations),
    )


def tight_family(goods_count: int, exponent: Fraction) -> AuctionInstance:
    """Two-bid instance driving the greedy-versus-optimal ratio to its bound.

    A point bid slightly above norm 1 wins the ranking; the sweep bid for all
    goods is worth nearly the bound times more.
    """
    if goods_count < 2:
        raise ValueError("the family needs at least two goods")
    exponent = F(exponent)
    goods = tuple(f"g{i + 1}" for i in range(goods_count))
    epsilon = F(1, 1000)
    if exponent == F(1):
        sweep_amount = F(goods_count)
    elif exponent == F(1, 2):
        # largest 6-decimal value whose norm stays below the point bid's
        sweep_amount = F(isqrt(goods_count * 10 ** 12), 10 ** 6)
    else:
        raise ValueError("tight families are defined for exponents 1 and 1/2")
    return AuctionInstance(
        goods,
        (
            SingleMindedBid("point", frozenset({goods[0]}), Money(1 + epsilon)),
            SingleMindedBid("sweep", frozenset(goods), Money(sweep_amount)),
        ),
    )


# --------------------------------------------------------------------------
# complex players
# --------------------------------------------------------------------------


def owned_bid_indices(instance: AuctionInstance, owner: str) -> list[int]:
    """Bids belonging to an owner: exact id match or an `owner:` prefix."""
    prefix = owner + ":"
    return [
        j
        for j, b in enumerate(instance.bids)
        if b.bidder == owner or b.bidder.startswith(prefix)
    ]


def complex_player_utility(
    instance: AuctionInstance,
    owner: str,
    valuation_table: Mapping[frozenset, Money],
    outcome: Outcome,
) -> Money:
    """Value of everything the owner's agents won, minus everything they paid.

    The table is read with free disposal: a union of granted bundles is worth
    the best table entry it covers.  A non-empty union covering no entry is
    an error rather than silently zero.
    """
    indices = owned_bid_indices(instance, owner)
    union: frozenset = frozenset()
    paid = Money(0)
    for j in indices:
        union |= outcome.allocation.bundle_granted(j)
        paid = paid + outcome.payments[j]
    if not union:
        return Money(0) - paid
    covered = [v for bundle, v in valuation_table.items() if bundle <= union]
    if not covered:
        raise ValuationUndefined(
            f"no valuation entry covers the union {sorted(union)} for owner {owner!r}"
        )
    return max(covered) - paid
