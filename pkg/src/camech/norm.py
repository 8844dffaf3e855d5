"""Bid ranking under the amount-over-bundle-size family of norms.

A bid (s, a) scores a / |s|**l for a configurable rational exponent l >= 0.
All comparisons are exact: for l = p/q the order of a1/|s1|**l and
a2/|s2|**l equals the order of a1**q * |s2|**p and a2**q * |s1|**p, which
stays inside exact arithmetic for any rational amounts (and for the radical
sums produced by probing).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, cmp_to_key, lru_cache
from math import gcd

from .errors import ExponentNotSupported, TiesPresent
from .model import AuctionInstance, SingleMindedBid
from .money import Money, iroot, square_parts


class TieRule(Enum):
    """How bids with exactly equal norms are ordered."""

    CANONICAL = "canonical"
    EXPLICIT = "explicit"
    REJECT = "reject"


@dataclass(frozen=True)
class NormConfig:
    exponent: Fraction = Fraction(1)
    tie_rule: TieRule = TieRule.CANONICAL
    explicit_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.exponent, Fraction):
            object.__setattr__(self, "exponent", Fraction(self.exponent))
        if self.exponent < 0:
            raise ValueError("norm exponent must be non-negative")
        if self.tie_rule is TieRule.EXPLICIT and self.explicit_order is None:
            raise ValueError("explicit tie rule requires an explicit order")


@lru_cache(maxsize=4096)
def bundle_ratio_power(w_num: int, w_den: int, exponent: Fraction) -> Money:
    """(w_num / w_den) ** exponent as an exact value.

    Closed forms exist for integer and half-integer exponents; other rational
    exponents are accepted only when the power happens to be rational.
    """
    if w_num < 1 or w_den < 1:
        raise ValueError("bundle sizes must be positive")
    p, q = exponent.numerator, exponent.denominator
    a, b = w_num ** p, w_den ** p
    g = gcd(a, b)
    a, b = a // g, b // g
    if q == 1 or a == b:
        return Money(Fraction(a, b))
    if q == 2:
        outer, core = square_parts(a * b)
        return Money.root_term(Fraction(outer, b), core)
    ra, rb = iroot(a, q), iroot(b, q)
    if ra ** q == a and rb ** q == b:
        return Money(Fraction(ra, rb))
    raise ExponentNotSupported(
        f"({w_num}/{w_den})**{exponent} has no exact representation here"
    )


@dataclass(frozen=True)
class NormValue:
    """Exact comparison key for one bid's norm a / size**exponent."""

    amount: Money
    size: int
    exponent: Fraction

    @cached_property
    def _order_key(self) -> Fraction | None:
        """amount**q / size**p, order-isomorphic to the norm; None when irrational."""
        if not self.amount.is_rational:
            return None
        p, q = self.exponent.numerator, self.exponent.denominator
        return self.amount.as_fraction() ** q / self.size ** p

    def compare(self, other: "NormValue") -> int:
        if self.exponent != other.exponent:
            raise ValueError("norm values under different exponents are not comparable")
        a, b = self._order_key, other._order_key
        if a is not None and b is not None:
            return -1 if a < b else (1 if a > b else 0)
        p, q = self.exponent.numerator, self.exponent.denominator
        lhs = self.amount ** q * other.size ** p
        rhs = other.amount ** q * self.size ** p
        return lhs.compare(rhs)

    def value(self) -> Money:
        """The norm itself as an exact value (exponent denominator <= 2)."""
        return self.amount * bundle_ratio_power(1, self.size, self.exponent)

    def to_decimal(self, significant: int = 12) -> str:
        try:
            return self.value().to_decimal(significant)
        except ExponentNotSupported:
            approx = float(self.amount) / self.size ** float(self.exponent)
            return f"{approx:.{significant}g}"

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0


def norm_of(bid: SingleMindedBid, exponent: Fraction) -> NormValue:
    return NormValue(bid.amount, len(bid.bundle), exponent)


def norm_compare(b1: SingleMindedBid, b2: SingleMindedBid, exponent: Fraction) -> int:
    """Sign of norm(b1) - norm(b2), exactly."""
    return norm_of(b1, Fraction(exponent)).compare(norm_of(b2, Fraction(exponent)))


@dataclass(frozen=True, eq=False)
class RankedList:
    """A total order over bid indices, norm-descending, ties resolved."""

    order: tuple[int, ...]
    exponent: Fraction
    had_ties: bool
    bids: tuple[SingleMindedBid, ...]

    @cached_property
    def norms(self) -> tuple[NormValue, ...]:
        """Per-bid norm values, indexed by bid position in the instance."""
        return tuple(norm_of(b, self.exponent) for b in self.bids)

    @cached_property
    def position(self) -> dict[int, int]:
        return {j: p for p, j in enumerate(self.order)}


_MISSING = object()


def _bid_order_key(bid: SingleMindedBid, p: int, q: int) -> Fraction | None:
    """Memoised amount**q / size**p for rational amounts; None when irrational."""
    key = bid.norm_key_cache.get((p, q), _MISSING)
    if key is not _MISSING:
        return key
    if bid.amount.is_rational:
        key = bid.amount.as_fraction() ** q / len(bid.bundle) ** p
    else:
        key = None
    bid.norm_key_cache[(p, q)] = key
    return key


def rank(instance: AuctionInstance, cfg: NormConfig) -> RankedList:
    """Sort bid indices by strictly non-increasing norm.

    Deterministic for every tie rule.  With `REJECT` the presence of any two
    equal-norm bids raises `TiesPresent`; with `CANONICAL` ties break by
    higher amount, then smaller bundle bitset, then lower bid index; with
    `EXPLICIT` ties break by position in `cfg.explicit_order`.
    """
    bids = instance.bids
    n = len(bids)
    exponent = cfg.exponent
    if n == 0:
        return RankedList((), exponent, False, bids)

    explicit_pos: dict[int, int] | None = None
    if cfg.tie_rule is TieRule.EXPLICIT:
        if sorted(cfg.explicit_order) != list(range(n)):
            raise ValueError("explicit order must be a permutation of the bid indices")
        explicit_pos = {j: p for p, j in enumerate(cfg.explicit_order)}

    p, q = exponent.numerator, exponent.denominator
    keys = [_bid_order_key(b, p, q) for b in bids]
    if all(k is not None for k in keys):
        had_ties = len(set(keys)) < n
        if not had_ties:
            order = sorted(range(n), key=keys.__getitem__, reverse=True)
            return RankedList(tuple(order), exponent, False, bids)
        if cfg.tie_rule is TieRule.REJECT:
            raise TiesPresent("distinct bids share a norm value", _tied_pairs_fast(keys))
        masks = instance.bid_masks
        if explicit_pos is not None:
            order = sorted(range(n), key=lambda i: (keys[i], -explicit_pos[i]), reverse=True)
        else:
            amounts = [b.amount.as_fraction() for b in bids]
            order = sorted(
                range(n), key=lambda i: (keys[i], amounts[i], -masks[i], -i), reverse=True
            )
        return RankedList(tuple(order), exponent, had_ties, bids)

    return _rank_general(instance, cfg, explicit_pos)


def _tied_pairs_fast(keys) -> list[tuple[int, int]]:
    first: dict = {}
    pairs = []
    for i, k in enumerate(keys):
        if k in first:
            pairs.append((first[k], i))
        else:
            first[k] = i
    return pairs


def _rank_general(instance, cfg, explicit_pos) -> RankedList:
    masks = instance.bid_masks
    bids = instance.bids
    norms = tuple(norm_of(b, cfg.exponent) for b in bids)

    def compare(i: int, j: int) -> int:
        c = norms[i].compare(norms[j])
        if c:
            return -c  # descending by norm
        if explicit_pos is not None:
            return -1 if explicit_pos[i] < explicit_pos[j] else 1
        c = bids[i].amount.compare(bids[j].amount)
        if c:
            return -c  # higher amount first
        if masks[i] != masks[j]:
            return -1 if masks[i] < masks[j] else 1  # smaller bitset first
        return -1 if i < j else 1  # lower index first

    order = sorted(range(len(bids)), key=cmp_to_key(compare))
    ties = [
        (order[p], order[p + 1])
        for p in range(len(order) - 1)
        if norms[order[p]].compare(norms[order[p + 1]]) == 0
    ]
    if ties and cfg.tie_rule is TieRule.REJECT:
        raise TiesPresent("distinct bids share a norm value", ties)
    ranked = RankedList(tuple(order), cfg.exponent, bool(ties), bids)
    ranked.__dict__["norms"] = norms
    return ranked
