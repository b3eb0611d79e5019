"""Constructors for the strategy families used in best-response search.

Four parametric families (plus truthful reporting) cover the deviations the
analysis machinery needs: single-minded bids, sequential (lexicographic)
bids, uniform bids over a target set, and an exhaustive grid over the report
simplex for tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from .model import Lexicographic, Proportional, Strategy, Valuation


def single_minded(item: int, m: int) -> Proportional:
    """Report value 1 on one item and 0 elsewhere."""
    if not 0 <= item < m:
        raise ValueError(f"item {item} out of range for m = {m}")
    return Proportional(Valuation(tuple(
        Fraction(1) if j == item else Fraction(0) for j in range(m))))


def sequential(order: Sequence[int]) -> Lexicographic:
    """Consume the items of ``order`` one at a time, skipping finished ones."""
    return Lexicographic(tuple(order))


def uniform(items: Iterable[int], m: int) -> Proportional:
    """Report 1/k on each of k target items, 0 elsewhere."""
    targets = sorted(set(items))
    if not targets:
        raise ValueError("uniform bid needs a nonempty item set")
    if targets[0] < 0 or targets[-1] >= m:
        raise ValueError(f"item out of range for m = {m}")
    share = Fraction(1, len(targets))
    return Proportional(Valuation(tuple(
        share if j in set(targets) else Fraction(0) for j in range(m))))


def epsilon_strategy(order: Sequence[int], eps: Fraction, m: int) -> Proportional:
    """A proportional report that approximates ``sequential(order)`` as eps -> 0.

    The head item gets 1 minus the geometric tail, item x_l gets eps**(l-1)
    for l >= 2, so the report is unit-sum by construction. (The l-th power is
    taken with exponent l-1, the only convention that sums to one.)
    """
    eps = Fraction(eps)
    if not Fraction(0) < eps < Fraction(1, 2):
        raise ValueError("eps must lie strictly between 0 and 1/2")
    order = tuple(order)
    if len(set(order)) != len(order) or not order:
        raise ValueError("order must be nonempty and free of duplicates")
    if any(not 0 <= j < m for j in order):
        raise ValueError(f"item out of range for m = {m}")
    k = len(order)
    values = [Fraction(0)] * m
    values[order[0]] = 1 - sum((eps ** ell for ell in range(1, k)), Fraction(0))
    for ell in range(2, k + 1):
        values[order[ell - 1]] = eps ** (ell - 1)
    return Proportional(Valuation(tuple(values)))


def as_ordinal(strategy: Strategy, m: int) -> Lexicographic:
    """The ordinal shadow of a strategy: a full preference order over all items.

    Proportional reports rank items by decreasing value, ties by lowest
    index; zero-valued items sort last, so the order never exhausts and the
    ordinal mechanism never consults the zero policy.
    """
    if isinstance(strategy, Lexicographic):
        rest = tuple(j for j in range(m) if j not in set(strategy.order))
        return Lexicographic(strategy.order + rest)
    return Lexicographic(strategy.report.preference_order())


def ps_profile(profile: Sequence[Strategy], m: int) -> list[Lexicographic]:
    """Convert a profile to the ordinal mechanism's behaviour (favorite-first eating)."""
    return [as_ordinal(s, m) for s in profile]


# ---------------------------------------------------------------------------
# Families. ``expand`` enumerates candidates in the canonical order used by
# best-response search: truthful, single-minded by item, sequential orders
# lexicographically, uniform sets by size then lexicographically, grid points
# lexicographically.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Truthful:
    pass


@dataclass(frozen=True)
class SingleMinded:
    """Every single-item bid."""


@dataclass(frozen=True)
class Sequential:
    """Lexicographic candidates; ``orders=None`` means the deviating agent's
    own decreasing-true-value order and all its prefixes (the greedy orders)."""

    orders: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class Uniform:
    """Uniform-bid candidates; ``sets=None`` means the agent's top-k value
    sets for every k."""

    sets: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class GridProportional:
    """All unit-sum reports with entries that are multiples of 1/resolution.

    Exhaustive best response only makes sense at tiny scale: the family has
    C(resolution + m - 1, m - 1) members.
    """

    resolution: int

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("grid resolution must be positive")


StrategyFamily = Union[Truthful, SingleMinded, Sequential, Uniform, GridProportional]

_FAMILY_RANK = {Truthful: 0, SingleMinded: 1, Sequential: 2, Uniform: 3, GridProportional: 4}


def default_grid_resolution(m: int) -> int:
    # d = 12 is affordable for two items, d = 6 for three; beyond that the
    # closed families above replace exhaustive search.
    if m <= 2:
        return 12
    if m == 3:
        return 6
    raise ValueError("no default grid resolution beyond m = 3; pass one explicitly")


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer vectors of length ``parts`` summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def family_size(family: StrategyFamily, m: int) -> int:
    if isinstance(family, Truthful):
        return 1
    if isinstance(family, SingleMinded):
        return m
    if isinstance(family, Sequential):
        return m if family.orders is None else len(family.orders)
    if isinstance(family, Uniform):
        return m if family.sets is None else len(family.sets)
    return math.comb(family.resolution + m - 1, m - 1)


def expand_family(
    family: StrategyFamily, truth: Valuation, m: int
) -> Iterator[tuple[str, Strategy]]:
    """Yield (label, candidate strategy) pairs in canonical order."""
    if isinstance(family, Truthful):
        yield "truthful", Proportional(truth)
    elif isinstance(family, SingleMinded):
        for j in range(m):
            yield f"single-minded({j + 1})", single_minded(j, m)
    elif isinstance(family, Sequential):
        orders = greedy_orders(truth) if family.orders is None else family.orders
        for order in sorted(orders):
            shown = ",".join(str(j + 1) for j in order)
            yield f"sequential({shown})", sequential(order)
    elif isinstance(family, Uniform):
        sets = top_value_sets(truth) if family.sets is None else family.sets
        for items in sorted(sets, key=lambda s: (len(s), tuple(sorted(s)))):
            shown = ",".join(str(j + 1) for j in sorted(items))
            yield f"uniform({{{shown}}})", uniform(items, m)
    elif isinstance(family, GridProportional):
        d = family.resolution
        for comp in _compositions(d, m):
            report = Valuation(tuple(Fraction(c, d) for c in comp))
            shown = ",".join(str(Fraction(c, d)) for c in comp)
            yield f"grid({shown})", Proportional(report)
    else:
        raise TypeError(f"not a strategy family: {family!r}")


def expand_families(
    families: Sequence[StrategyFamily], truth: Valuation, m: int
) -> Iterator[tuple[str, Strategy]]:
    """Expand several families back to back, in canonical family order."""
    ranked = sorted(families, key=lambda f: _FAMILY_RANK[type(f)])
    for family in ranked:
        yield from expand_family(family, truth, m)


def describe_families(families: Sequence[StrategyFamily], m: int) -> str:
    ranked = sorted(families, key=lambda f: _FAMILY_RANK[type(f)])
    parts = []
    for family in ranked:
        if isinstance(family, Truthful):
            parts.append("truthful")
        elif isinstance(family, SingleMinded):
            parts.append(f"single-minded[all {m} items]")
        elif isinstance(family, Sequential):
            count = "greedy" if family.orders is None else str(len(family.orders))
            parts.append(f"sequential[{count} orders]")
        elif isinstance(family, Uniform):
            count = "top-value" if family.sets is None else str(len(family.sets))
            parts.append(f"uniform[{count} sets]")
        else:
            parts.append(f"grid[d={family.resolution}, {family_size(family, m)} points]")
    return " + ".join(parts)


def greedy_orders(truth: Valuation) -> tuple[tuple[int, ...], ...]:
    """The agent's decreasing-true-value order and all its nonempty prefixes."""
    full = truth.preference_order()
    return tuple(full[:k] for k in range(1, len(full) + 1))


def top_value_sets(truth: Valuation) -> tuple[tuple[int, ...], ...]:
    """Top-k sets by true value for k = 1..m (the uniform-bid candidates)."""
    full = truth.preference_order()
    return tuple(tuple(sorted(full[:k])) for k in range(1, len(full) + 1))
