"""Event-driven simulation of the simultaneous-consumption process.

Both eating mechanisms are runs of the same engine: the cardinal mechanism is
a profile of Proportional strategies, the ordinal one a profile of
Lexicographic strategies (see :func:`eatsim.strategies.ps_profile`). Within a
segment the remaining-item set is constant, so rates are constant and every
depletion time is an exact rational.

The inner loop lives in a kernel selected at import time: the compiled
extension ``eatsim._speedups`` when built, otherwise the pure-Python twin
``eatsim._kernel``. Set ``EATSIM_PURE=1`` to force the fallback. Both produce
bit-identical exact results.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import (
    LOWEST_INDEX_FIRST,
    Proportional,
    Strategy,
    Valuation,
    ZeroPolicy,
    check_profile,
    decimal_str,
    format_rational,
)

from . import _kernel as _pure_kernel

if os.environ.get("EATSIM_PURE") == "1":
    _kernel_impl = _pure_kernel
else:
    try:
        from . import _speedups as _kernel_impl  # type: ignore[no-redef]
    except ImportError:
        _kernel_impl = _pure_kernel


def kernel_name() -> str:
    """Which eating kernel this process is using ('compiled' or 'pure-python')."""
    return _kernel_impl.KERNEL_NAME


@dataclass(frozen=True)
class Segment:
    """A maximal interval with a constant remaining-item set and constant rates."""

    start: Fraction
    end: Fraction
    rates: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class Trace:
    """Full consumption history of one run.

    ``depletion_events`` lists (time, item) in chronological order with ties
    broken by item index; every item appears exactly once and the last event
    is at exactly ``horizon`` = m/n. ``shares`` is the n x m matrix of total
    consumed quantities, which doubles as the allocation lottery.
    """

    n: int
    m: int
    segments: tuple[Segment, ...]
    depletion_events: tuple[tuple[Fraction, int], ...]
    shares: tuple[tuple[Fraction, ...], ...]
    horizon: Fraction

    def consumption_time(self, item: int) -> Fraction:
        """First instant the item's remaining quantity hits zero."""
        for time, j in self.depletion_events:
            if j == item:
                return time
        raise IndexError(f"item {item} not in trace")

    def consumption_times(self) -> tuple[Fraction, ...]:
        """Depletion time per item, indexed by item."""
        times = [None] * self.m
        for time, j in self.depletion_events:
            times[j] = time
        return tuple(times)

    def remaining_at(self, t: Fraction) -> frozenset[int]:
        """Items with positive remaining quantity at time t."""
        return frozenset(j for time, j in self.depletion_events if time > t)


@dataclass(frozen=True)
class Lottery:
    """Marginal assignment probabilities: item j goes to agent i w.p. marginals[i][j]."""

    marginals: tuple[tuple[Fraction, ...], ...]
    trace: Trace | None = None


def compute_rates(
    profile: Sequence[Strategy],
    remaining: Sequence[int] | frozenset[int],
    policy: ZeroPolicy,
    m: int,
) -> list[list[Fraction]]:
    """Instantaneous consumption rates given the remaining-item set.

    A Proportional agent with positive value on some remaining item splits
    rate 1 over the remaining items in proportion to its report; a
    Lexicographic agent puts rate 1 on the first item of its order that is
    still remaining. Agents with nothing left to chase follow the zero policy.
    Every row sums to exactly 1.
    """
    rem = sorted(remaining)
    if not rem:
        raise ValueError("remaining item set is empty")
    alive = [False] * m
    for j in rem:
        alive[j] = True
    rates = []
    zero = Fraction(0)
    for strat in profile:
        row = [zero] * m
        if isinstance(strat, Proportional):
            total = sum((strat.report[j] for j in rem), zero)
            if total > 0:
                for j in rem:
                    if strat.report[j]:
                        row[j] = strat.report[j] / total
                rates.append(row)
                continue
        else:
            target = next((j for j in strat.order if alive[j]), None)
            if target is not None:
                row[target] = Fraction(1)
                rates.append(row)
                continue
        if policy.kind == "uniform":
            share = Fraction(1, len(rem))
            for j in rem:
                row[j] = share
        elif policy.kind == "lowest-index":
            row[rem[0]] = Fraction(1)
        else:
            row[next(j for j in policy.order if alive[j])] = Fraction(1)
        rates.append(row)
    return rates


def _integer_weights(report: Valuation) -> list[int]:
    scale = math.lcm(*(v.denominator for v in report.values))
    return [int(v * scale) for v in report.values]


def run(
    n: int,
    m: int,
    profile: Sequence[Strategy],
    policy: ZeroPolicy = LOWEST_INDEX_FIRST,
    include_segments: bool = True,
) -> Trace:
    """Run the eating process to completion and return its exact trace.

    The loop advances segment by segment: rates are constant until the next
    depletion, all items hitting zero simultaneously deplete together, and
    items with zero total rate simply persist. Terminates after at most m
    segments, at time exactly m/n.

    ``include_segments=False`` returns a trace with an empty segment list
    (events and shares only); wrapping the per-segment rate matrices
    dominates the cost of a run, so bulk sweeps that only need payoffs skip
    it.
    """
    check_profile(n, m, profile)
    if policy.kind == "fixed" and len(policy.order) != m:
        raise ValueError(f"fixed zero policy must order all {m} items")
    kinds = []
    weights = []
    orders = []
    for strat in profile:
        if isinstance(strat, Proportional):
            kinds.append(0)
            weights.append(_integer_weights(strat.report))
            orders.append([])
        else:
            kinds.append(1)
            weights.append([])
            orders.append(list(strat.order))
    policy_kind = {"uniform": 0, "lowest-index": 1, "fixed": 2}[policy.kind]
    policy_order = list(policy.order) if policy.order else []

    raw_segments, raw_events, raw_gamma = _kernel_impl.run_eating(
        n, m, kinds, weights, orders, policy_kind, policy_order, include_segments)

    segments = tuple(
        Segment(
            Fraction(t0[0], t0[1]),
            Fraction(t1[0], t1[1]),
            tuple(tuple(Fraction(num, den) for num, den in row) for row in rates),
        )
        for t0, t1, rates in raw_segments
    )
    events = tuple((Fraction(num, den), j) for num, den, j in raw_events)
    shares = tuple(tuple(Fraction(num, den) for num, den in row) for row in raw_gamma)
    return Trace(n, m, segments, events, shares, Fraction(m, n))


def consumption_time(trace: Trace, item: int) -> Fraction:
    return trace.consumption_time(item)


def lottery_from_trace(trace: Trace) -> Lottery:
    return Lottery(trace.shares, trace)


def expected_payoffs(
    trace_or_lottery: Trace | Lottery,
    true_valuations: Sequence[Valuation],
) -> tuple[Fraction, ...]:
    """Per-agent expected payoff sum_j shares[i][j] * v'_i(j).

    Valuations are additive, so the lottery marginals fully determine the
    expected payoff.
    """
    shares = (trace_or_lottery.shares if isinstance(trace_or_lottery, Trace)
              else trace_or_lottery.marginals)
    if len(true_valuations) != len(shares):
        raise ValueError("valuation count does not match trace")
    payoffs = []
    for row, valuation in zip(shares, true_valuations):
        if len(valuation) != len(row):
            raise ValueError("valuation length does not match trace")
        payoffs.append(sum((g * valuation[j] for j, g in enumerate(row) if g), Fraction(0)))
    return tuple(payoffs)


def welfare(trace_or_lottery: Trace | Lottery, true_valuations: Sequence[Valuation]) -> Fraction:
    return sum(expected_payoffs(trace_or_lottery, true_valuations), Fraction(0))


def sample_allocation(lottery: Lottery, seed: int) -> tuple[int, ...]:
    """Draw one assignment (agent per item) from the lottery's marginals.

    Each item is assigned independently by its marginal column. Deterministic
    given the seed: a single stream seeded with ``"eatsim-alloc:<seed>"``
    draws the items in index order, each by one exact integer draw against
    the column's common denominator.
    """
    marginals = lottery.marginals
    n = len(marginals)
    m = len(marginals[0])
    rng = random.Random(f"eatsim-alloc:{seed}")
    assignment = []
    for j in range(m):
        column = [marginals[i][j] for i in range(n)]
        denom = math.lcm(*(c.denominator for c in column))
        weights = [int(c * denom) for c in column]
        if sum(weights) != denom:
            raise ValueError(f"column {j + 1} of the lottery does not sum to 1")
        pick = rng.randrange(denom)
        acc = 0
        for i, w in enumerate(weights):
            acc += w
            if pick < acc:
                assignment.append(i)
                break
    return tuple(assignment)


def trace_to_json(trace: Trace, decimals: bool = False) -> dict:
    """Exact JSON export; optional decimal block is display-only and flagged."""
    doc: dict = {
        "n": trace.n,
        "m": trace.m,
        "horizon": format_rational(trace.horizon),
        "depletion_events": [
            {"time": format_rational(t), "item": j + 1} for t, j in trace.depletion_events
        ],
        "shares": [[format_rational(g) for g in row] for row in trace.shares],
        "segments": [
            {
                "start": format_rational(seg.start),
                "end": format_rational(seg.end),
                "rates": [[format_rational(r) for r in row] for row in seg.rates],
            }
            for seg in trace.segments
        ],
    }
    if decimals:
        doc["decimal_approx"] = {
            "note": "approximate rendering; exact values are the rational strings",
            "depletion_events": [
                {"time": decimal_str(t), "item": j + 1} for t, j in trace.depletion_events
            ],
            "shares": [[decimal_str(g) for g in row] for row in trace.shares],
        }
    return doc
