"""Non-eating mechanisms and the welfare benchmark.

Random Priority samples one agent order and lets each picked agent grab its
quota of favorite available items; Repeated Random Priority draws an agent
uniformly m times in a row, one item per draw. ``opt`` is the benchmark that
hands every item to an agent that values it most.

All tie-breaks are lowest-index. Monte Carlo paths use one child stream per
sample, seeded with ``"eatsim-<mechanism>:<seed>:<sample>"``, so results are
reproducible bit for bit and samples could be drawn in any order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

from .model import Instance, Proportional, Strategy


class ExactEnumerationRefused(ValueError):
    """Exact order enumeration is capped at n = 8 (n! engine sweeps)."""


@dataclass(frozen=True)
class MechanismResult:
    """Outcome summary of a lottery mechanism run.

    ``expected_welfare`` is always an exact rational (for Monte Carlo it is
    the exact mean of the sampled welfares); ``stderr`` is present only for
    Monte Carlo results, alongside the sample count and seed that reproduce
    them.
    """

    mechanism: str
    expected_welfare: Fraction
    per_agent: tuple[Fraction, ...]
    method: str
    samples: int | None = None
    seed: int | None = None
    stderr: float | None = None

    def __post_init__(self):
        exact = self.method == "exact-enumeration"
        if exact and (self.stderr is not None or self.samples is not None):
            raise ValueError("exact results carry no error bars")
        if not exact and (self.samples is None or self.seed is None):
            raise ValueError("Monte Carlo results must carry samples and seed")


def opt(instance: Instance) -> tuple[Fraction, tuple[int, ...]]:
    """Optimal welfare and its assignment: each item to a highest-value agent.

    Ties break to the lowest agent index. Welfare is the sum of column maxima
    of the true valuation matrix.
    """
    assignment = []
    total = Fraction(0)
    for j in range(instance.m):
        best_agent = 0
        best_value = instance.valuations[0][j]
        for i in range(1, instance.n):
            v = instance.valuations[i][j]
            if v > best_value:
                best_agent, best_value = i, v
        assignment.append(best_agent)
        total += best_value
    return total, tuple(assignment)


def _ranking(strategy: Strategy, m: int) -> list[int]:
    # Favorite-first item order induced by a report; zero-value and
    # off-order items sort last by index so a pick never stalls.
    if isinstance(strategy, Proportional):
        return list(strategy.report.preference_order())
    listed = set(strategy.order)
    return list(strategy.order) + [j for j in range(m) if j not in listed]


def _grab(ranking: list[int], available: list[bool], count: int) -> list[int]:
    taken = []
    for j in ranking:
        if available[j]:
            available[j] = False
            taken.append(j)
            if len(taken) == count:
                break
    return taken


def random_priority(
    instance: Instance,
    reports: Sequence[Strategy],
    samples: int | None = None,
    seed: int | None = None,
) -> MechanismResult:
    """Random Priority: a random agent order; each picks its favorite quota.

    The quota is floor(m/n) items per agent, with the m mod n leftover items
    appended to the turn of the order's final agent. With ``samples`` unset
    the result is the exact average over all n! orders (refused for n > 8);
    otherwise ``samples`` seeded orders are drawn.
    """
    n, m = instance.n, instance.m
    if len(reports) != n:
        raise ValueError(f"expected {n} reports, got {len(reports)}")
    rankings = [_ranking(s, m) for s in reports]
    quota = m // n
    leftover = m % n

    def welfare_of_order(order: Sequence[int]) -> tuple[Fraction, list[Fraction]]:
        available = [True] * m
        per_agent = [Fraction(0)] * n
        for pos, agent in enumerate(order):
            count = quota + (leftover if pos == n - 1 else 0)
            for j in _grab(rankings[agent], available, count):
                per_agent[agent] += instance.valuations[agent][j]
        return sum(per_agent, Fraction(0)), per_agent

    if samples is None:
        if n > 8:
            raise ExactEnumerationRefused(f"n = {n} > 8; use the Monte Carlo mode")
        total = Fraction(0)
        per_agent_total = [Fraction(0)] * n
        count = 0
        for order in permutations(range(n)):
            w, per = welfare_of_order(order)
            total += w
            for i in range(n):
                per_agent_total[i] += per[i]
            count += 1
        return MechanismResult(
            mechanism="rp",
            expected_welfare=total / count,
            per_agent=tuple(p / count for p in per_agent_total),
            method="exact-enumeration",
        )

    if seed is None:
        raise ValueError("Monte Carlo mode requires a seed")
    total = Fraction(0)
    per_agent_total = [Fraction(0)] * n
    sumsq = 0.0
    welfares = []
    for k in range(samples):
        rng = random.Random(f"eatsim-rp:{seed}:{k}")
        order = list(range(n))
        rng.shuffle(order)
        w, per = welfare_of_order(order)
        total += w
        welfares.append(w)
        for i in range(n):
            per_agent_total[i] += per[i]
    mean = total / samples
    if samples > 1:
        var = sum((float(w - mean)) ** 2 for w in welfares) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = float("inf")
    return MechanismResult(
        mechanism="rp",
        expected_welfare=mean,
        per_agent=tuple(p / samples for p in per_agent_total),
        method=f"monte-carlo(samples={samples}, seed={seed})",
        samples=samples,
        seed=seed,
        stderr=stderr,
    )


def repeated_random_priority(
    instance: Instance,
    reports: Sequence[Strategy],
    samples: int,
    seed: int,
) -> MechanismResult:
    """Repeated Random Priority: m i.i.d. uniform draws, one favorite item each."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n, m = instance.n, instance.m
    if len(reports) != n:
        raise ValueError(f"expected {n} reports, got {len(reports)}")
    rankings = [_ranking(s, m) for s in reports]

    # Integer fast path: welfare accumulates as numerators over the common
    # denominator of all true values, so 1e5 samples stay exact and cheap.
    denom = math.lcm(*(v.denominator for row in instance.valuations for v in row.values))
    value_int = [[int(v * denom) for v in row.values] for row in instance.valuations]

    total_num = 0
    total_sq = 0
    per_agent_num = [0] * n
    agent_range = range(n)
    for k in range(samples):
        rng = random.Random(f"eatsim-rrp:{seed}:{k}")
        draws = rng.choices(agent_range, k=m)
        available = [True] * m
        pointers = [0] * n
        sample_num = 0
        for agent in draws:
            rank = rankings[agent]
            p = pointers[agent]
            while not available[rank[p]]:
                p += 1
            pointers[agent] = p + 1
            item = rank[p]
            available[item] = False
            gain = value_int[agent][item]
            sample_num += gain
            per_agent_num[agent] += gain
        total_num += sample_num
        total_sq += sample_num * sample_num
    mean = Fraction(total_num, samples * denom)
    if samples > 1:
        mean_f = total_num / samples
        var = (total_sq - samples * mean_f * mean_f) / (samples - 1)
        stderr = math.sqrt(max(var, 0.0) / samples) / denom
    else:
        stderr = float("inf")
    return MechanismResult(
        mechanism="rrp",
        expected_welfare=mean,
        per_agent=tuple(Fraction(p, samples * denom) for p in per_agent_num),
        method=f"monte-carlo(samples={samples}, seed={seed})",
        samples=samples,
        seed=seed,
        stderr=stderr,
    )
