"""Pure-Python eating kernel.

Reference implementation of the simultaneous-consumption event loop. A
Cython twin (``eatsim._speedups``) implements the identical algorithm on raw
integer numerator/denominator pairs; whichever is available is selected by
``eatsim.engine`` at import time. Both kernels speak the same primitive
interface so their outputs can be compared for exact equality:

inputs
    n, m            problem size
    kinds           per agent: 0 = proportional, 1 = lexicographic
    weights         per proportional agent: m nonnegative ints (a scaled
                    report; only ratios matter), else an empty list
    orders          per lexicographic agent: 0-based item indices, else []
    policy_kind     0 = uniform, 1 = lowest-index, 2 = fixed
    policy_order    permutation of range(m) when policy_kind == 2

outputs (all rationals as reduced ``(num, den)`` int pairs, den > 0)
    segments        list of (t_start, t_end, rates) with rates an n x m matrix
    events          list of (num, den, item), chronological, ties by item
    gamma           n x m matrix of total consumption shares
"""

from __future__ import annotations

from fractions import Fraction

KERNEL_NAME = "pure-python"

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _zero_policy_row(policy_kind, policy_order, remaining, alive, m):
    row = [_ZERO] * m
    if policy_kind == 0:
        share = Fraction(1, len(remaining))
        for j in remaining:
            row[j] = share
    elif policy_kind == 1:
        row[remaining[0]] = _ONE
    else:
        for j in policy_order:
            if alive[j]:
                row[j] = _ONE
                break
    return row


def _segment_rates(n, m, kinds, weights, orders, policy_kind, policy_order,
                   remaining, alive):
    rates = []
    for i in range(n):
        if kinds[i] == 0:
            w = weights[i]
            total = 0
            for j in remaining:
                total += w[j]
            if total:
                row = [_ZERO] * m
                for j in remaining:
                    if w[j]:
                        row[j] = Fraction(w[j], total)
                rates.append(row)
                continue
        else:
            target = -1
            for j in orders[i]:
                if alive[j]:
                    target = j
                    break
            if target >= 0:
                row = [_ZERO] * m
                row[target] = _ONE
                rates.append(row)
                continue
        rates.append(_zero_policy_row(policy_kind, policy_order, remaining, alive, m))
    return rates


def run_eating(n, m, kinds, weights, orders, policy_kind, policy_order,
               want_segments=True):
    q = [_ONE] * m
    alive = [True] * m
    remaining = list(range(m))
    t = _ZERO
    gamma = [[_ZERO] * m for _ in range(n)]
    segments = []
    events = []

    while remaining:
        rates = _segment_rates(n, m, kinds, weights, orders,
                               policy_kind, policy_order, remaining, alive)
        dt = None
        totals = [_ZERO] * m
        for j in remaining:
            total = _ZERO
            for i in range(n):
                total += rates[i][j]
            totals[j] = total
            if total > 0:
                candidate = q[j] / total
                if dt is None or candidate < dt:
                    dt = candidate
        # Some remaining item always has positive total rate: each of the n
        # agents eats at total rate exactly 1.
        assert dt is not None
        t_next = t + dt
        for i in range(n):
            row = rates[i]
            acc = gamma[i]
            for j in remaining:
                r = row[j]
                if r:
                    acc[j] += r * dt
        still = []
        for j in remaining:
            if totals[j] > 0:
                q[j] -= totals[j] * dt
            if q[j] == 0:
                alive[j] = False
                events.append((t_next.numerator, t_next.denominator, j))
            else:
                still.append(j)
        if want_segments:
            segments.append((
                (t.numerator, t.denominator),
                (t_next.numerator, t_next.denominator),
                [[(r.numerator, r.denominator) for r in row] for row in rates],
            ))
        remaining = still
        t = t_next

    gamma_pairs = [[(g.numerator, g.denominator) for g in row] for row in gamma]
    return segments, events, gamma_pairs
