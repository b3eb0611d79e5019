# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled eating kernel: the twin of ``eatsim._kernel``.

Same algorithm, same primitive interface, bit-identical output. The speedup
comes from doing the rational arithmetic on raw Python-int numerator and
denominator pairs (one gcd reduction per operation) inside C-level loops
instead of going through Fraction objects. Arbitrary precision is preserved:
all numerators and denominators stay Python ints.
"""

from math import gcd

KERNEL_NAME = "compiled"


def run_eating(int n, int m, list kinds, list weights, list orders,
               int policy_kind, list policy_order, bint want_segments=True):
    cdef int i, j, k, target, cnt
    cdef list qn = [1] * m
    cdef list qd = [1] * m
    cdef list alive = [True] * m
    cdef list remaining = list(range(m))
    cdef list still, rn, rd, row_n, row_d, w, order
    cdef list totn = [0] * m
    cdef list totd = [1] * m
    tn, td = 0, 1
    gamma_n = [[0] * m for _ in range(n)]
    gamma_d = [[1] * m for _ in range(n)]
    segments = []
    events = []

    while remaining:
        # --- rates for this segment ---------------------------------------
        rn = [[0] * m for _ in range(n)]
        rd = [[1] * m for _ in range(n)]
        for i in range(n):
            row_n = rn[i]
            row_d = rd[i]
            if kinds[i] == 0:
                w = weights[i]
                total = 0
                for j in remaining:
                    total += w[j]
                if total:
                    for j in remaining:
                        wj = w[j]
                        if wj:
                            g = gcd(wj, total)
                            row_n[j] = wj // g
                            row_d[j] = total // g
                    continue
            else:
                target = -1
                order = orders[i]
                for k in range(len(order)):
                    j = order[k]
                    if alive[j]:
                        target = j
                        break
                if target >= 0:
                    row_n[target] = 1
                    continue
            # zero policy: the agent values nothing that remains
            if policy_kind == 0:
                cnt = len(remaining)
                for j in remaining:
                    row_n[j] = 1
                    row_d[j] = cnt
            elif policy_kind == 1:
                row_n[remaining[0]] = 1
            else:
                for k in range(len(policy_order)):
                    j = policy_order[k]
                    if alive[j]:
                        row_n[j] = 1
                        break

        # --- total rate per item and the segment length -------------------
        dtn = None
        dtd = 1
        for j in remaining:
            an, ad = 0, 1
            for i in range(n):
                bn = rn[i][j]
                if bn:
                    bd = rd[i][j]
                    an = an * bd + bn * ad
                    ad = ad * bd
                    g = gcd(an, ad)
                    if g > 1:
                        an //= g
                        ad //= g
            totn[j] = an
            totd[j] = ad
            if an:
                cn = qn[j] * ad
                cd = qd[j] * an
                if dtn is None or cn * dtd < dtn * cd:
                    g = gcd(cn, cd)
                    dtn = cn // g
                    dtd = cd // g
        assert dtn is not None

        nn = tn * dtd + dtn * td
        nd = td * dtd
        g = gcd(nn, nd)
        t_next_n = nn // g
        t_next_d = nd // g

        # --- integrate gamma over the segment ------------------------------
        for i in range(n):
            row_n = rn[i]
            row_d = rd[i]
            grow_n = gamma_n[i]
            grow_d = gamma_d[i]
            for j in remaining:
                bn = row_n[j]
                if bn:
                    bd = row_d[j] * dtd
                    bn = bn * dtn
                    an = grow_n[j] * bd + bn * grow_d[j]
                    ad = grow_d[j] * bd
                    g = gcd(an, ad)
                    grow_n[j] = an // g
                    grow_d[j] = ad // g

        # --- advance quantities, collect depletions ------------------------
        still = []
        for j in remaining:
            an = totn[j]
            if an:
                bn = an * dtn
                bd = totd[j] * dtd
                cn = qn[j] * bd - bn * qd[j]
                cd = qd[j] * bd
                if cn == 0:
                    qn[j] = 0
                    qd[j] = 1
                else:
                    g = gcd(cn, cd)
                    qn[j] = cn // g
                    qd[j] = cd // g
            if qn[j] == 0:
                alive[j] = False
                events.append((t_next_n, t_next_d, j))
            else:
                still.append(j)
        if want_segments:
            segments.append((
                (tn, td),
                (t_next_n, t_next_d),
                [[(rn[i][j], rd[i][j]) for j in range(m)] for i in range(n)],
            ))
        remaining = still
        tn, td = t_next_n, t_next_d

    gamma_pairs = [[(gamma_n[i][j], gamma_d[i][j]) for j in range(m)] for i in range(n)]
    return segments, events, gamma_pairs
