"""The compiled kernel must be a bit-identical twin of the pure one."""

import pytest

from eatsim import _kernel
from eatsim.engine import _integer_weights, kernel_name
from eatsim.model import Lexicographic, Proportional

from helpers import random_run_case, rng_for

try:
    from eatsim import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(_speedups is None, reason="compiled kernel not built")


def _kernel_args(n, m, profile, policy):
    kinds, weights, orders = [], [], []
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
    return n, m, kinds, weights, orders, policy_kind, list(policy.order or [])


def test_kernel_name_reports_selection():
    assert kernel_name() in ("pure-python", "compiled")


@needs_compiled
def test_exact_parity_on_mixed_corpus():
    rng = rng_for("kernel-parity")
    for _ in range(250):
        n, m, _, profile, policy = random_run_case(rng)
        args = _kernel_args(n, m, profile, policy)
        assert _kernel.run_eating(*args) == _speedups.run_eating(*args)


@needs_compiled
def test_parity_without_segment_output():
    rng = rng_for("kernel-parity-lean")
    for _ in range(60):
        n, m, _, profile, policy = random_run_case(rng)
        args = _kernel_args(n, m, profile, policy) + (False,)
        pure = _kernel.run_eating(*args)
        fast = _speedups.run_eating(*args)
        assert pure == fast
        assert pure[0] == []


@needs_compiled
def test_parity_includes_fixed_policy_and_prefix_orders():
    rng = rng_for("kernel-parity-fixed")
    from eatsim.model import fixed_order_policy
    for _ in range(60):
        n, m = rng.randint(2, 6), rng.randint(2, 6)
        # lexicographic prefixes force the zero policy to fire
        profile = [Lexicographic(tuple(rng.sample(range(m), 1))) for _ in range(n)]
        policy = fixed_order_policy(rng.sample(range(m), m))
        args = _kernel_args(n, m, profile, policy)
        assert _kernel.run_eating(*args) == _speedups.run_eating(*args)
