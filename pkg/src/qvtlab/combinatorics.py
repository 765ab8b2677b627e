"""Closed-form expected two-qubit gate counts for the block-combine pass.

Counts arrangements (perfect matchings of the complete graph), arrangements
with no pair repeated from a reference round, and arrangements with exactly
M repeats, then combines them into the expected number of two-qubit gates
after opportunistically merging consecutive same-pair blocks.

Exact integer arithmetic throughout; only the final expectations are
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from functools import lru_cache
from math import comb, factorial

from qvtlab.sampling import RngHandle, nearest_neighbor_arrangement, random_arrangement


@lru_cache(maxsize=None)
def f_arrangements(n: int) -> int:
    """Number of arrangements of n qubits: n! / (2^floor(n/2) floor(n/2)!)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    half = n // 2
    return factorial(n) // (2**half * factorial(half))


@lru_cache(maxsize=None)
def g_no_repeats(n: int) -> int:
    """Arrangements sharing no pair with a fixed reference arrangement.

    Inclusion-exclusion over the floor(n/2) reference pairs.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    half = n // 2
    return sum(
        (-1) ** k * comb(half, k) * f_arrangements(n - 2 * k) for k in range(half + 1)
    )


def h_exact_repeats(n: int, m: int) -> int:
    """Arrangements sharing exactly m pairs with a fixed reference."""
    half = n // 2
    if not 0 <= m <= half:
        raise ValueError(f"m={m} out of range for n={n}")
    return comb(half, m) * g_no_repeats(n - 2 * m)


def expected_tq_gates(n: int) -> float:
    """Expected two-qubit gates in a QVT_N circuit after block combining.

    First round costs 3*floor(n/2); each of the n-1 following rounds adds
    3*(floor(n/2) - k) gates with probability h(n,k)/f(n) of repeating
    exactly k pairs.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    half = n // 2
    fn = f_arrangements(n)
    new_pairs = sum(h_exact_repeats(n, k) * (half - k) for k in range(half + 1))
    return 3 * half + 3 * (n - 1) * new_pairs / fn


def expected_rounds(n: int) -> float:
    """Effective SU(4) rounds after combining: expected_tq / (3 floor(n/2))."""
    return expected_tq_gates(n) / (3 * (n // 2))


def savings_ratio(n: int) -> float:
    """Combined-to-uncombined two-qubit gate ratio, (N-1)/N for even N."""
    return expected_tq_gates(n) / (3 * (n // 2) * n)


def monte_carlo_savings(
    n: int, trials: int, rng: RngHandle
) -> tuple[float, float]:
    """Sample mean and standard deviation of the combined two-qubit gate count.

    Simulates random arrangement sequences (first round nearest-neighbor,
    matching circuit generation) and counts 3 gates per pair that differs
    from the previous round.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    half = n // 2
    total = 0.0
    total_sq = 0.0
    for _ in range(trials):
        gates = 3 * half
        prev = set(nearest_neighbor_arrangement(n))
        for _ in range(n - 1):
            cur = set(random_arrangement(n, rng))
            gates += 3 * len(cur - prev)
            prev = cur
        total += gates
        total_sq += gates * gates
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    return mean, var**0.5


@dataclass(frozen=True)
class GateCountReport:
    n: int
    f: int
    expected_tq: float
    expected_rounds: float
    savings_ratio: float
    std_dev: float

    def to_dict(self) -> dict:
        return asdict(self)


def gate_count_report(n: int, trials: int = 10_000, seed: int = 0) -> GateCountReport:
    """Closed-form expectations plus a Monte Carlo spread of the savings ratio."""
    _, std = monte_carlo_savings(n, trials, RngHandle(seed))
    return GateCountReport(
        n=n,
        f=f_arrangements(n),
        expected_tq=expected_tq_gates(n),
        expected_rounds=expected_rounds(n),
        savings_ratio=savings_ratio(n),
        std_dev=std / (3 * (n // 2) * n),
    )
