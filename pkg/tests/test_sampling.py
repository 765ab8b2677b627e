import itertools

import numpy as np
import pytest

from qvtlab import gates
from qvtlab.sampling import (
    RngHandle,
    generate_qvt_circuit,
    haar_su4,
    nearest_neighbor_arrangement,
    random_arrangement,
)


def gram_schmidt_haar(gen):
    """Independent oracle: orthonormalize Ginibre columns by modified Gram-Schmidt."""
    z = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    q = np.zeros_like(z)
    for j in range(4):
        v = z[:, j].copy()
        for k in range(j):
            v -= q[:, k] * np.vdot(q[:, k], v)
        q[:, j] = v / np.linalg.norm(v)
    return q


def all_arrangements(n):
    """Brute-force enumeration of perfect matchings (one idle qubit if n odd)."""
    qubits = tuple(range(n))

    def rec(remaining):
        if len(remaining) <= 1:
            yield ()
            return
        a = remaining[0]
        for i in range(1, len(remaining)):
            b = remaining[i]
            rest = remaining[1:i] + remaining[i + 1 :]
            for tail in rec(rest):
                yield ((a, b),) + tail

    if n % 2 == 0:
        yield from rec(qubits)
    else:
        for idle in qubits:
            rest = tuple(q for q in qubits if q != idle)
            yield from rec(rest)


def test_haar_su4_unitary():
    rng = RngHandle(0)
    for _ in range(50):
        u = haar_su4(rng)
        assert gates.is_unitary(u, 1e-12)


def test_haar_trace_moment_matches_gram_schmidt_oracle():
    rng = RngHandle(1)
    n = 100_000
    qr_moment = np.mean([abs(np.trace(haar_su4(rng))) ** 2 for _ in range(n)])
    gen = np.random.default_rng(17)
    gs_moment = np.mean([abs(np.trace(gram_schmidt_haar(gen))) ** 2 for _ in range(20_000)])
    # Haar moment E|Tr U|^2 = 1
    assert abs(qr_moment - 1.0) < 0.02
    assert abs(gs_moment - 1.0) < 0.05
    assert abs(qr_moment - gs_moment) < 0.06


def test_haar_eigenphases_uniform():
    rng = RngHandle(2)
    phases = np.concatenate(
        [np.angle(np.linalg.eigvals(haar_su4(rng))) for _ in range(25_000)]
    )
    xs = np.sort(phases)
    cdf = (xs + np.pi) / (2 * np.pi)
    emp = np.arange(1, len(xs) + 1) / len(xs)
    ks = max(np.max(np.abs(emp - cdf)), np.max(np.abs(emp - 1 / len(xs) - cdf)))
    assert ks < 0.01


def test_haar_left_invariance_moment():
    rng = RngHandle(3)
    w = haar_su4(rng)
    a = np.mean([abs(np.trace(haar_su4(rng))) ** 2 for _ in range(10_000)])
    b = np.mean([abs(np.trace(w @ haar_su4(rng))) ** 2 for _ in range(10_000)])
    assert abs(a - b) < 0.06


def test_random_arrangement_n2():
    rng = RngHandle(4)
    for _ in range(20):
        assert random_arrangement(2, rng) == ((0, 1),)


def test_random_arrangement_uniform_n4():
    rng = RngHandle(5)
    counts = {}
    n = 100_000
    for _ in range(n):
        arr = random_arrangement(4, rng)
        counts[arr] = counts.get(arr, 0) + 1
    assert len(counts) == 3  # f(4) = 3 by enumeration
    for c in counts.values():
        assert abs(c / n - 1 / 3) < 0.01


def test_random_arrangement_idle_uniform_n5():
    rng = RngHandle(6)
    n = 100_000
    idle_counts = np.zeros(5)
    for _ in range(n):
        arr = random_arrangement(5, rng)
        used = {q for p in arr for q in p}
        (idle,) = set(range(5)) - used
        idle_counts[idle] += 1
    assert np.all(np.abs(idle_counts / n - 0.2) < 0.01)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_arrangement_uniformity_chi_square(n):
    support = list(all_arrangements(n))
    rng = RngHandle(100 + n)
    trials = 3000 * len(support) // 3
    counts = dict.fromkeys(support, 0)
    for _ in range(trials):
        counts[random_arrangement(n, rng)] += 1
    assert set(counts) == set(support)
    expected = trials / len(support)
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    dof = len(support) - 1
    # 5-sigma-ish bound: chi2 mean dof, std sqrt(2 dof)
    assert chi2 < dof + 5 * max(1.0, (2 * dof) ** 0.5)


def test_generate_qvt2_structure():
    circ = generate_qvt_circuit(2, RngHandle(7))
    assert len(circ.rounds) == 2
    for rnd in circ.rounds:
        assert rnd.pairs == ((0, 1),)
        assert len(rnd.blocks) == 1


def test_first_round_nearest_neighbor():
    assert nearest_neighbor_arrangement(6) == ((0, 1), (2, 3), (4, 5))
    for n in (4, 5, 7):
        circ = generate_qvt_circuit(n, RngHandle(8 + n))
        assert circ.rounds[0].pairs == nearest_neighbor_arrangement(n)


def test_same_qubit_idles_every_round_rate():
    # paper-reported rate 1/N^(N-1); N=3 binomial check at 3 sigma
    rng = RngHandle(9)
    n_circ = 5000
    hits = 0
    for i in range(n_circ):
        circ = generate_qvt_circuit(3, rng.substream(i))
        idles = [rnd.idle for rnd in circ.rounds]
        if all(q == idles[0] for q in idles):
            hits += 1
    p = 1 / 9
    sigma = (p * (1 - p) / n_circ) ** 0.5
    assert abs(hits / n_circ - p) < 3 * sigma


def test_fixed_seed_reproducible():
    a = generate_qvt_circuit(4, RngHandle(42))
    b = generate_qvt_circuit(4, RngHandle(42))
    assert a.rounds[2].pairs == b.rounds[2].pairs
    for ra, rb in zip(a.rounds, b.rounds):
        for ba, bb in zip(ra.blocks, rb.blocks):
            assert np.array_equal(ba, bb)


def test_substreams_order_independent():
    base = RngHandle(11)
    direct = base.substream(5).generator.standard_normal(4)
    other = RngHandle(11)
    other.substream(3).generator.standard_normal(10)  # consume an unrelated stream
    again = other.substream(5).generator.standard_normal(4)
    assert np.array_equal(direct, again)
