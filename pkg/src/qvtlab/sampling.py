"""Seeded sampling of Haar SU(4) blocks, random arrangements, and QVT circuits.

Reproducibility contract: every sample sequence is a pure function of the
handle's seed.  Substreams are derived from (seed, index) through numpy's
``SeedSequence`` spawn keys, so parallel circuit generation is
order-independent and thread-count-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qvtlab.model import QvtCircuit, Round


@dataclass
class RngHandle:
    """Single-owner random stream with deterministic substream derivation."""

    seed: int
    spawn_key: tuple[int, ...] = ()

    def __post_init__(self):
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        )

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, *key: int) -> "RngHandle":
        """Independent child stream; same (seed, key) always gives the same stream."""
        return RngHandle(self.seed, self.spawn_key + tuple(int(k) for k in key))


def haar_su4(rng: RngHandle) -> np.ndarray:
    """Haar-random 4x4 unitary via QR of a complex Ginibre matrix.

    The diagonal of R is normalized to positive reals, which removes the
    QR phase ambiguity and makes the distribution exactly Haar on U(4).
    """
    gen = rng.generator
    z = (gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_arrangement(n: int, rng: RngHandle) -> tuple[tuple[int, int], ...]:
    """Uniform random arrangement: a perfect matching of {0..n-1}.

    For odd n the idle qubit is drawn uniformly first; the remaining even
    set is matched by repeatedly pairing its lowest qubit with a uniformly
    random other.  Both steps are exchangeable, so the arrangement is
    uniform over all n!/(2^floor(n/2) floor(n/2)!) possibilities.
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    gen = rng.generator
    remaining = list(range(n))
    if n % 2 == 1:
        idle = int(gen.integers(n))
        remaining.remove(idle)
    pairs = []
    while remaining:
        a = remaining.pop(0)
        b = remaining.pop(int(gen.integers(len(remaining))))
        pairs.append((a, b))
    return tuple(pairs)


def nearest_neighbor_arrangement(n: int) -> tuple[tuple[int, int], ...]:
    """First-round pairing (0,1),(2,3),...; for odd n qubit n-1 idles."""
    return tuple((q, q + 1) for q in range(0, n - 1, 2))


def _idle_of(pairs: tuple[tuple[int, int], ...], n: int) -> int | None:
    if n % 2 == 0:
        return None
    used = {q for p in pairs for q in p}
    return next(q for q in range(n) if q not in used)


def _build_round(pairs: tuple[tuple[int, int], ...], n: int, rng: RngHandle) -> Round:
    blocks = tuple(haar_su4(rng) for _ in pairs)
    return Round(pairs=pairs, blocks=blocks, idle=_idle_of(pairs, n))


def generate_qvt_circuit(n: int, rng: RngHandle) -> QvtCircuit:
    """Standard QVT_N circuit: n rounds, the first pairing nearest neighbors.

    Haar SU(4) blocks are drawn fresh for every pair (no pre-generated
    block pool).
    """
    return generate_layered_circuit(n, n, rng)


def generate_layered_circuit(n: int, depth: int, rng: RngHandle) -> QvtCircuit:
    """QVT-style circuit with an arbitrary number of rounds.

    Depths other than n are used for convergence diagnostics only; they
    fail the square-circuit check in ``model.validate``.
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    if depth < 1:
        raise ValueError("need at least one round")
    rounds = [_build_round(nearest_neighbor_arrangement(n), n, rng)]
    for _ in range(depth - 1):
        rounds.append(_build_round(random_arrangement(n, rng), n, rng))
    return QvtCircuit(width=n, seed=rng.seed, rounds=tuple(rounds))
