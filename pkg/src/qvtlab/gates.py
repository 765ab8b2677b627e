"""Fixed gate matrices and dense embedding helpers.

Two-qubit matrices act on a pair ``(a, b)`` in the basis ``|x_b x_a>``
(index ``2*x_b + x_a``; the first-listed pair qubit is the low bit).
``CNOT`` below has control on the pair's second qubit ``b`` and target on
``a``, matching the GateOp convention ``qubits=(target, control)`` used by
the compiler.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)

# Control = high bit (pair qubit b), target = low bit (pair qubit a).
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex
    )


def rxx(theta: float) -> np.ndarray:
    """exp(-i theta XX / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return c * np.eye(4, dtype=complex) - 1j * s * XX


def ryy(theta: float) -> np.ndarray:
    """exp(-i theta YY / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return c * np.eye(4, dtype=complex) - 1j * s * YY


def rzz(theta: float) -> np.ndarray:
    """exp(-i theta ZZ / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return c * np.eye(4, dtype=complex) - 1j * s * ZZ


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    """Operator-norm unitarity check ||U^dag U - I|| <= tol."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    delta = m.conj().T @ m - np.eye(m.shape[0])
    return float(np.linalg.norm(delta, ord=2)) <= tol


def closest_unitary(m: np.ndarray) -> np.ndarray:
    """Polar projection onto the unitary group (via SVD)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def phase_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U^dag V)| / dim, the phase-insensitive overlap in [0, 1]."""
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) / d)


def apply_one_qubit(state: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 matrix to qubit q of a 2^n statevector (qubit 0 = LSB)."""
    t = state.reshape([2] * n)
    axis = n - 1 - q
    t = np.moveaxis(t, axis, -1)
    t = t @ m.T
    return np.moveaxis(t, -1, axis).reshape(-1)


def apply_two_qubit(
    state: np.ndarray, m4: np.ndarray, qa: int, qb: int, n: int
) -> np.ndarray:
    """Apply a 4x4 matrix to qubits (qa, qb); qa is the low bit of m4's index."""
    t = state.reshape([2] * n)
    ax_a, ax_b = n - 1 - qa, n - 1 - qb
    t = np.moveaxis(t, (ax_b, ax_a), (-2, -1))
    t = t.reshape(t.shape[:-2] + (4,)) @ m4.T
    t = t.reshape(t.shape[:-1] + (2, 2))
    return np.moveaxis(t, (-2, -1), (ax_b, ax_a)).reshape(-1)


def embed_two_qubit(m4: np.ndarray, qa: int, qb: int, n: int) -> np.ndarray:
    """Dense 2^n x 2^n embedding of a pair gate (identity elsewhere)."""
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[col] = 1.0
        full[:, col] = apply_two_qubit(e, m4, qa, qb, n)
    return full


def embed_one_qubit(m: np.ndarray, q: int, n: int) -> np.ndarray:
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[col] = 1.0
        full[:, col] = apply_one_qubit(e, m, q, n)
    return full


def permutation_matrix(relabel: tuple[int, ...]) -> np.ndarray:
    """Basis permutation for output relabeling.

    ``relabel[i]`` is the physical wire that carries logical qubit ``i``;
    the returned R satisfies ``(R v)[y] = v[x]`` where bit i of y equals
    bit relabel[i] of x.
    """
    n = len(relabel)
    dim = 2**n
    r = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        y = 0
        for i in range(n):
            y |= ((x >> relabel[i]) & 1) << i
        r[y, x] = 1.0
    return r


def relabel_distribution(probs: np.ndarray, relabel: tuple[int, ...]) -> np.ndarray:
    """Permute a length-2^n distribution so logical bit i reads physical wire relabel[i]."""
    n = len(relabel)
    if all(relabel[i] == i for i in range(n)):
        return probs
    t = probs.reshape([2] * n)
    # new axis for logical qubit i (position n-1-i) comes from physical axis n-1-relabel[i]
    axes = [n - 1 - relabel[n - 1 - pos] for pos in range(n)]
    return np.transpose(t, axes).reshape(-1)
