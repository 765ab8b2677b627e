"""Core circuit data types, validation, serialization, and the dense unitary oracle.

A ``QvtCircuit`` is the logical object: ``width`` rounds of qubit pairings,
each pair carrying a 4x4 unitary block.  A ``CompiledCircuit`` is a flat
gate list produced by the transpiler, together with the output relabeling
accumulated from mirrored (SWAP-absorbing) blocks.

Serialization writes floats with 17 significant digits, enough for exact
round-trips of IEEE doubles; matrices that come back slightly non-unitary
(within 1e-8) are re-projected by polar decomposition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from qvtlab import gates

UNITARITY_TOL = 1e-10
REPROJECT_TOL = 1e-8
MAX_DENSE_WIDTH = 10

SQ_KINDS = ("SQ",)
TQ_KINDS = ("CNOT", "RXX", "RYY", "RZZ")
ROTATION_KINDS = ("RXX", "RYY", "RZZ")
GATE_KINDS = SQ_KINDS + TQ_KINDS + ("MEASURE_ALL",)


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Round:
    """One round of a QVT circuit: disjoint qubit pairs with their SU(4) blocks.

    ``pairs[j] = (a, b)`` lists the pair's low-bit qubit first; ``blocks[j]``
    is the 4x4 unitary on that pair.  ``idle`` is the unpaired qubit for odd
    widths, None otherwise.
    """

    pairs: tuple[tuple[int, int], ...]
    blocks: tuple[np.ndarray, ...]
    idle: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(_freeze(b) for b in self.blocks))
        object.__setattr__(
            self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs)
        )


@dataclass(frozen=True)
class QvtCircuit:
    width: int
    seed: int
    rounds: tuple[Round, ...]

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))


@dataclass(frozen=True)
class GateOp:
    """One compiled gate.

    kinds: SQ (2x2 ``matrix`` on ``qubits[0]``), CNOT (``qubits = (target,
    control)``), RXX/RYY/RZZ (angle ``theta`` on ``qubits``), MEASURE_ALL.
    """

    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.matrix is not None:
            object.__setattr__(self, "matrix", _freeze(self.matrix))


@dataclass(frozen=True)
class CompiledCircuit:
    """Flat gate list plus the qubit relabeling applied to measurement outputs.

    ``output_relabeling[i]`` is the physical wire holding logical qubit i;
    applying the gates and then the relabeling reproduces the source
    circuit's unitary (up to global phase and the compile tolerance).
    """

    width: int
    gates: tuple[GateOp, ...]
    output_relabeling: tuple[int, ...] = ()
    source_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        relabel = self.output_relabeling or tuple(range(self.width))
        object.__setattr__(self, "output_relabeling", tuple(int(i) for i in relabel))


Circuit = Union[QvtCircuit, CompiledCircuit]


def gate_matrix(op: GateOp) -> np.ndarray:
    """4x4 (or 2x2 for SQ) matrix of a gate in the pair basis |x_b x_a>."""
    if op.kind == "SQ":
        return np.asarray(op.matrix)
    if op.kind == "CNOT":
        return gates.CNOT
    if op.kind == "RXX":
        return gates.rxx(op.theta)
    if op.kind == "RYY":
        return gates.ryy(op.theta)
    if op.kind == "RZZ":
        return gates.rzz(op.theta)
    raise ValueError(f"gate kind {op.kind!r} has no matrix")


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2^N x 2^N unitary of a circuit, relabeling included.

    Only valid for widths <= 10; raises ValueError beyond that or on
    malformed gates.
    """
    n = circuit.width
    if n > MAX_DENSE_WIDTH:
        raise ValueError(f"width {n} exceeds dense-unitary limit {MAX_DENSE_WIDTH}")
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    if isinstance(circuit, QvtCircuit):
        for rnd in circuit.rounds:
            for (qa, qb), block in zip(rnd.pairs, rnd.blocks):
                u = _apply_dense(u, np.asarray(block), (qa, qb), n)
        return u
    for op in circuit.gates:
        if op.kind == "MEASURE_ALL":
            continue
        if op.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {op.kind!r}")
        if op.kind == "SQ":
            for col in range(dim):
                u[:, col] = gates.apply_one_qubit(u[:, col], op.matrix, op.qubits[0], n)
        else:
            u = _apply_dense(u, gate_matrix(op), op.qubits, n)
    relabel = circuit.output_relabeling
    if any(relabel[i] != i for i in range(n)):
        u = gates.permutation_matrix(relabel) @ u
    return u


def _apply_dense(u: np.ndarray, m4: np.ndarray, pair: Sequence[int], n: int) -> np.ndarray:
    if m4.shape != (4, 4):
        raise ValueError("two-qubit gate must be 4x4")
    out = np.empty_like(u)
    for col in range(u.shape[1]):
        out[:, col] = gates.apply_two_qubit(u[:, col], m4, pair[0], pair[1], n)
    return out


def concatenate(first: QvtCircuit, second: QvtCircuit) -> QvtCircuit:
    """Circuit running ``first`` then ``second`` (widths must match)."""
    if first.width != second.width:
        raise ValueError("widths differ")
    return QvtCircuit(first.width, first.seed, first.rounds + second.rounds)


def validate(circuit: Circuit, require_square: bool = True) -> list[str]:
    """Collect every invariant violation; an empty list means ok.

    ``require_square=False`` skips the rounds-equals-width check so that
    intermediate circuits (block-combined, depth-extended) can be checked.
    """
    if isinstance(circuit, QvtCircuit):
        return _validate_qvt(circuit, require_square)
    return _validate_compiled(circuit)


def _validate_qvt(circuit: QvtCircuit, require_square: bool) -> list[str]:
    out: list[str] = []
    n = circuit.width
    if n < 2:
        out.append(f"width {n} < 2")
        return out
    if require_square and len(circuit.rounds) != n:
        out.append(f"expected {n} rounds, found {len(circuit.rounds)}")
    for r_idx, rnd in enumerate(circuit.rounds):
        seen: set[int] = set()
        for a, b in rnd.pairs:
            if a == b:
                out.append(f"round {r_idx}: pair not disjoint ({a},{b})")
            for q in (a, b):
                if not 0 <= q < n:
                    out.append(f"round {r_idx}: qubit {q} out of range")
                elif q in seen:
                    out.append(f"round {r_idx}: qubit {q} appears twice")
                seen.add(q)
        if len(rnd.blocks) != len(rnd.pairs):
            out.append(
                f"round {r_idx}: {len(rnd.blocks)} blocks for {len(rnd.pairs)} pairs"
            )
        if len(rnd.pairs) != n // 2:
            out.append(
                f"round {r_idx}: expected {n // 2} pairs, found {len(rnd.pairs)}"
            )
        if n % 2 == 1:
            idle = set(range(n)) - seen
            if not idle:
                out.append(f"round {r_idx}: odd N requires one idle qubit")
            if rnd.idle is not None and rnd.idle in seen:
                out.append(f"round {r_idx}: declared idle qubit {rnd.idle} is paired")
        elif rnd.idle is not None:
            out.append(f"round {r_idx}: even N cannot have an idle qubit")
        for b_idx, block in enumerate(rnd.blocks):
            if block.shape != (4, 4):
                out.append(f"round {r_idx} block {b_idx}: shape {block.shape}")
            elif not gates.is_unitary(block, UNITARITY_TOL):
                out.append(f"round {r_idx} block {b_idx}: not unitary within 1e-10")
    return out


def _validate_compiled(circuit: CompiledCircuit) -> list[str]:
    out: list[str] = []
    n = circuit.width
    if sorted(circuit.output_relabeling) != list(range(n)):
        out.append(f"output_relabeling {circuit.output_relabeling} is not a permutation")
    for g_idx, op in enumerate(circuit.gates):
        if op.kind not in GATE_KINDS:
            out.append(f"gate {g_idx}: unknown kind {op.kind!r}")
            continue
        expected = 1 if op.kind == "SQ" else n if op.kind == "MEASURE_ALL" else 2
        if op.kind == "MEASURE_ALL":
            if g_idx != len(circuit.gates) - 1:
                out.append(f"gate {g_idx}: MEASURE_ALL must be last")
            continue
        if len(op.qubits) != expected:
            out.append(f"gate {g_idx}: {op.kind} expects {expected} qubits")
        if any(not 0 <= q < n for q in op.qubits):
            out.append(f"gate {g_idx}: qubit out of range")
        if len(set(op.qubits)) != len(op.qubits):
            out.append(f"gate {g_idx}: repeated qubit")
        if op.kind == "SQ":
            if op.matrix is None or op.matrix.shape != (2, 2):
                out.append(f"gate {g_idx}: SQ needs a 2x2 matrix")
            elif not gates.is_unitary(op.matrix, UNITARITY_TOL):
                out.append(f"gate {g_idx}: SQ matrix not unitary within 1e-10")
        if op.kind in ROTATION_KINDS and (op.theta is None or not np.isfinite(op.theta)):
            out.append(f"gate {g_idx}: rotation angle must be finite")
    return out


# -- serialization -----------------------------------------------------------
#
# Circuit JSON schema:
#   {"width": int, "seed": int,
#    "rounds": [{"pairs": [[a,b],...], "idle": int|null,
#                "blocks": [[[re,im], ... 16 entries row-major], ...]}]}
# Compiled schema:
#   {"width": int, "source_seed": int, "relabel": [int,...],
#    "gates": [{"kind": str, "qubits": [...], "theta"?: float,
#               "matrix"?: [[re,im] x4 row-major]}]}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_to_json(m: np.ndarray) -> list[list[str]]:
    return [[_fmt(v.real), _fmt(v.imag)] for v in np.asarray(m).reshape(-1)]


def _matrix_from_json(entries: Iterable, side: int) -> np.ndarray:
    flat = np.array(
        [complex(float(re), float(im)) for re, im in entries], dtype=complex
    )
    if flat.size != side * side:
        raise ValueError(f"expected {side * side} matrix entries, found {flat.size}")
    m = flat.reshape(side, side)
    if not gates.is_unitary(m, UNITARITY_TOL):
        if not gates.is_unitary(m, REPROJECT_TOL):
            raise ValueError("matrix deviates from unitary by more than 1e-8")
        m = gates.closest_unitary(m)
    return m


def circuit_to_json(circuit: QvtCircuit) -> str:
    rounds = [
        {
            "pairs": [list(p) for p in rnd.pairs],
            "idle": rnd.idle,
            "blocks": [_matrix_to_json(b) for b in rnd.blocks],
        }
        for rnd in circuit.rounds
    ]
    doc = {"width": circuit.width, "seed": circuit.seed, "rounds": rounds}
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def circuit_from_json(text: str) -> QvtCircuit:
    doc = json.loads(text)
    rounds = tuple(
        Round(
            pairs=tuple((int(a), int(b)) for a, b in rnd["pairs"]),
            blocks=tuple(_matrix_from_json(b, 4) for b in rnd["blocks"]),
            idle=None if rnd.get("idle") is None else int(rnd["idle"]),
        )
        for rnd in doc["rounds"]
    )
    return QvtCircuit(width=int(doc["width"]), seed=int(doc["seed"]), rounds=rounds)


def compiled_to_json(circuit: CompiledCircuit) -> str:
    ops = []
    for op in circuit.gates:
        entry: dict = {"kind": op.kind, "qubits": list(op.qubits)}
        if op.theta is not None:
            entry["theta"] = _fmt(op.theta)
        if op.matrix is not None:
            entry["matrix"] = _matrix_to_json(op.matrix)
        ops.append(entry)
    doc = {
        "width": circuit.width,
        "source_seed": circuit.source_seed,
        "relabel": list(circuit.output_relabeling),
        "gates": ops,
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def compiled_from_json(text: str) -> CompiledCircuit:
    doc = json.loads(text)
    ops = []
    for entry in doc["gates"]:
        ops.append(
            GateOp(
                kind=entry["kind"],
                qubits=tuple(entry["qubits"]),
                theta=None if "theta" not in entry else float(entry["theta"]),
                matrix=None
                if "matrix" not in entry
                else _matrix_from_json(entry["matrix"], 2),
            )
        )
    return CompiledCircuit(
        width=int(doc["width"]),
        gates=tuple(ops),
        output_relabeling=tuple(doc["relabel"]),
        source_seed=int(doc["source_seed"]),
    )
