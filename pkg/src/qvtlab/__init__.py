"""Quantum volume test laboratory.

Generates QVT_N circuits, compiles them at three optimization levels,
simulates them under parametric error models, estimates passing thresholds
with a scalable depolarizing model, and computes confidence intervals for
experimental heavy-output data.

Conventions shared by every module:

* Qubit 0 is the least-significant bit of measured bitstrings.  A basis
  index ``k`` assigns qubit ``q`` the bit ``(k >> q) & 1``.
* Two-qubit blocks on a pair ``(a, b)`` act on the 4-dimensional space
  indexed by ``2*x_b + x_a`` (the first-listed qubit is the low bit).
* Global phase is never tracked; unitary equivalence always means
  ``|Tr(U^dag V)| / dim`` close to 1.
"""

from qvtlab.model import (
    CompiledCircuit,
    GateOp,
    QvtCircuit,
    Round,
    circuit_unitary,
    validate,
)
from qvtlab.sampling import RngHandle, generate_qvt_circuit, haar_su4, random_arrangement

__all__ = [
    "CompiledCircuit",
    "GateOp",
    "QvtCircuit",
    "RngHandle",
    "Round",
    "circuit_unitary",
    "generate_qvt_circuit",
    "haar_su4",
    "random_arrangement",
    "validate",
]
