"""Exact statevector simulation of parameterized circuits.

Dense complex128 simulation with Pauli-Z expectations and two exact gradient
paths: the parameter-shift rule (evaluation-based oracle) and an adjoint
reverse sweep (one forward pass plus one backward pass).

Conventions:
    * qubit 0 is the most significant bit of the basis index, so for two
      qubits the amplitudes are ordered |00>, |01>, |10>, |11> with qubit 0
      the left bit;
    * RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]], RX and RZ with the
      matching half-angle convention;
    * ROT(a, b, c) applies RZ(a), then RY(b), then RZ(c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityError, SizeError, UnsupportedGateError

MAX_QUBITS = 12
_SQRT1_2 = 1.0 / math.sqrt(2.0)

GATE_ARITY = {"rx": 1, "ry": 1, "rz": 1, "rot": 3, "cnot": 0, "h": 0}
GATE_QUBITS = {"rx": 1, "ry": 1, "rz": 1, "rot": 1, "cnot": 2, "h": 1}
_ROTATION_KINDS = ("rx", "ry", "rz")


# ---------------------------------------------------------------------------
# circuit description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Angle:
    """One rotation angle, bound to a constant, a data slot, or a weight slot."""

    kind: str  # "fixed" | "data" | "weight"
    value: float = 0.0
    index: int = -1

    def __post_init__(self):
        if self.kind not in ("fixed", "data", "weight"):
            raise ValueError(f"unknown angle binding {self.kind!r}")
        if self.kind == "fixed" and not math.isfinite(self.value):
            raise ValueError("fixed angle must be finite")
        if self.kind != "fixed" and self.index < 0:
            raise ValueError("slot index must be non-negative")


def fixed(angle: float) -> Angle:
    return Angle("fixed", value=float(angle))


def data_slot(m: int) -> Angle:
    return Angle("data", index=int(m))


def weight_slot(j: int) -> Angle:
    return Angle("weight", index=int(j))


def _as_angle(a) -> Angle:
    return a if isinstance(a, Angle) else fixed(a)


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, target qubits, and its angle bindings."""

    name: str
    qubits: tuple[int, ...]
    angles: tuple[Angle, ...] = ()

    def __post_init__(self):
        if self.name not in GATE_ARITY:
            raise UnsupportedGateError(f"unknown gate kind {self.name!r}")
        if len(self.angles) != GATE_ARITY[self.name]:
            raise ArityError(
                f"{self.name} takes {GATE_ARITY[self.name]} angles, got {len(self.angles)}"
            )
        if len(self.qubits) != GATE_QUBITS[self.name]:
            raise ArityError(
                f"{self.name} acts on {GATE_QUBITS[self.name]} qubits, got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} targets must be distinct: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise IndexError(f"negative qubit index in {self.qubits}")


def rx(q: int, angle) -> Gate:
    return Gate("rx", (q,), (_as_angle(angle),))


def ry(q: int, angle) -> Gate:
    return Gate("ry", (q,), (_as_angle(angle),))


def rz(q: int, angle) -> Gate:
    return Gate("rz", (q,), (_as_angle(angle),))


def rot(q: int, a, b, c) -> Gate:
    return Gate("rot", (q,), (_as_angle(a), _as_angle(b), _as_angle(c)))


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (control, target))


def hadamard(q: int) -> Gate:
    return Gate("h", (q,))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate program over ``n_qubits`` with declared slot counts.

    Gates are applied to the state left to right.  Immutable and hashable,
    so instances are safe to share across threads and to use as cache keys.
    """

    n_qubits: int
    gates: tuple[Gate, ...]
    n_data_slots: int = 0
    n_weight_slots: int = 0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SizeError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.n_data_slots < 0 or self.n_weight_slots < 0:
            raise SizeError("slot counts must be non-negative")
        for g in self.gates:
            if any(q >= self.n_qubits for q in g.qubits):
                raise IndexError(f"gate {g.name} targets {g.qubits} on {self.n_qubits} qubits")
            for a in g.angles:
                if a.kind == "data" and a.index >= self.n_data_slots:
                    raise IndexError(f"data slot {a.index} out of range")
                if a.kind == "weight" and a.index >= self.n_weight_slots:
                    raise IndexError(f"weight slot {a.index} out of range")


@dataclass
class StateVector:
    """Dense amplitudes of an ``n_qubits`` register; always unit norm."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SizeError(f"n_qubits must be in [1, {MAX_QUBITS}]")
        if amps.shape[0] != 1 << self.n_qubits:
            raise SizeError(
                f"expected {1 << self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 deviates from 1 by {abs(norm2 - 1.0):.3e}")
        amps.flags.writeable = False
        self.amplitudes = amps

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------------------
# compiled primitive form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Prim:
    kind: str  # "rx" | "ry" | "rz" | "h" | "cnot"
    q0: int
    q1: int = -1
    angle: Angle | None = None


@lru_cache(maxsize=256)
def _compile(circuit: Circuit) -> tuple[_Prim, ...]:
    """Expand ROT into its three primitive rotations; keep everything else."""
    prims: list[_Prim] = []
    for g in circuit.gates:
        if g.name == "rot":
            q = g.qubits[0]
            prims.append(_Prim("rz", q, angle=g.angles[0]))
            prims.append(_Prim("ry", q, angle=g.angles[1]))
            prims.append(_Prim("rz", q, angle=g.angles[2]))
        elif g.name == "cnot":
            prims.append(_Prim("cnot", g.qubits[0], g.qubits[1]))
        elif g.name == "h":
            prims.append(_Prim("h", g.qubits[0]))
        else:
            prims.append(_Prim(g.name, g.qubits[0], angle=g.angles[0]))
    return tuple(prims)


def _resolve(prims: Sequence[_Prim], data, weights) -> list:
    """Angle value per primitive; scalars for fixed/weight, data may be arrays."""
    out = []
    for p in prims:
        a = p.angle
        if a is None:
            out.append(0.0)
        elif a.kind == "fixed":
            out.append(a.value)
        elif a.kind == "data":
            out.append(data[a.index])
        else:
            out.append(weights[a.index])
    return out


# ---------------------------------------------------------------------------
# dense kernels (batched: psi has shape (B, 2**n))
# ---------------------------------------------------------------------------

def _shape3(theta):
    """Broadcast a per-batch angle array against the (B, lo, 2, hi) view."""
    return np.asarray(theta)[:, None, None]


def _apply_axis_rotation(psi: np.ndarray, n: int, q: int, kind: str, theta) -> np.ndarray:
    v = psi.reshape(psi.shape[0], 1 << q, 2, 1 << (n - 1 - q))
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    half = np.asarray(theta) / 2.0
    if np.ndim(half) == 1:
        half = _shape3(half)
    out = np.empty_like(psi)
    ov = out.reshape(v.shape)
    if kind == "rz":
        ph = np.exp(-1j * half)
        ov[:, :, 0, :] = ph * a
        ov[:, :, 1, :] = np.conj(ph) * b
        return out
    c, s = np.cos(half), np.sin(half)
    if kind == "ry":
        ov[:, :, 0, :] = c * a - s * b
        ov[:, :, 1, :] = s * a + c * b
    else:  # rx
        ov[:, :, 0, :] = c * a - 1j * s * b
        ov[:, :, 1, :] = -1j * s * a + c * b
    return out


def _apply_matrix_1q(psi: np.ndarray, n: int, q: int, m: np.ndarray) -> np.ndarray:
    v = psi.reshape(psi.shape[0], 1 << q, 2, 1 << (n - 1 - q))
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    out = np.empty_like(psi)
    ov = out.reshape(v.shape)
    ov[:, :, 0, :] = m[0, 0] * a + m[0, 1] * b
    ov[:, :, 1, :] = m[1, 0] * a + m[1, 1] * b
    return out


def _apply_cnot(psi: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    lo, hi = min(control, target), max(control, target)
    shape = (psi.shape[0], 1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n - 1 - hi))
    out = psi.copy()
    pv = psi.reshape(shape)
    ov = out.reshape(shape)
    if control == lo:
        ov[:, :, 1, :, 0, :] = pv[:, :, 1, :, 1, :]
        ov[:, :, 1, :, 1, :] = pv[:, :, 1, :, 0, :]
    else:
        ov[:, :, 0, :, 1, :] = pv[:, :, 1, :, 1, :]
        ov[:, :, 1, :, 1, :] = pv[:, :, 0, :, 1, :]
    return out


def _apply_pauli(psi: np.ndarray, n: int, q: int, which: str) -> np.ndarray:
    v = psi.reshape(psi.shape[0], 1 << q, 2, 1 << (n - 1 - q))
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    out = np.empty_like(psi)
    ov = out.reshape(v.shape)
    if which == "x":
        ov[:, :, 0, :] = b
        ov[:, :, 1, :] = a
    elif which == "y":
        ov[:, :, 0, :] = -1j * b
        ov[:, :, 1, :] = 1j * a
    else:  # z
        ov[:, :, 0, :] = a
        ov[:, :, 1, :] = -b
    return out


def _mat_for(kind: str, theta: float) -> np.ndarray:
    h = theta / 2.0
    c, s = math.cos(h), math.sin(h)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "rz":
        e = complex(c, -s)
        return np.array([[e, 0.0], [0.0, e.conjugate()]], dtype=np.complex128)
    if kind == "h":
        return np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=np.complex128)
    raise UnsupportedGateError(kind)


def _init_batch(n: int, batch: int) -> np.ndarray:
    psi = np.zeros((batch, 1 << n), dtype=np.complex128)
    psi[:, 0] = 1.0
    return psi


def _run_prims(n: int, prims: Sequence[_Prim], angles: Sequence, batch: int = 1,
               psi: np.ndarray | None = None) -> np.ndarray:
    """Apply primitives to a batch of states.

    ``angles[i]`` is a scalar or a length-``batch`` array.  Runs of adjacent
    scalar-angle single-qubit gates on the same qubit are fused into one
    2x2 matrix before application.
    """
    if psi is None:
        psi = _init_batch(n, batch)
    i = 0
    n_prims = len(prims)
    while i < n_prims:
        p = prims[i]
        if p.kind == "cnot":
            psi = _apply_cnot(psi, n, p.q0, p.q1)
            i += 1
            continue
        if p.kind != "h" and np.ndim(angles[i]) > 0:
            psi = _apply_axis_rotation(psi, n, p.q0, p.kind, angles[i])
            i += 1
            continue
        # fuse consecutive scalar single-qubit gates on this qubit
        j = i
        m = None
        while j < n_prims and prims[j].kind != "cnot" and prims[j].q0 == p.q0 \
                and (prims[j].kind == "h" or np.ndim(angles[j]) == 0):
            if prims[j].kind == "h":
                g = _mat_for("h", 0.0)
            else:
                g = _mat_for(prims[j].kind, float(angles[j]))
            m = g if m is None else g @ m
            j += 1
        psi = _apply_matrix_1q(psi, n, p.q0, m)
        i = j
    return psi


def _expval_z_batch(psi: np.ndarray, n: int, q: int) -> np.ndarray:
    v = (psi.real ** 2 + psi.imag ** 2).reshape(psi.shape[0], 1 << q, 2, 1 << (n - 1 - q))
    return v[:, :, 0, :].sum(axis=(1, 2)) - v[:, :, 1, :].sum(axis=(1, 2))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def init_state(n_qubits: int) -> StateVector:
    """Return |0...0> on ``n_qubits`` (1 <= n <= 12)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SizeError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: Gate, resolved_angles: Sequence[float] = ()) -> StateVector:
    """Apply one gate with explicitly resolved angles to a state."""
    if len(resolved_angles) != GATE_ARITY[gate.name]:
        raise ArityError(
            f"{gate.name} needs {GATE_ARITY[gate.name]} angles, got {len(resolved_angles)}"
        )
    n = state.n_qubits
    if any(q >= n for q in gate.qubits):
        raise IndexError(f"gate targets {gate.qubits} exceed {n} qubits")
    psi = state.amplitudes[None, :].copy()
    if gate.name == "cnot":
        psi = _apply_cnot(psi, n, gate.qubits[0], gate.qubits[1])
    elif gate.name == "h":
        psi = _apply_matrix_1q(psi, n, gate.qubits[0], _mat_for("h", 0.0))
    elif gate.name == "rot":
        q = gate.qubits[0]
        for kind, ang in zip(("rz", "ry", "rz"), resolved_angles):
            psi = _apply_axis_rotation(psi, n, q, kind, float(ang))
    else:
        psi = _apply_axis_rotation(psi, n, gate.qubits[0], gate.name, float(resolved_angles[0]))
    return StateVector(n, psi[0])


def _check_run_args(circuit: Circuit, data, weights) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(data, dtype=np.float64).reshape(-1)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if data.shape[0] != circuit.n_data_slots:
        raise ArityError(f"expected {circuit.n_data_slots} data values, got {data.shape[0]}")
    if weights.shape[0] != circuit.n_weight_slots:
        raise ArityError(f"expected {circuit.n_weight_slots} weights, got {weights.shape[0]}")
    return data, weights


def run(circuit: Circuit, data: Sequence[float] = (), weights: Sequence[float] = ()) -> StateVector:
    """Apply all gates in order to |0...0> with slots bound to data/weights."""
    data, weights = _check_run_args(circuit, data, weights)
    prims = _compile(circuit)
    psi = _run_prims(circuit.n_qubits, prims, _resolve(prims, data, weights))
    return StateVector(circuit.n_qubits, psi[0])


def expval_z(state: StateVector, qubit: int) -> float:
    """<Z> on one qubit: sum of |a_i|^2 signed by the qubit's bit."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    return float(_expval_z_batch(state.amplitudes[None, :], state.n_qubits, qubit)[0])


def expvals_all(circuit: Circuit, data: Sequence[float] = (), weights: Sequence[float] = ()) -> np.ndarray:
    """Per-qubit <Z> of the circuit output, one channel per qubit."""
    data, weights = _check_run_args(circuit, data, weights)
    prims = _compile(circuit)
    psi = _run_prims(circuit.n_qubits, prims, _resolve(prims, data, weights))
    return np.array([
        _expval_z_batch(psi, circuit.n_qubits, q)[0] for q in range(circuit.n_qubits)
    ])


def expval_z_batch(circuit: Circuit, data_rows: np.ndarray, weights: Sequence[float],
                   qubit: int = 0) -> np.ndarray:
    """Vectorized <Z_qubit> over many data rows with one shared weight vector.

    ``data_rows`` has shape (B, n_data_slots); returns shape (B,).  Weights
    and fixed angles are scalars across the batch, so trainable sub-blocks
    are fused; only encoding gates vary per row.
    """
    data_rows = np.asarray(data_rows, dtype=np.float64)
    if data_rows.ndim != 2 or data_rows.shape[1] != circuit.n_data_slots:
        raise ArityError(f"data_rows must be (B, {circuit.n_data_slots})")
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.shape[0] != circuit.n_weight_slots:
        raise ArityError(f"expected {circuit.n_weight_slots} weights, got {weights.shape[0]}")
    if not 0 <= qubit < circuit.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    prims = _compile(circuit)
    angles = []
    for p in prims:
        a = p.angle
        if a is None:
            angles.append(0.0)
        elif a.kind == "fixed":
            angles.append(a.value)
        elif a.kind == "weight":
            angles.append(float(weights[a.index]))
        else:
            angles.append(data_rows[:, a.index])
    psi = _run_prims(circuit.n_qubits, prims, angles, batch=data_rows.shape[0])
    return _expval_z_batch(psi, circuit.n_qubits, qubit)


def grad_parameter_shift(circuit: Circuit, data, weights, qubit: int = 0) -> np.ndarray:
    """Exact d<Z_qubit>/d(weights) via +-pi/2 shifts, per gate occurrence.

    A weight slot referenced by several gates accumulates one shifted pair
    per occurrence.
    """
    data, weights = _check_run_args(circuit, data, weights)
    if not 0 <= qubit < circuit.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    prims = _compile(circuit)
    base = _resolve(prims, data, weights)
    occ = [i for i, p in enumerate(prims) if p.angle is not None and p.angle.kind == "weight"]
    grads = np.zeros(circuit.n_weight_slots)
    if not occ:
        return grads
    n_evals = 2 * len(occ)
    angle_rows = list(base)
    for k, i in enumerate(occ):
        row = np.full(n_evals, base[i])
        row[2 * k] += math.pi / 2.0
        row[2 * k + 1] -= math.pi / 2.0
        angle_rows[i] = row
    psi = _run_prims(circuit.n_qubits, prims, angle_rows, batch=n_evals)
    f = _expval_z_batch(psi, circuit.n_qubits, qubit)
    for k, i in enumerate(occ):
        grads[prims[i].angle.index] += 0.5 * (f[2 * k] - f[2 * k + 1])
    return grads


_GENERATOR = {"rx": "x", "ry": "y", "rz": "z"}


def grad_adjoint(circuit: Circuit, data, weights, qubit: int = 0) -> np.ndarray:
    """Exact d<Z_qubit>/d(weights) via one reverse sweep over the gate list.

    Runs the circuit once, then walks the gates backwards keeping two states:
    the progressively un-computed |psi> and the back-propagated observable
    state.  Each weighted rotation contributes
    2 Re <lam| (-i/2) P |psi_after>, with P its generator axis.  Cost is
    O(|gates|) state applications instead of O(n_weights * |gates|).
    """
    data, weights = _check_run_args(circuit, data, weights)
    if not 0 <= qubit < circuit.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    n = circuit.n_qubits
    prims = _compile(circuit)
    base = _resolve(prims, data, weights)
    psi = _run_prims(n, prims, base)
    lam = _apply_pauli(psi, n, qubit, "z")
    grads = np.zeros(circuit.n_weight_slots)
    for i in range(len(prims) - 1, -1, -1):
        p = prims[i]
        if p.kind == "cnot":
            psi = _apply_cnot(psi, n, p.q0, p.q1)
            lam = _apply_cnot(lam, n, p.q0, p.q1)
            continue
        if p.kind == "h":
            m = _mat_for("h", 0.0)
            psi = _apply_matrix_1q(psi, n, p.q0, m)
            lam = _apply_matrix_1q(lam, n, p.q0, m)
            continue
        if p.angle is not None and p.angle.kind == "weight":
            d = _apply_pauli(psi, n, p.q0, _GENERATOR[p.kind])
            grads[p.angle.index] += 2.0 * float(np.real(np.vdot(lam[0], -0.5j * d[0])))
        psi = _apply_axis_rotation(psi, n, p.q0, p.kind, -float(base[i]))
        lam = _apply_axis_rotation(lam, n, p.q0, p.kind, -float(base[i]))
    return grads


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2; symmetric and global-phase invariant."""
    if a.n_qubits != b.n_qubits:
        raise SizeError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    return min(1.0, float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
