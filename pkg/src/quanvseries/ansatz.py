"""Circuit composers: encodings, trainable block templates, architectures.

A :class:`ModelDescriptor` (ansatz kind, architecture kind, kernel size M,
layer count L, structural seed) fully determines a circuit and its weight
shape.  All builders are pure and deterministic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import simcore as sc
from .errors import DescriptorError


class AnsatzKind(str, enum.Enum):
    STRONGLY_ENTANGLING = "strongly_entangling"
    BASIC_ENTANGLER = "basic_entangler"
    CUSTOM_LAYERS = "custom_layers"
    RANDOM_LAYERS = "random_layers"
    DENSE_BLOCK = "dense_block"


class ArchitectureKind(str, enum.Enum):
    PARALLEL = "parallel"
    SUPER_PARALLEL = "super_parallel"
    NON_REUPLOADING = "non_reuploading"


DEFAULT_STRUCTURE_SEED = 1234
DEFAULT_ROTATION_RATIO = 1.0 / 3.0
DEFAULT_DENSE_REPEATS = 5


@dataclass(frozen=True)
class ModelDescriptor:
    """Everything needed to rebuild a circuit: template, layout, and seed.

    ``kernel`` is the number of data slots M, ``layers`` the reupload count
    L.  ``seed`` fixes the random-layers layout; the deterministic templates
    ignore it.  ``rotation_ratio`` is the CNOT-per-rotation fraction of the
    random template; ``dense_repeats`` the sublayer count of the dense one.
    """

    ansatz: AnsatzKind
    architecture: ArchitectureKind
    kernel: int
    layers: int
    seed: int = DEFAULT_STRUCTURE_SEED
    rotation_ratio: float = DEFAULT_ROTATION_RATIO
    dense_repeats: int = DEFAULT_DENSE_REPEATS

    def __post_init__(self):
        if self.kernel < 1:
            raise DescriptorError(f"kernel must be >= 1, got {self.kernel}")
        if self.layers < 1:
            raise DescriptorError(f"layers must be >= 1, got {self.layers}")
        if self.dense_repeats < 1:
            raise DescriptorError("dense_repeats must be >= 1")
        if not 0.0 <= self.rotation_ratio <= 1.0:
            raise DescriptorError("rotation_ratio must be in [0, 1]")
        if self.n_qubits > sc.MAX_QUBITS:
            raise DescriptorError(
                f"{self.architecture.value} with kernel={self.kernel}, "
                f"layers={self.layers} needs {self.n_qubits} qubits (max {sc.MAX_QUBITS})"
            )

    @property
    def n_qubits(self) -> int:
        if self.architecture is ArchitectureKind.SUPER_PARALLEL:
            return self.kernel * self.layers
        return self.kernel

    @property
    def n_blocks(self) -> int:
        return self.layers + 1

    def to_json_dict(self) -> dict:
        d = {
            "ansatz": self.ansatz.value,
            "architecture": self.architecture.value,
            "kernel": self.kernel,
            "layers": self.layers,
            "seed": self.seed,
        }
        if self.ansatz is AnsatzKind.RANDOM_LAYERS:
            d["rotation_ratio"] = self.rotation_ratio
        if self.ansatz is AnsatzKind.DENSE_BLOCK:
            d["dense_repeats"] = self.dense_repeats
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "ModelDescriptor":
        return ModelDescriptor(
            ansatz=AnsatzKind(d["ansatz"]),
            architecture=ArchitectureKind(d["architecture"]),
            kernel=int(d["kernel"]),
            layers=int(d["layers"]),
            seed=int(d.get("seed", DEFAULT_STRUCTURE_SEED)),
            rotation_ratio=float(d.get("rotation_ratio", DEFAULT_ROTATION_RATIO)),
            dense_repeats=int(d.get("dense_repeats", DEFAULT_DENSE_REPEATS)),
        )


def build_encoding(kernel: int, vertical_repeats: int) -> list[sc.Gate]:
    """RY(x_m) on qubit r*M + m for every vertical repeat r and feature m."""
    if kernel < 1 or vertical_repeats < 1:
        raise DescriptorError("kernel and vertical_repeats must be >= 1")
    return [
        sc.ry(r * kernel + m, sc.data_slot(m))
        for r in range(vertical_repeats)
        for m in range(kernel)
    ]


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, block); independent of global state
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, block_index))))


def block_parameter_count(kind: AnsatzKind, n_qubits: int, dense_repeats: int = DEFAULT_DENSE_REPEATS) -> int:
    """Closed-form weight count of one trainable block."""
    if kind is AnsatzKind.STRONGLY_ENTANGLING:
        return 3 * n_qubits
    if kind is AnsatzKind.DENSE_BLOCK:
        return 3 * n_qubits * dense_repeats
    return n_qubits


def _ring_targets(n_qubits: int, step: int) -> list[tuple[int, int]]:
    return [(q, (q + step) % n_qubits) for q in range(n_qubits)]


def build_trainable_block(
    kind: AnsatzKind,
    n_qubits: int,
    block_index: int,
    slot_offset: int = 0,
    *,
    seed: int = DEFAULT_STRUCTURE_SEED,
    rotation_ratio: float = DEFAULT_ROTATION_RATIO,
    dense_repeats: int = DEFAULT_DENSE_REPEATS,
) -> tuple[list[sc.Gate], int]:
    """One trainable block; returns (gates, number of weight slots consumed).

    Weight slots are assigned consecutively starting at ``slot_offset``.
    Templates:
      * strongly entangling: per-qubit ROT then a CNOT ring with step
        (block_index mod (n-1)) + 1;
      * basic entangler: per-qubit RX then a step-1 CNOT ring (a single CNOT
        for two qubits, which would otherwise see the pair twice);
      * custom layers: per-qubit RY then an open CNOT chain;
      * random layers: n rotations with random axis/qubit plus
        floor(n * rotation_ratio) CNOTs on random pairs, all drawn from a
        stream keyed by (seed, block_index);
      * dense block: ``dense_repeats`` repetitions of [per-qubit ROT +
        step-1 CNOT ring].
    """
    gates: list[sc.Gate] = []
    w = slot_offset

    def ring(step: int):
        if n_qubits < 2:
            return
        if n_qubits == 2 and kind is not AnsatzKind.STRONGLY_ENTANGLING:
            gates.append(sc.cnot(0, 1))
            return
        for c, t in _ring_targets(n_qubits, step):
            gates.append(sc.cnot(c, t))

    if kind is AnsatzKind.STRONGLY_ENTANGLING:
        for q in range(n_qubits):
            gates.append(sc.rot(q, sc.weight_slot(w), sc.weight_slot(w + 1), sc.weight_slot(w + 2)))
            w += 3
        if n_qubits >= 2:
            ring(block_index % (n_qubits - 1) + 1)
    elif kind is AnsatzKind.BASIC_ENTANGLER:
        for q in range(n_qubits):
            gates.append(sc.rx(q, sc.weight_slot(w)))
            w += 1
        ring(1)
    elif kind is AnsatzKind.CUSTOM_LAYERS:
        for q in range(n_qubits):
            gates.append(sc.ry(q, sc.weight_slot(w)))
            w += 1
        for q in range(n_qubits - 1):
            gates.append(sc.cnot(q, q + 1))
    elif kind is AnsatzKind.RANDOM_LAYERS:
        rng = _block_rng(seed, block_index)
        axes = ("rx", "ry", "rz")
        for _ in range(n_qubits):
            axis = axes[rng.integers(0, 3)]
            q = int(rng.integers(0, n_qubits))
            gates.append(sc.Gate(axis, (q,), (sc.weight_slot(w),)))
            w += 1
        n_cnots = math.floor(n_qubits * rotation_ratio)
        for _ in range(n_cnots):
            if n_qubits < 2:
                break
            c, t = rng.choice(n_qubits, size=2, replace=False)
            gates.append(sc.cnot(int(c), int(t)))
    elif kind is AnsatzKind.DENSE_BLOCK:
        for _ in range(dense_repeats):
            for q in range(n_qubits):
                gates.append(sc.rot(q, sc.weight_slot(w), sc.weight_slot(w + 1), sc.weight_slot(w + 2)))
                w += 3
            if n_qubits >= 2:
                ring(1)
    else:  # pragma: no cover
        raise DescriptorError(f"unknown ansatz kind {kind}")
    return gates, w - slot_offset


@lru_cache(maxsize=512)
def build_architecture(desc: ModelDescriptor) -> sc.Circuit:
    """Assemble the full circuit for a descriptor.

    All three architectures start with a trainable block and interleave
    encodings with the remaining ``layers`` blocks:
      * parallel: encoding repeated once per layer on M qubits;
      * super parallel: encoding repeated vertically L times per layer on
        M*L qubits;
      * non-reuploading: a single encoding, then L trainable blocks.
    """
    n = desc.n_qubits
    kw = dict(seed=desc.seed, rotation_ratio=desc.rotation_ratio, dense_repeats=desc.dense_repeats)
    gates: list[sc.Gate] = []
    w = 0

    def add_block(index: int):
        nonlocal w
        block, used = build_trainable_block(desc.ansatz, n, index, w, **kw)
        gates.extend(block)
        w += used

    add_block(0)
    if desc.architecture is ArchitectureKind.NON_REUPLOADING:
        gates.extend(build_encoding(desc.kernel, 1))
        for l in range(desc.layers):
            add_block(l + 1)
    else:
        repeats = desc.layers if desc.architecture is ArchitectureKind.SUPER_PARALLEL else 1
        for l in range(desc.layers):
            gates.extend(build_encoding(desc.kernel, repeats))
            add_block(l + 1)
    return sc.Circuit(n, tuple(gates), n_data_slots=desc.kernel, n_weight_slots=w)


def n_weights(desc: ModelDescriptor) -> int:
    return build_architecture(desc).n_weight_slots


def dof(degree: int, kernel: int) -> int:
    """Independent real coefficients of a truncated series: (2D+1)^M."""
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if kernel < 1:
        raise ValueError(f"kernel must be >= 1, got {kernel}")
    return (2 * degree + 1) ** kernel


def expected_degree(desc: ModelDescriptor) -> int:
    """L for the parallel architecture, L^2 for the super-parallel one."""
    if desc.architecture is ArchitectureKind.PARALLEL:
        return desc.layers
    if desc.architecture is ArchitectureKind.SUPER_PARALLEL:
        return desc.layers ** 2
    raise DescriptorError("no degree formula for the non-reuploading architecture")
