"""Fourier-spectrum estimation of circuit outputs.

The circuit's scalar output f(x) = <Z_0> is sampled on a regular grid over
[0, 2pi)^M and transformed with a discrete Fourier transform.  Repeating
this over many random weight draws yields the set of accessible frequencies
and the attained degree.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import simcore as sc
from .ansatz import ArchitectureKind, ModelDescriptor, build_architecture
from .errors import AliasingError, SizeError

DEFAULT_GRID = 64
DEFAULT_THRESHOLD = 1e-5
DEFAULT_SAMPLES = 100

# keep per-chunk state memory around 64 MiB of complex128
_CHUNK_ELEMENTS = 1 << 22


def band_limit(desc: ModelDescriptor) -> np.ndarray:
    """Encoding-gate count per data slot: a hard cap on each |omega_m|."""
    circuit = build_architecture(desc)
    counts = np.zeros(desc.kernel, dtype=int)
    for g in circuit.gates:
        for a in g.angles:
            if a.kind == "data":
                counts[a.index] += 1
    return counts


def frequency_values(grid_size: int) -> np.ndarray:
    """Integer frequency of each DFT index along one axis, in [-G/2, G/2)."""
    return np.fft.fftfreq(grid_size, d=1.0 / grid_size).astype(int)


def coefficient_at(coefficients: np.ndarray, omega: tuple[int, ...]) -> complex:
    """Look up c_omega in an fft-ordered coefficient array."""
    grid_size = coefficients.shape[-1]
    idx = tuple(int(w) % grid_size for w in omega)
    return complex(coefficients[idx])


def evaluate_grid(desc: ModelDescriptor, weights, grid_size: int = DEFAULT_GRID) -> np.ndarray:
    """<Z_0> at x_m = 2*pi*g_m/G for every grid point g; shape (G,)*M."""
    bl = band_limit(desc)
    if grid_size < 2 * int(bl.max()) + 2:
        raise AliasingError(
            f"grid {grid_size} per axis cannot resolve band limit {bl.max()} "
            f"(need >= {2 * int(bl.max()) + 2})"
        )
    circuit = build_architecture(desc)
    m = desc.kernel
    step = 2.0 * np.pi / grid_size
    points = np.indices((grid_size,) * m).reshape(m, -1).T * step
    chunk = max(1, _CHUNK_ELEMENTS // (1 << circuit.n_qubits))
    values = np.empty(points.shape[0])
    for lo in range(0, points.shape[0], chunk):
        rows = points[lo:lo + chunk]
        values[lo:lo + rows.shape[0]] = sc.expval_z_batch(circuit, rows, weights, qubit=0)
    return values.reshape((grid_size,) * m)


def dft_coefficients(grid: np.ndarray, kernel: int, grid_size: int) -> np.ndarray:
    """Normalized multidimensional DFT: c_omega = (1/G^M) sum f(g) e^{-i 2pi omega.g/G}.

    Returned array is fft-ordered along every axis; use
    :func:`coefficient_at` / :func:`frequency_values` to address it by
    integer frequency vector.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size != grid_size ** kernel:
        raise SizeError(f"grid has {grid.size} values, expected {grid_size ** kernel}")
    grid = grid.reshape((grid_size,) * kernel)
    return np.fft.fftn(grid) / grid.size


def conjugate_symmetry_error(coefficients: np.ndarray) -> float:
    """max |c_{-omega} - conj(c_omega)| over all frequencies."""
    reversed_ = coefficients
    for ax in range(coefficients.ndim):
        reversed_ = np.roll(np.flip(reversed_, axis=ax), 1, axis=ax)
    return float(np.abs(reversed_ - np.conj(coefficients)).max())


@dataclass
class SpectrumReport:
    """Per-draw DFT coefficients plus the derived accessible set and degree."""

    descriptor: ModelDescriptor
    grid_size: int
    n_samples: int
    seed: int
    threshold: float
    coefficients: np.ndarray  # (n_samples,) + (grid_size,)*M, fft-ordered
    accessible: tuple[tuple[int, ...], ...]
    degree: int

    def max_abs(self) -> np.ndarray:
        """Max |c_omega| over samples, fft-ordered."""
        return np.abs(self.coefficients).max(axis=0)

    def to_json_dict(self) -> dict:
        return {
            "descriptor": self.descriptor.to_json_dict(),
            "grid_size": self.grid_size,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "threshold": self.threshold,
            "band_limit": [int(b) for b in band_limit(self.descriptor)],
            "degree": self.degree,
            "accessible": [list(w) for w in self.accessible],
        }


def draw_weights(desc: ModelDescriptor, sample_index: int, seed: int) -> np.ndarray:
    """Uniform [0, 2pi) weights from a substream keyed by (seed, sample)."""
    n_w = build_architecture(desc).n_weight_slots
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, sample_index))))
    return rng.uniform(0.0, 2.0 * np.pi, size=n_w)


def sample_spectrum(
    desc: ModelDescriptor,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID,
    threshold: float = DEFAULT_THRESHOLD,
    threads: int = 1,
) -> SpectrumReport:
    """Spectrum over ``n_samples`` random weight draws.

    Draws use per-sample substreams, so the result is identical for any
    ``threads`` value.
    """
    m = desc.kernel

    def one(i: int) -> np.ndarray:
        grid = evaluate_grid(desc, draw_weights(desc, i, seed), grid_size)
        return dft_coefficients(grid, m, grid_size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            coeffs = np.stack(list(pool.map(one, range(n_samples))))
    else:
        coeffs = np.stack([one(i) for i in range(n_samples)])

    max_abs = np.abs(coeffs).max(axis=0)
    freqs = frequency_values(grid_size)
    hits = np.argwhere(max_abs > threshold)
    accessible = sorted(tuple(int(freqs[k]) for k in idx) for idx in hits)
    degree = max((max(abs(w) for w in omega) for omega in accessible), default=0)
    return SpectrumReport(
        descriptor=desc,
        grid_size=grid_size,
        n_samples=n_samples,
        seed=seed,
        threshold=threshold,
        coefficients=coeffs,
        accessible=tuple(accessible),
        degree=int(degree),
    )


def in_band_frequencies(desc: ModelDescriptor) -> list[tuple[int, ...]]:
    """All frequency vectors inside the encoding band, sorted."""
    bl = band_limit(desc)
    ranges = [np.arange(-b, b + 1) for b in bl]
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, desc.kernel)
    return sorted(tuple(int(w) for w in row) for row in mesh)


def write_spectrum_csv(report: SpectrumReport, path) -> None:
    """Per-sample (omega, re, im) rows for every in-band frequency."""
    rows = ["sample," + ",".join(f"omega_{i}" for i in range(report.descriptor.kernel)) + ",re,im"]
    in_band = in_band_frequencies(report.descriptor)
    for s in range(report.n_samples):
        for omega in in_band:
            c = coefficient_at(report.coefficients[s], omega)
            rows.append(
                f"{s}," + ",".join(str(w) for w in omega)
                + f",{c.real:.17g},{c.imag:.17g}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
