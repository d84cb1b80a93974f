"""Dense state vectors for chains of d-level sites.

Basis convention: a configuration index encodes the per-site levels as
mixed-radix digits with site 0 most significant,

    index = sum_i level_i * d**(N - 1 - i).

All amplitudes are complex128; returned arrays are read-only so states can
be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Default memory cap: 2**27 amplitudes (~2 GB complex128) covers d=3, N=14
# and d=5, N=10 with margin.
DEFAULT_AMPLITUDE_CAP = 2**27

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-12


def _frozen_complex_array(values, shape=None) -> np.ndarray:
    # asarray avoids copying freshly built complex128 arrays in the hot loop
    arr = np.asarray(values, dtype=np.complex128)
    if not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ChainShape:
    """N sites, each with local dimension d."""

    n_sites: int
    local_dim: int
    amplitude_cap: int = DEFAULT_AMPLITUDE_CAP

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.local_dim < 2:
            raise ValueError("local_dim must be >= 2")
        if self.dim > self.amplitude_cap:
            raise ValueError(
                f"d**N = {self.local_dim}**{self.n_sites} exceeds the amplitude "
                f"cap {self.amplitude_cap}; reduce N or raise amplitude_cap"
            )

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_sites

    def index_to_levels(self, index: int) -> tuple[int, ...]:
        """Mixed-radix digits of a configuration index, site 0 first."""
        if not 0 <= index < self.dim:
            raise IndexError(f"configuration index {index} out of range")
        digits = []
        for i in range(self.n_sites - 1, -1, -1):
            digits.append((index // self.local_dim**i) % self.local_dim)
        return tuple(digits)

    def levels_to_index(self, levels: Sequence[int]) -> int:
        if len(levels) != self.n_sites:
            raise ValueError("level list length must equal n_sites")
        index = 0
        for lv in levels:
            if not 0 <= lv < self.local_dim:
                raise ValueError(f"level {lv} out of range for d={self.local_dim}")
            index = index * self.local_dim + lv
        return index


@dataclass(frozen=True)
class SiteOperator:
    """Dense d x d operator acting on a single site."""

    local_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen_complex_array(self.matrix, (self.local_dim, self.local_dim))
        object.__setattr__(self, "matrix", mat)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        gram = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(gram - np.eye(self.local_dim))) <= tol)

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off)) <= tol)

    def dagger(self) -> "SiteOperator":
        return SiteOperator(self.local_dim, self.matrix.conj().T)


@dataclass(frozen=True)
class QuditState:
    """Normalized amplitude vector over the d**N configuration basis."""

    shape: ChainShape
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen_complex_array(self.amplitudes, (self.shape.dim,))
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.shape.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state norm {self.norm()} deviates from 1 beyond {tol}")

    def probabilities(self) -> np.ndarray:
        # real**2 + imag**2 skips the sqrt inside abs
        probs = self.amplitudes.real**2
        probs += self.amplitudes.imag**2
        return probs


def prepare_product_state(shape: ChainShape, site_state: Sequence[complex]) -> QuditState:
    """Tensor power of a normalized single-site vector."""
    site = np.asarray(site_state, dtype=np.complex128)
    if site.shape != (shape.local_dim,):
        raise ValueError(
            f"site state has length {site.size}, expected d={shape.local_dim}"
        )
    if abs(np.linalg.norm(site) - 1.0) > 1e-12:
        raise ValueError("site state must be normalized to 1 within 1e-12")
    amps = np.array([1.0 + 0.0j])
    for _ in range(shape.n_sites):
        amps = np.kron(amps, site)
    return QuditState(shape, amps)


def basis_product_state(shape: ChainShape, level: int) -> QuditState:
    """|level>^N without floating-point kron round-off."""
    if not 0 <= level < shape.local_dim:
        raise ValueError(f"level {level} out of range for d={shape.local_dim}")
    amps = np.zeros(shape.dim, dtype=np.complex128)
    amps[shape.levels_to_index([level] * shape.n_sites)] = 1.0
    return QuditState(shape, amps)


def _apply_matrix_inplace_free(amps: np.ndarray, u: np.ndarray, site: int,
                               n_sites: int, d: int) -> np.ndarray:
    """Apply a d x d matrix on `site` of a flat amplitude array.

    Returns a new array; does not touch the input. The reshape keeps the
    innermost axis contiguous so the matmul streams through memory.
    """
    left = d**site
    right = d ** (n_sites - site - 1)
    psi = amps.reshape(left, d, right)
    if right == 1:
        out = psi.reshape(left, d) @ u.T
    elif left == 1:
        out = u @ psi.reshape(d, right)
    else:
        out = np.matmul(u, psi)
    return out.reshape(-1)


def _two_level_structure(u: np.ndarray) -> tuple[int, int] | None:
    """(j, k) when u acts as the identity outside a 2 x 2 block."""
    d = u.shape[0]
    diff = u != np.eye(d)
    touched = np.nonzero(diff.any(axis=1) | diff.any(axis=0))[0]
    if touched.size == 2:
        return int(touched[0]), int(touched[1])
    return None


def _apply_two_level_inplace(amps: np.ndarray, u2: np.ndarray, j: int, k: int,
                             site: int, n_sites: int, d: int) -> None:
    """In-place two-level update; touches only the j/k level slabs."""
    left = d**site
    right = d ** (n_sites - site - 1)
    v = amps.reshape(left, d, right)
    vj = v[:, j, :].copy()
    vk = v[:, k, :]
    v[:, j, :] = u2[0, 0] * vj + u2[0, 1] * vk
    v[:, k, :] = u2[1, 0] * vj + u2[1, 1] * vk


def _apply_two_level_buffered(amps: np.ndarray, u2: np.ndarray, j: int, k: int,
                              site: int, n_sites: int, d: int,
                              scratch: tuple[np.ndarray, ...]) -> None:
    """Allocation-free variant of the two-level update using slab buffers."""
    left = d**site
    right = d ** (n_sites - site - 1)
    v = amps.reshape(left, d, right)
    vj = v[:, j, :]
    vk = v[:, k, :]
    t1 = scratch[0][: left * right].reshape(left, right)
    t2 = scratch[1][: left * right].reshape(left, right)
    t3 = scratch[2][: left * right].reshape(left, right)
    np.multiply(vj, u2[0, 0], out=t1)
    np.multiply(vk, u2[0, 1], out=t3)
    t1 += t3
    np.multiply(vj, u2[1, 0], out=t2)
    np.multiply(vk, u2[1, 1], out=t3)
    t2 += t3
    vj[:] = t1
    vk[:] = t2


def apply_single_site_unitary(state: QuditState, site: int, u: SiteOperator,
                              strict: bool = True) -> QuditState:
    """Apply I x ... x u x ... x I with u acting on `site`."""
    shape = state.shape
    if not 0 <= site < shape.n_sites:
        raise IndexError(f"site {site} out of range for N={shape.n_sites}")
    if u.local_dim != shape.local_dim:
        raise ValueError("operator dimension does not match chain local_dim")
    if strict and not u.is_unitary():
        raise ValueError("operator is not unitary within tolerance")
    new_amps = _apply_matrix_inplace_free(
        state.amplitudes, u.matrix, site, shape.n_sites, shape.local_dim
    )
    return QuditState(shape, new_amps)


def expectation_site(state: QuditState, site: int, op: SiteOperator) -> float:
    """<psi| op_site |psi> for a Hermitian on-site operator."""
    if not op.is_hermitian():
        raise ValueError("expectation_site requires a Hermitian operator")
    value = _raw_site_expectation(state, site, op.matrix)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"imaginary residue {value.imag} exceeds 1e-10")
    return float(value.real)


def _raw_site_expectation(state: QuditState, site: int, matrix: np.ndarray) -> complex:
    shape = state.shape
    if not 0 <= site < shape.n_sites:
        raise IndexError(f"site {site} out of range for N={shape.n_sites}")
    transformed = _apply_matrix_inplace_free(
        state.amplitudes, matrix, site, shape.n_sites, shape.local_dim
    )
    return complex(np.vdot(state.amplitudes, transformed))


def site_level_populations(state: QuditState) -> np.ndarray:
    """(N, d) array of per-site level populations.

    One |amplitude|^2 pass plus N cheap real reductions; this is the fast
    path behind every diagonal observable.
    """
    shape = state.shape
    probs = state.probabilities()
    pops = np.empty((shape.n_sites, shape.local_dim))
    for site in range(shape.n_sites):
        left = shape.local_dim**site
        right = shape.local_dim ** (shape.n_sites - site - 1)
        pops[site] = probs.reshape(left, shape.local_dim, right).sum(axis=(0, 2))
    return pops


def _validate_full_partition(blocks: Sequence[Sequence[int]], d: int) -> list[tuple[int, ...]]:
    cleaned = [tuple(int(l) for l in b) for b in blocks]
    seen: set[int] = set()
    for b in cleaned:
        if len(b) == 0:
            raise ValueError("empty block in partition")
        for lv in b:
            if not 0 <= lv < d:
                raise ValueError(f"level {lv} out of range for d={d}")
            if lv in seen:
                raise ValueError(f"level {lv} appears in more than one block")
            seen.add(lv)
    if seen != set(range(d)):
        missing = sorted(set(range(d)) - seen)
        raise ValueError(f"partition does not cover levels {missing}")
    return cleaned


def block_weights(state: QuditState, blocks: Sequence[Sequence[int]]) -> dict[tuple[int, ...], float]:
    """Per-site average population of each block of a full level partition."""
    cleaned = _validate_full_partition(blocks, state.shape.local_dim)
    pops = site_level_populations(state).mean(axis=0)
    return {b: float(sum(pops[lv] for lv in b)) for b in cleaned}
