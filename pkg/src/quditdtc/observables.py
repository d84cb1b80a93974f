"""Recorded observables: chain magnetization, charged probes, block splits.

An observable exposes `channels` (column names) and `measure(state)`
returning one value per channel. Diagonal operators ride the per-site
population fast path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import (
    QuditState,
    SiteOperator,
    _raw_site_expectation,
    _validate_full_partition,
    site_level_populations,
)
from .kicks import spin_operator

CHARGE_TOL = 1e-10


def chain_magnetization(state: QuditState) -> float:
    """(1/N) sum_i <S_i^z>."""
    d = state.shape.local_dim
    mz = np.arange(d) - (d - 1) / 2
    pops = site_level_populations(state)
    return float(pops.mean(axis=0) @ mz)


def sitewise_average(state: QuditState, op: SiteOperator) -> complex:
    """(1/N) sum_i <op_i> for an arbitrary on-site operator."""
    if op.is_diagonal():
        pops = site_level_populations(state).mean(axis=0)
        return complex(pops @ np.diag(op.matrix))
    total = sum(
        _raw_site_expectation(state, i, op.matrix) for i in range(state.shape.n_sites)
    )
    return complex(total / state.shape.n_sites)


def charged_probe(state: QuditState, probe: SiteOperator) -> complex:
    """Chain-averaged expectation of a (generally non-Hermitian) probe."""
    return sitewise_average(state, probe)


def block_resolved_expectation(state: QuditState, blocks, op: SiteOperator) -> np.ndarray:
    """Per-site average of <Pi_b op Pi_b> for each block b of a full partition."""
    cleaned = _validate_full_partition(blocks, state.shape.local_dim)
    out = np.empty(len(cleaned))
    for bi, b in enumerate(cleaned):
        proj = np.zeros((op.local_dim, op.local_dim), dtype=complex)
        for lv in b:
            proj[lv, lv] = 1.0
        blocked = SiteOperator(op.local_dim, proj @ op.matrix @ proj)
        value = sitewise_average(state, blocked)
        if abs(value.imag) > 1e-10:
            raise ValueError("block-resolved expectation has imaginary residue")
        out[bi] = value.real
    return out


def omega4() -> SiteOperator:
    """The canonical d=4 charge-1 probe diag(1, i, -1, -i)."""
    return SiteOperator(4, np.diag([1.0, 1.0j, -1.0, -1.0j]))


def validate_probe_charge(probe: SiteOperator, carrier: np.ndarray, charge: int,
                          cycle_order: int, tol: float = CHARGE_TOL) -> None:
    """Check K probe K^dag = exp(2*pi*i*q/m) probe for the given carrier."""
    rotated = carrier @ probe.matrix @ carrier.conj().T
    expected = np.exp(2j * np.pi * charge / cycle_order) * probe.matrix
    residual = np.max(np.abs(rotated - expected))
    if residual > tol:
        raise ValueError(
            f"probe does not carry charge {charge} under the carrier "
            f"(residual {residual:.2e})"
        )


# ---------------------------------------------------------------------------
# observable specs used by the evolution recorder


@dataclass(frozen=True)
class ChainMagnetization:
    name: str = "Mz"

    @property
    def channels(self) -> tuple[str, ...]:
        return (self.name,)

    def measure(self, state: QuditState) -> tuple[float, ...]:
        return (chain_magnetization(state),)


@dataclass(frozen=True)
class SitewiseHermitian:
    op: SiteOperator
    name: str

    def __post_init__(self):
        if not self.op.is_hermitian():
            raise ValueError("SitewiseHermitian requires a Hermitian matrix")

    @property
    def channels(self) -> tuple[str, ...]:
        return (self.name,)

    def measure(self, state: QuditState) -> tuple[float, ...]:
        return (complex(sitewise_average(state, self.op)).real,)


@dataclass(frozen=True)
class ChargedProbe:
    """Probe with a definite time charge, validated against the carrier."""

    op: SiteOperator
    charge: int
    cycle_order: int
    name: str = "probe"

    @property
    def channels(self) -> tuple[str, ...]:
        return (self.name,)

    def measure(self, state: QuditState) -> tuple[complex, ...]:
        return (charged_probe(state, self.op),)

    def validate_carrier(self, carrier: np.ndarray) -> None:
        validate_probe_charge(self.op, carrier, self.charge, self.cycle_order)


@dataclass(frozen=True)
class BlockResolved:
    """Block-projected sitewise averages, one channel per block."""

    blocks: tuple[tuple[int, ...], ...]
    op: SiteOperator
    name: str = "Mz"

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple(tuple(int(l) for l in b) for b in self.blocks)
        )

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(f"{self.name}[{'+'.join(map(str, b))}]" for b in self.blocks)

    def measure(self, state: QuditState) -> tuple[float, ...]:
        return tuple(block_resolved_expectation(state, self.blocks, self.op))


@dataclass(frozen=True)
class BlockWeights:
    """Per-block population weights (diagnostic channel)."""

    blocks: tuple[tuple[int, ...], ...]
    name: str = "w"

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(f"{self.name}[{'+'.join(map(str, b))}]" for b in self.blocks)

    def measure(self, state: QuditState) -> tuple[float, ...]:
        pops = site_level_populations(state).mean(axis=0)
        return tuple(float(sum(pops[lv] for lv in b)) for b in self.blocks)


def default_magnetization(d: int) -> ChainMagnetization:
    # d is unused but kept for signature symmetry with custom builders
    return ChainMagnetization()


def sz_operator(d: int) -> SiteOperator:
    return spin_operator(d, "z")
