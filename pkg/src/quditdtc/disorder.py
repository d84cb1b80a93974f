"""Disordered diagonal layer: sampling and phase application.

The static layer is a commuting Ising form

    E(config) = sum_i J_i m_z(i) m_z(i+1) + sum_i h_i m_z(i),

with m_z = level - (d-1)/2, fields h_i uniform on [-W_h, W_h] and couplings
J_i uniform on [J^z - W_J, J^z + W_J], open boundaries. One period applies
exp(-i E(config)) per configuration.

Reproducibility: realizations are drawn from a counter-based Philox stream
keyed by a single 64-bit seed; ensemble streams derive per-realization seeds
as seed_r = hash(base_seed, r) via numpy's SeedSequence, so realizations are
independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainShape, QuditState

# Artifact defaults (the source protocols do not publish disorder strengths):
# strong O(1) phases per period.
DEFAULT_FIELD_HALFWIDTH = math.pi
DEFAULT_COUPLING_CENTER = math.pi / 2
DEFAULT_COUPLING_HALFWIDTH = math.pi / 4


@dataclass(frozen=True)
class StaticLayerParams:
    field_halfwidth: float = DEFAULT_FIELD_HALFWIDTH
    coupling_center: float = DEFAULT_COUPLING_CENTER
    coupling_halfwidth: float = DEFAULT_COUPLING_HALFWIDTH

    def __post_init__(self):
        for name in ("field_halfwidth", "coupling_center", "coupling_halfwidth"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.field_halfwidth < 0 or self.coupling_halfwidth < 0:
            raise ValueError("halfwidths must be non-negative")


@dataclass(frozen=True)
class DisorderRealization:
    """Sampled fields/couplings plus the seed and ranges that produced them."""

    fields: np.ndarray
    couplings: np.ndarray
    seed: int
    params: StaticLayerParams

    def __post_init__(self):
        f = np.array(self.fields, dtype=np.float64)
        c = np.array(self.couplings, dtype=np.float64)
        f.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "fields", f)
        object.__setattr__(self, "couplings", c)
        if c.shape != (max(f.size - 1, 0),):
            raise ValueError("couplings must have length n_sites - 1")

    @property
    def n_sites(self) -> int:
        return int(self.fields.size)

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "params": {
                "field_halfwidth": self.params.field_halfwidth,
                "coupling_center": self.params.coupling_center,
                "coupling_halfwidth": self.params.coupling_halfwidth,
            },
            "h": self.fields.tolist(),
            "J": self.couplings.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DisorderRealization":
        params = StaticLayerParams(**data["params"])
        return cls(np.asarray(data["h"]), np.asarray(data["J"]), int(data["seed"]), params)


def derive_seed(base_seed: int, index: int) -> int:
    """Per-realization 64-bit seed derived from (base_seed, index)."""
    if base_seed < 0 or index < 0:
        raise ValueError("base_seed and index must be non-negative")
    ss = np.random.SeedSequence((int(base_seed), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_disorder(params: StaticLayerParams, shape: ChainShape, seed: int) -> DisorderRealization:
    """Uniform i.i.d. draws, deterministic under (seed, params, N)."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    n = shape.n_sites
    wh = params.field_halfwidth
    fields = rng.uniform(-wh, wh, size=n) if wh > 0 else np.zeros(n)
    lo = params.coupling_center - params.coupling_halfwidth
    hi = params.coupling_center + params.coupling_halfwidth
    if n > 1:
        couplings = rng.uniform(lo, hi, size=n - 1) if hi > lo else np.full(n - 1, lo)
    else:
        couplings = np.zeros(0)
    return DisorderRealization(fields, couplings, int(seed), params)


def mz_values(d: int) -> np.ndarray:
    return np.arange(d, dtype=np.float64) - (d - 1) / 2


def hz_energy(config_index: int, realization: DisorderRealization, shape: ChainShape) -> float:
    """Diagonal energy of one basis configuration."""
    levels = shape.index_to_levels(config_index)
    _check_shape(realization, shape)
    mz = mz_values(shape.local_dim)
    m = np.array([mz[lv] for lv in levels])
    energy = float(np.dot(realization.fields, m))
    if shape.n_sites > 1:
        energy += float(np.dot(realization.couplings, m[:-1] * m[1:]))
    return energy


def energy_vector(realization: DisorderRealization, shape: ChainShape) -> np.ndarray:
    """All d**N diagonal energies, built by broadcast accumulation."""
    _check_shape(realization, shape)
    d, n = shape.local_dim, shape.n_sites
    mz = mz_values(d)
    energy = np.zeros(shape.dim)
    for i in range(n):
        left = d**i
        right = d ** (n - i - 1)
        energy.reshape(left, d, right)[:] += realization.fields[i] * mz[None, :, None]
    mzmz = np.outer(mz, mz)
    for i in range(n - 1):
        left = d**i
        right = d ** (n - i - 2)
        energy.reshape(left, d, d, right)[:] += (
            realization.couplings[i] * mzmz[None, :, :, None]
        )
    return energy


def phase_vector(realization: DisorderRealization, shape: ChainShape) -> np.ndarray:
    """exp(-i E(config)) for every configuration."""
    return np.exp(-1j * energy_vector(realization, shape))


def apply_exp_hz(state: QuditState, realization: DisorderRealization,
                 phases: np.ndarray | None = None) -> QuditState:
    """Multiply each amplitude by its configuration phase.

    `phases` may carry a precomputed phase_vector; it must match the shape.
    """
    if phases is None:
        phases = phase_vector(realization, state.shape)
    elif phases.shape != (state.shape.dim,):
        raise ValueError("precomputed phase vector has wrong length")
    _check_shape(realization, state.shape)
    return QuditState(state.shape, state.amplitudes * phases)


def _check_shape(realization: DisorderRealization, shape: ChainShape) -> None:
    if realization.n_sites != shape.n_sites:
        raise ValueError(
            f"realization has {realization.n_sites} sites, chain has {shape.n_sites}"
        )
