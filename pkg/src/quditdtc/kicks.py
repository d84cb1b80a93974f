"""Per-site kick construction and the canonical on-site operator library.

Two kick families:

* global: a single multiplet rotation exp[-i (2*pi/m) (1+eps) S^x] acting on
  all d levels;
* embedded: per-block cycles compiled from two-level pi rotations that act
  only inside each active block and leave the complement inert.

The imperfection model is multiplicative: eps scales every rotation angle in
a compiled sequence identically.

Carrier projectivity: a compiled m-cycle satisfies K^m = I only up to
block-constant phases (a pi rotation squares to -1 on its pair). Everything
downstream grades operators by conjugation, where those phases cancel on
block-preserving operators; see normal_form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg import expm, schur

from .chain import SiteOperator

LOG_BRANCH_GUARD = math.pi - 1e-6


# ---------------------------------------------------------------------------
# operator library


def spin_operator(d: int, axis: str) -> SiteOperator:
    """Spin-s generators for s = (d-1)/2 in the level basis.

    z is diag(-(d-1)/2, ..., (d-1)/2); x and y come from the ladder
    operators with elements sqrt(s(s+1) - m(m+1)).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    s = (d - 1) / 2
    mz = np.arange(d) - s
    if axis == "z":
        return SiteOperator(d, np.diag(mz).astype(complex))
    raising = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        raising[i + 1, i] = math.sqrt(s * (s + 1) - mz[i] * (mz[i] + 1))
    if axis == "x":
        return SiteOperator(d, (raising + raising.conj().T) / 2)
    if axis == "y":
        return SiteOperator(d, (raising - raising.conj().T) / 2j)
    raise ValueError(f"unknown axis {axis!r}; use 'x', 'y' or 'z'")


def qudit_z_gate(d: int) -> SiteOperator:
    """diag(1, w, w^2, ...) with w = exp(2*pi*i/d)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    omega = np.exp(2j * np.pi * np.arange(d) / d)
    return SiteOperator(d, np.diag(omega))


def two_level_rotation(d: int, j: int, k: int, theta: float) -> SiteOperator:
    """exp(-i theta/2 X_jk): a rotation confined to levels {j, k}."""
    if not (0 <= j < k < d):
        raise ValueError(f"need 0 <= j < k < d, got j={j}, k={k}, d={d}")
    u = np.eye(d, dtype=complex)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    u[j, j] = c
    u[k, k] = c
    u[j, k] = -1j * s
    u[k, j] = -1j * s
    return SiteOperator(d, u)


def projector(d: int, levels) -> SiteOperator:
    p = np.zeros((d, d), dtype=complex)
    for lv in levels:
        p[lv, lv] = 1.0
    return SiteOperator(d, p)


# ---------------------------------------------------------------------------
# kick specifications


@dataclass(frozen=True)
class LevelPartition:
    """Disjoint active blocks over a subset of {0, ..., d-1}."""

    local_dim: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(l) for l in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            for lv in b:
                if not 0 <= lv < self.local_dim:
                    raise ValueError(f"level {lv} out of range for d={self.local_dim}")
                if lv in seen:
                    raise ValueError(f"level {lv} repeated across blocks")
                seen.add(lv)

    @property
    def inactive_levels(self) -> tuple[int, ...]:
        active = {lv for b in self.blocks for lv in b}
        return tuple(lv for lv in range(self.local_dim) if lv not in active)


@dataclass(frozen=True)
class GlobalKickSpec:
    local_dim: int
    cycle_order: int
    epsilon: float
    axis: str = "x"

    def __post_init__(self):
        if self.cycle_order < 2:
            raise ValueError("cycle_order must be >= 2")
        if self.axis not in ("x", "y"):
            raise ValueError("global kick axis must be 'x' or 'y'")
        if not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")

    @property
    def conjugation_order(self) -> int:
        return self.cycle_order

    def with_epsilon(self, eps: float) -> "GlobalKickSpec":
        return GlobalKickSpec(self.local_dim, self.cycle_order, eps, self.axis)


@dataclass(frozen=True)
class EmbeddedKickSpec:
    local_dim: int
    blocks: tuple[tuple[int, ...], ...]
    epsilon: float
    cycles: tuple[int, ...] = field(default=())

    def __post_init__(self):
        partition = LevelPartition(self.local_dim, self.blocks)
        object.__setattr__(self, "blocks", partition.blocks)
        cycles = tuple(self.cycles) if self.cycles else tuple(len(b) for b in self.blocks)
        object.__setattr__(self, "cycles", cycles)
        if len(cycles) != len(self.blocks):
            raise ValueError("cycles list must match blocks list")
        for b, m in zip(self.blocks, cycles):
            if m < 2:
                raise ValueError("cycle order must be >= 2")
            if len(b) < m:
                raise ValueError(f"block {b} too small for a {m}-cycle")
            if len(b) != m:
                raise ValueError(
                    f"block {b} has {len(b)} levels but requests a {m}-cycle; "
                    "list extra levels as inactive instead"
                )
        if not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")

    @property
    def partition(self) -> LevelPartition:
        return LevelPartition(self.local_dim, self.blocks)

    @property
    def conjugation_order(self) -> int:
        return math.lcm(*self.cycles)

    def with_epsilon(self, eps: float) -> "EmbeddedKickSpec":
        return EmbeddedKickSpec(self.local_dim, self.blocks, eps, self.cycles)


KickSpec = GlobalKickSpec | EmbeddedKickSpec


def kick_spec_to_json(spec: KickSpec) -> dict:
    if isinstance(spec, GlobalKickSpec):
        return {
            "kind": "global",
            "local_dim": spec.local_dim,
            "cycle_order": spec.cycle_order,
            "axis": spec.axis,
            "epsilon": spec.epsilon,
        }
    return {
        "kind": "embedded",
        "local_dim": spec.local_dim,
        "blocks": [list(b) for b in spec.blocks],
        "cycles": list(spec.cycles),
        "epsilon": spec.epsilon,
    }


def kick_spec_from_json(data: dict) -> KickSpec:
    kind = data.get("kind")
    if kind == "global":
        return GlobalKickSpec(
            int(data["local_dim"]),
            int(data["cycle_order"]),
            float(data.get("epsilon", 0.0)),
            data.get("axis", "x"),
        )
    if kind == "embedded":
        return EmbeddedKickSpec(
            int(data["local_dim"]),
            tuple(tuple(b) for b in data["blocks"]),
            float(data.get("epsilon", 0.0)),
            tuple(data.get("cycles", ())),
        )
    raise ValueError(f"unknown kick kind {kind!r}")


# ---------------------------------------------------------------------------
# compilation


@dataclass(frozen=True)
class CompiledKick:
    """Per-site factor sequence plus the ideal (eps = 0) carrier.

    `factors` are applied left-to-right: the realized unitary is
    factors[-1] @ ... @ factors[0].
    """

    spec: KickSpec
    factors: tuple[SiteOperator, ...]
    carrier: np.ndarray

    def __post_init__(self):
        carrier = np.array(self.carrier, dtype=np.complex128)
        carrier.flags.writeable = False
        object.__setattr__(self, "carrier", carrier)

    @property
    def local_dim(self) -> int:
        return self.spec.local_dim

    @property
    def conjugation_order(self) -> int:
        return self.spec.conjugation_order

    def unitary(self) -> np.ndarray:
        """Product of the factors (the imperfect per-site kick)."""
        return reduce(lambda acc, f: f.matrix @ acc, self.factors,
                      np.eye(self.local_dim, dtype=complex))


def _global_factor(spec: GlobalKickSpec) -> SiteOperator:
    gen = spin_operator(spec.local_dim, spec.axis)
    theta = 2 * math.pi / spec.cycle_order * (1 + spec.epsilon)
    return SiteOperator(spec.local_dim, expm(-1j * theta * gen.matrix))


def _embedded_factors(spec: EmbeddedKickSpec) -> list[SiteOperator]:
    """Chained pair rotations per block.

    A k-cycle on block (b0, ..., b_{k-1}) compiles to rotations on the pairs
    (b0,b1), (b1,b2), ..., applied in that order; the carrier permutes
    b0 -> b_{k-1} -> ... -> b1 -> b0 up to block phases.
    """
    theta = math.pi * (1 + spec.epsilon)
    factors = []
    for block in spec.blocks:
        for a, b in zip(block[:-1], block[1:]):
            j, k = (a, b) if a < b else (b, a)
            factors.append(two_level_rotation(spec.local_dim, j, k, theta))
    return factors


def compile_kick(spec: KickSpec) -> CompiledKick:
    """Build the factor sequence at spec.epsilon and the eps = 0 carrier."""
    if isinstance(spec, GlobalKickSpec):
        factors = (_global_factor(spec),)
        carrier = _global_factor(spec.with_epsilon(0.0)).matrix
    else:
        factors = tuple(_embedded_factors(spec))
        ideal = _embedded_factors(spec.with_epsilon(0.0))
        carrier = reduce(lambda acc, f: f.matrix @ acc, ideal,
                         np.eye(spec.local_dim, dtype=complex))
    return CompiledKick(spec, factors, carrier)


# ---------------------------------------------------------------------------
# error generator


def unitary_log(u: np.ndarray, branch_guard: float = LOG_BRANCH_GUARD) -> np.ndarray:
    """Principal logarithm of a unitary via complex Schur.

    Rejects eigenphases at the branch cut (|phase| >= branch_guard).
    """
    t, z = schur(np.asarray(u, dtype=complex), output="complex")
    lam = np.diag(t)
    if np.max(np.abs(np.abs(lam) - 1.0)) > 1e-8:
        raise ValueError("matrix is not unitary within 1e-8")
    phases = np.angle(lam)
    if np.max(np.abs(phases)) >= branch_guard:
        raise ValueError(
            "eigenphase at the principal-log branch cut; epsilon too large"
        )
    return z @ np.diag(1j * phases) @ z.conj().T


def effective_error_generator(spec: KickSpec) -> SiteOperator:
    """G(eps) = (i/eps) log(K_ideal^dag K(eps)); G -> G_1 as eps -> 0."""
    if spec.epsilon == 0.0:
        raise ValueError("effective_error_generator requires epsilon != 0")
    compiled = compile_kick(spec)
    err = compiled.carrier.conj().T @ compiled.unitary()
    gen = (1j / spec.epsilon) * unitary_log(err)
    gen = (gen + gen.conj().T) / 2
    return SiteOperator(spec.local_dim, gen)
