"""Exact qubit reference models for the embedded doublet protocols.

Three constructions:

* doublet map: the d=3 embedded-2T protocol restricted to the {0,2}
  doublet is exactly a qubit chain with Z eigenvalues -1/+1 (|0> -> -1,
  |2> -> +1), the same h_i and J_i, and per-site pi X rotations.
* ENC: the d=4 contiguous-partition protocol encoded site-wise into two
  qubits per site via |l> -> |a b| with l = 2a + b (A the high bit). Under
  the chain's digit convention the d=4 amplitude vector and the interleaved
  2N-qubit amplitude vector are the same array, S^z maps to
  -Z_A - Z_B/2, and the two commuting pair rotations map to a single
  B-leg pi rotation.
* PLAIN: same fields and B-leg kick as ENC but leg-preserving couplings
  J * (Z_A Z_A' + Z_B Z_B') plus a tunable cross-leg weight lambda.

Here Z is the standard Pauli diag(1, -1) on qubit levels (0, 1); sign
conventions are folded into the term weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .chain import ChainShape, QuditState, site_level_populations
from .disorder import DisorderRealization
from .engine import StepPlan
from .kicks import EmbeddedKickSpec, two_level_rotation

_Z_EIGENVALUES = np.array([1.0, -1.0])


@dataclass(frozen=True)
class WeightedZMagnetization:
    """normalizer * sum_q w_q <Z_q>; the image of M_z under the encoding."""

    weights: tuple[float, ...]
    normalizer: float
    name: str = "Mz"

    @property
    def channels(self) -> tuple[str, ...]:
        return (self.name,)

    def measure(self, state: QuditState) -> tuple[float, ...]:
        pops = site_level_populations(state)
        z_exp = pops @ _Z_EIGENVALUES
        return (float(self.normalizer * (np.asarray(self.weights) @ z_exp)),)


@dataclass(frozen=True)
class QubitChainProtocol:
    """Diagonal Z model with per-period pi X rotations on selected qubits."""

    n_qubits: int
    z_fields: np.ndarray
    zz_terms: tuple[tuple[int, int, float], ...]
    kicked: tuple[int, ...]
    epsilon: float
    observable: WeightedZMagnetization
    kind: str = "custom"
    cross_leg_weight: float | None = None

    def __post_init__(self):
        zf = np.array(self.z_fields, dtype=np.float64)
        if zf.shape != (self.n_qubits,):
            raise ValueError("z_fields must have one entry per qubit")
        zf.flags.writeable = False
        object.__setattr__(self, "z_fields", zf)
        for i, j, _ in self.zz_terms:
            if not (0 <= i < self.n_qubits and 0 <= j < self.n_qubits and i != j):
                raise ValueError(f"bad coupling pair ({i}, {j})")
        for q in self.kicked:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"kicked qubit {q} out of range")

    @property
    def shape(self) -> ChainShape:
        return ChainShape(self.n_qubits, 2)

    def energy_vector(self) -> np.ndarray:
        n = self.n_qubits
        energy = np.zeros(2**n)
        for q in range(n):
            left, right = 2**q, 2 ** (n - q - 1)
            energy.reshape(left, 2, right)[:] += (
                self.z_fields[q] * _Z_EIGENVALUES[None, :, None]
            )
        zz = np.outer(_Z_EIGENVALUES, _Z_EIGENVALUES)
        for i, j, w in self.zz_terms:
            a, b = (i, j) if i < j else (j, i)
            left = 2**a
            mid = 2 ** (b - a - 1)
            right = 2 ** (n - b - 1)
            energy.reshape(left, 2, mid, 2, right)[:] += (
                w * zz[None, :, None, :, None]
            )
        return energy

    @cached_property
    def _plan(self) -> StepPlan:
        phases = np.exp(-1j * self.energy_vector())
        rx = two_level_rotation(2, 0, 1, np.pi * (1 + self.epsilon)).matrix
        gates = tuple((q, rx) for q in self.kicked)
        return StepPlan(self.shape, phases, gates)

    def step_plan(self) -> StepPlan:
        return self._plan


# ---------------------------------------------------------------------------
# d = 3 doublet baseline


def _require_embedded(protocol, blocks: tuple[tuple[int, ...], ...], d: int) -> None:
    kick = protocol.kick
    if not isinstance(kick, EmbeddedKickSpec) or kick.local_dim != d or kick.blocks != blocks:
        raise ValueError(
            f"baseline requires the d={d} embedded protocol on blocks {blocks}"
        )


def map_qutrit_doublet_to_qubit(protocol) -> tuple[QubitChainProtocol, callable]:
    """Qubit chain equal to the d=3 embedded-2T dynamics on the {0,2} block.

    S^z restricted to {0,2} is diag(-1, +1), so h and J carry over
    unchanged; with Pauli Z = diag(1, -1) on qubit levels the field weights
    flip sign. Returns (qubit protocol, state map); the map rejects states
    with support on level 1.
    """
    _require_embedded(protocol, ((0, 2),), 3)
    n = protocol.shape.n_sites
    realization = protocol.realization
    qubit = QubitChainProtocol(
        n_qubits=n,
        z_fields=-realization.fields,
        zz_terms=tuple(
            (i, i + 1, float(realization.couplings[i])) for i in range(n - 1)
        ),
        kicked=tuple(range(n)),
        epsilon=protocol.kick.epsilon,
        observable=WeightedZMagnetization((-1.0,) * n, 1.0 / n),
        kind="doublet",
    )

    def map_state(state: QuditState) -> QuditState:
        if state.shape.local_dim != 3 or state.shape.n_sites != n:
            raise ValueError("state shape does not match the qutrit protocol")
        full = state.amplitudes.reshape((3,) * n)
        sub = full[np.ix_(*([[0, 2]] * n))].reshape(-1)
        leak = 1.0 - float(np.sum(np.abs(sub) ** 2))
        if leak > 1e-12:
            raise ValueError(
                f"state has weight {leak:.2e} outside the {{0,2}} doublet"
            )
        return QuditState(ChainShape(n, 2), sub)

    return qubit, map_state


# ---------------------------------------------------------------------------
# d = 4 two-qubit encodings


def _enc_fields(realization: DisorderRealization) -> np.ndarray:
    n = realization.n_sites
    zf = np.empty(2 * n)
    zf[0::2] = -realization.fields  # A legs
    zf[1::2] = -realization.fields / 2  # B legs
    return zf


def encode_d4_to_two_qubits(protocol) -> tuple[QubitChainProtocol, callable]:
    """ENC: exact two-qubit-per-site image of the d=4 contiguous protocol.

    Layout: qubit 2i is A_i, qubit 2i+1 is B_i. With site 0 most
    significant and A the high bit, the d=4 configuration index and the
    2N-qubit configuration index coincide digit-for-digit, so the state map
    is an amplitude-array reinterpretation.
    """
    _require_embedded(protocol, ((0, 1), (2, 3)), 4)
    realization = protocol.realization
    n = realization.n_sites
    terms: list[tuple[int, int, float]] = []
    for i in range(n - 1):
        j = float(realization.couplings[i])
        a_i, b_i, a_j, b_j = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        terms.append((a_i, a_j, j))
        terms.append((a_i, b_j, j / 2))
        terms.append((b_i, a_j, j / 2))
        terms.append((b_i, b_j, j / 4))
    qubit = QubitChainProtocol(
        n_qubits=2 * n,
        z_fields=_enc_fields(realization),
        zz_terms=tuple(terms),
        kicked=tuple(2 * i + 1 for i in range(n)),
        epsilon=protocol.kick.epsilon,
        observable=WeightedZMagnetization((-1.0, -0.5) * n, 1.0 / n),
        kind="enc",
        cross_leg_weight=0.5,
    )

    def map_state(state: QuditState) -> QuditState:
        if state.shape.local_dim != 4 or state.shape.n_sites != n:
            raise ValueError("state shape does not match the d=4 protocol")
        return QuditState(ChainShape(2 * n, 2), state.amplitudes)

    return qubit, map_state


def build_plain_baseline(realization: DisorderRealization, lam: float,
                         epsilon: float) -> QubitChainProtocol:
    """PLAIN: leg-preserving couplings with cross-leg weight lambda.

    lambda = 0 decouples the legs; lambda = 1/2 matches ENC's cross terms
    (but keeps unit Z_B Z_B weight, unlike ENC's 1/4).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    n = realization.n_sites
    terms: list[tuple[int, int, float]] = []
    for i in range(n - 1):
        j = float(realization.couplings[i])
        a_i, b_i, a_j, b_j = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        terms.append((a_i, a_j, j))
        terms.append((b_i, b_j, j))
        if lam != 0.0:
            terms.append((a_i, b_j, lam * j))
            terms.append((b_i, a_j, lam * j))
    return QubitChainProtocol(
        n_qubits=2 * n,
        z_fields=_enc_fields(realization),
        zz_terms=tuple(terms),
        kicked=tuple(2 * i + 1 for i in range(n)),
        epsilon=epsilon,
        observable=WeightedZMagnetization((-1.0, -0.5) * n, 1.0 / n),
        kind="plain",
        cross_leg_weight=lam,
    )
