"""Floquet evolution: one period = diagonal phases followed by the kick.

The engine lowers any protocol to a StepPlan (phase vector + ordered on-site
gates), evolves stroboscopically while recording observables, and runs
disorder ensembles with order-independent seeding.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Protocol, Sequence

import numpy as np

from .chain import (
    ChainShape,
    QuditState,
    _apply_matrix_inplace_free,
    _apply_two_level_buffered,
    _two_level_structure,
)
from .disorder import (
    DisorderRealization,
    StaticLayerParams,
    derive_seed,
    phase_vector,
    sample_disorder,
)
from .kicks import KickSpec, compile_kick

NORM_DRIFT_TOL = 1e-9


@dataclass(frozen=True)
class StepPlan:
    """One Floquet period in executable form."""

    shape: ChainShape
    phases: np.ndarray
    gates: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.complex128)
        if phases.shape != (self.shape.dim,):
            raise ValueError("phase vector length must equal d**N")
        phases.flags.writeable = False
        object.__setattr__(self, "phases", phases)

    @cached_property
    def _exec(self) -> tuple:
        """Gates with their two-level structure resolved once."""
        plan = []
        for site, u in self.gates:
            tl = _two_level_structure(u)
            u2 = u[np.ix_(tl, tl)].copy() if tl is not None else None
            plan.append((site, np.asarray(u, dtype=np.complex128), tl, u2))
        return tuple(plan)

    def make_scratch(self) -> tuple[np.ndarray, ...]:
        """Reusable slab buffers for allocation-free two-level updates."""
        slab = self.shape.dim // self.shape.local_dim
        return tuple(np.empty(slab, dtype=np.complex128) for _ in range(3))

    def apply_into(self, src: np.ndarray, dst: np.ndarray,
                   scratch: tuple[np.ndarray, ...] | None = None) -> np.ndarray:
        """One period from src into dst (dst must not alias src)."""
        if scratch is None:
            scratch = self.make_scratch()
        np.multiply(src, self.phases, out=dst)
        d, n = self.shape.local_dim, self.shape.n_sites
        arr = dst
        for site, u, tl, u2 in self._exec:
            if tl is None:
                arr = _apply_matrix_inplace_free(arr, u, site, n, d)
            else:
                _apply_two_level_buffered(arr, u2, tl[0], tl[1], site, n, d, scratch)
        if arr is not dst:
            np.copyto(dst, arr)
        return dst

    def apply(self, amps: np.ndarray) -> np.ndarray:
        return self.apply_into(amps, np.empty_like(amps))


class SupportsStepPlan(Protocol):
    shape: ChainShape

    def step_plan(self) -> StepPlan: ...


@dataclass(frozen=True)
class FloquetProtocol:
    """U_F(eps) = K(eps) e^{-i H_z} with a uniform per-site kick."""

    shape: ChainShape
    kick: KickSpec
    static: StaticLayerParams
    realization: DisorderRealization

    def __post_init__(self):
        if self.kick.local_dim != self.shape.local_dim:
            raise ValueError("kick local_dim must match the chain")
        if self.realization.n_sites != self.shape.n_sites:
            raise ValueError("realization length must match the chain")

    @cached_property
    def compiled_kick(self):
        return compile_kick(self.kick)

    @cached_property
    def _plan(self) -> StepPlan:
        phases = phase_vector(self.realization, self.shape)
        factors = [f.matrix for f in self.compiled_kick.factors]
        gates = tuple(
            (site, f) for site in range(self.shape.n_sites) for f in factors
        )
        return StepPlan(self.shape, phases, gates)

    def step_plan(self) -> StepPlan:
        return self._plan


def floquet_step(state: QuditState, protocol: SupportsStepPlan) -> QuditState:
    """Apply one full period: static layer first, kick second."""
    plan = protocol.step_plan()
    if state.shape != plan.shape:
        raise ValueError("state shape does not match the protocol")
    return QuditState(state.shape, plan.apply(state.amplitudes))


@dataclass(frozen=True)
class TimeSeries:
    """Stroboscopic record; index n = 0 is the pre-evolution value."""

    n_periods: int
    data: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        for name, col in self.data.items():
            if col.shape != (self.n_periods,):
                raise ValueError(f"column {name!r} has wrong length")
            col.flags.writeable = False

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(self.data)

    def column(self, name: str) -> np.ndarray:
        return self.data[name]


def evolve_record(state: QuditState, protocol: SupportsStepPlan, n_periods: int,
                  observables: Sequence, norm_tol: float = NORM_DRIFT_TOL) -> TimeSeries:
    """Record observables at n = 0 and after each of n_periods - 1 steps."""
    if n_periods < 2:
        raise ValueError("n_periods must be >= 2")
    plan = protocol.step_plan()
    if state.shape != plan.shape:
        raise ValueError("state shape does not match the protocol")

    channels: list[str] = []
    for obs in observables:
        channels.extend(obs.channels)
    if len(set(channels)) != len(channels):
        raise ValueError("duplicate observable channel names")
    columns = {name: np.empty(n_periods, dtype=np.complex128) for name in channels}

    # Double buffering: snapshots wrap read-only views of the working buffer,
    # so the buffers themselves stay reusable. Observables must not retain
    # the state they are handed.
    cur = state.amplitudes.copy()
    nxt = np.empty_like(cur)
    scratch = plan.make_scratch()
    for n in range(n_periods):
        if n > 0:
            plan.apply_into(cur, nxt, scratch)
            cur, nxt = nxt, cur
            norm = float(np.linalg.norm(cur))
            if abs(norm - 1.0) > norm_tol:
                raise RuntimeError(f"norm drift {abs(norm - 1.0):.2e} at period {n}")
        current = QuditState(state.shape, cur.view())
        for obs in observables:
            values = obs.measure(current)
            for name, value in zip(obs.channels, values):
                columns[name][n] = value

    data = {}
    for name, col in columns.items():
        if np.max(np.abs(col.imag)) <= 1e-12:
            data[name] = np.ascontiguousarray(col.real)
        else:
            data[name] = col
    return TimeSeries(n_periods, data)


@dataclass(frozen=True)
class DerivedAggregate:
    values: np.ndarray
    mean: float
    stderr: float


@dataclass(frozen=True)
class EnsembleResult:
    realizations: tuple[DisorderRealization, ...]
    series: tuple[TimeSeries, ...]
    derived: dict[str, DerivedAggregate]

    @property
    def n_realizations(self) -> int:
        return len(self.series)


def run_ensemble(
    initial_state: QuditState,
    kick: KickSpec,
    static: StaticLayerParams,
    n_realizations: int,
    base_seed: int,
    n_periods: int,
    observables: Sequence,
    derived: dict[str, Callable[[TimeSeries], float]] | None = None,
    n_workers: int = 1,
) -> EnsembleResult:
    """Evolve one disorder ensemble.

    Realization r draws its disorder from seed hash(base_seed, r); results
    and aggregates are independent of execution order and worker count.
    Derived scalars are computed per realization and averaged (mean with
    standard error over realizations).
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    shape = initial_state.shape

    def one(index: int) -> tuple[DisorderRealization, TimeSeries]:
        realization = sample_disorder(static, shape, derive_seed(base_seed, index))
        protocol = FloquetProtocol(shape, kick, static, realization)
        return realization, evolve_record(initial_state, protocol, n_periods, observables)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one, range(n_realizations)))
    else:
        results = [one(r) for r in range(n_realizations)]

    realizations = tuple(r for r, _ in results)
    series = tuple(s for _, s in results)

    aggregates: dict[str, DerivedAggregate] = {}
    for name, fn in (derived or {}).items():
        values = np.array([fn(ts) for ts in series], dtype=float)
        finite = values[np.isfinite(values)]
        mean = float(finite.mean()) if finite.size else float("nan")
        stderr = (
            float(finite.std(ddof=1) / np.sqrt(finite.size)) if finite.size > 1 else 0.0
        )
        aggregates[name] = DerivedAggregate(values, mean, stderr)
    return EnsembleResult(realizations, series, aggregates)
