"""Dense Floquet spectra and level-statistics diagnostics.

Reference values for the adjacent-gap ratio: Poisson 2 ln 2 - 1 = 0.3863,
GOE 0.5307. No unfolding is applied to P(s) beyond mean-spacing
normalization; Floquet spectra carry uniform density on the circle at
these sizes. No symmetry-sector projection is applied by default --
disordered chains have no spatial symmetry, and a projector hook is
exposed for callers that need one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg import schur

from .engine import FloquetProtocol

DENSE_CAP = 8192
POISSON_R = 2 * np.log(2) - 1  # 0.38629...
GOE_R = 0.5307
DEGENERACY_TOL = 1e-14


def build_floquet_matrix(protocol: FloquetProtocol, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Dense U_F: the full-chain kick with per-column diagonal phases."""
    shape = protocol.shape
    if shape.dim > dense_cap:
        raise ValueError(
            f"dense dimension {shape.dim} exceeds cap {dense_cap}; reduce N"
        )
    plan = protocol.step_plan()
    site_kick = protocol.compiled_kick.unitary()
    chain_kick = reduce(np.kron, [site_kick] * shape.n_sites)
    if projector := getattr(protocol, "sector_projector", None):
        chain_kick = projector @ chain_kick @ projector.conj().T
    return chain_kick * plan.phases[np.newaxis, :]


@dataclass(frozen=True)
class EigenphaseSet:
    phases: np.ndarray = field(repr=False)
    dim: int
    unitarity_residual: float

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64)
        phases.flags.writeable = False
        object.__setattr__(self, "phases", phases)


def eigenphases(u: np.ndarray, unitarity_tol: float = 1e-8) -> EigenphaseSet:
    """Sorted eigenvalue arguments in [0, 2*pi)."""
    u = np.asarray(u, dtype=complex)
    t, _ = schur(u, output="complex")
    lam = np.diag(t)
    residual = float(np.max(np.abs(np.abs(lam) - 1.0)))
    if residual > unitarity_tol:
        raise ValueError(f"matrix is not unitary within {unitarity_tol} "
                         f"(residual {residual:.2e})")
    phases = np.sort(np.mod(np.angle(lam), 2 * np.pi))
    return EigenphaseSet(phases, u.shape[0], residual)


def circular_gaps(phases: np.ndarray) -> np.ndarray:
    """Consecutive gaps on the circle, including the wrap-around gap."""
    p = np.sort(np.asarray(phases, dtype=float))
    if p.size < 2:
        raise ValueError("need at least 2 phases")
    gaps = np.diff(p)
    wrap = 2 * np.pi - (p[-1] - p[0])
    return np.concatenate([gaps, [wrap]])


def adjacent_gap_ratios(gaps: np.ndarray, circular: bool = False,
                        degenerate_tol: float = DEGENERACY_TOL) -> tuple[np.ndarray, int]:
    """r_n = min(g_n, g_{n+1}) / max(g_n, g_{n+1}).

    Pairs touching a duplicate-phase gap (below degenerate_tol) are
    excluded rather than counted as zero ratios.
    """
    g = np.asarray(gaps, dtype=float)
    if circular:
        a, b = g, np.roll(g, -1)
    else:
        a, b = g[:-1], g[1:]
    keep = np.minimum(a, b) > degenerate_tol
    ratios = np.minimum(a, b)[keep] / np.maximum(a, b)[keep]
    return ratios, int((~keep).sum())


def gap_ratio(phases, return_excluded: bool = False,
              degenerate_tol: float = DEGENERACY_TOL):
    """Average adjacent-gap ratio of a circular eigenphase set."""
    if isinstance(phases, EigenphaseSet):
        phases = phases.phases
    phases = np.asarray(phases, dtype=float)
    if phases.size < 3:
        raise ValueError("need at least 3 phases")
    ratios, excluded = adjacent_gap_ratios(
        circular_gaps(phases), circular=True, degenerate_tol=degenerate_tol
    )
    value = float(ratios.mean())
    return (value, excluded) if return_excluded else value


@dataclass(frozen=True)
class SpacingHistogram:
    bin_edges: np.ndarray
    density: np.ndarray
    n_spacings: int
    covered_fraction: float


def spacing_histogram(phases, n_bins: int = 40, s_max: float = 4.0) -> SpacingHistogram:
    """Density histogram of unit-mean consecutive gaps over [0, s_max].

    The density integrates to the fraction of spacings below s_max (<= 1).
    """
    if isinstance(phases, EigenphaseSet):
        phases = phases.phases
    phases = np.asarray(phases, dtype=float)
    if phases.size < 10:
        raise ValueError("need at least 10 phases")
    gaps = circular_gaps(phases)
    s = gaps / gaps.mean()
    edges = np.linspace(0.0, s_max, n_bins + 1)
    counts, _ = np.histogram(s, bins=edges)
    width = edges[1] - edges[0]
    density = counts / (s.size * width)
    return SpacingHistogram(edges, density, int(s.size), float(counts.sum() / s.size))
