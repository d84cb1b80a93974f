"""Config-driven experiment runner: validated configs, deterministic
artifacts (CSV/JSON/SVG) and replayable manifests.

A run sweeps the grid protocols x initial_states x epsilons. Per grid
point it evolves a disorder ensemble, aggregates derived scalars
(subharmonic weights, peak metrics) as per-realization means with standard
errors, and writes:

    manifest.json            config snapshot, seeds, checksums (written last)
    summary.json             aggregated metrics for the whole grid
    timeseries_*.csv         realization-0 record per grid point
    spectrum_*.csv           realization-0 periodogram of the Mz channel
    identity_report.json     closed-form identity residuals (on request)
    rstats / spacing CSVs    level statistics (on request)

Identical config + base_seed reproduce all CSV outputs bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from . import __version__
from .chain import ChainShape
from .disorder import StaticLayerParams, derive_seed, sample_disorder
from .engine import FloquetProtocol, TimeSeries, evolve_record, run_ensemble
from .kicks import EmbeddedKickSpec, GlobalKickSpec, KickSpec, compile_kick
from .levelstats import build_floquet_matrix, eigenphases, gap_ratio, spacing_histogram
from .normal_form import identity_report
from .observables import (
    BlockResolved,
    BlockWeights,
    ChainMagnetization,
    ChargedProbe,
    SitewiseHermitian,
    omega4,
    sz_operator,
)
from .baselines import build_plain_baseline, encode_d4_to_two_qubits, map_qutrit_doublet_to_qubit
from .presets import load_experiment_preset, protocol_preset
from .spectral import peak_metrics, periodogram, subharmonic_weight
from .states import build_initial_state

OUTPUT_ROOT_ENV = "QDTC_OUTPUT_ROOT"


def default_epsilon_grid(n_points: int = 16) -> list[float]:
    """Log-spaced sweep grid in [1e-3, 0.2] (artifact default)."""
    return [float(e) for e in np.logspace(math.log10(1e-3), math.log10(0.2), n_points)]


# ---------------------------------------------------------------------------
# config models


class KickConfig(BaseModel):
    kind: Literal["global", "embedded"]
    cycle_order: int | None = None
    axis: str = "x"
    blocks: list[list[int]] | None = None
    cycles: list[int] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "global" and self.cycle_order is None:
            raise ValueError("global kick requires cycle_order")
        if self.kind == "embedded" and not self.blocks:
            raise ValueError("embedded kick requires blocks")
        return self

    def build(self, local_dim: int, epsilon: float) -> KickSpec:
        if self.kind == "global":
            return GlobalKickSpec(local_dim, self.cycle_order, epsilon, self.axis)
        return EmbeddedKickSpec(
            local_dim,
            tuple(tuple(b) for b in self.blocks),
            epsilon,
            tuple(self.cycles) if self.cycles else (),
        )


class StaticConfig(BaseModel):
    field_halfwidth: float = StaticLayerParams().field_halfwidth
    coupling_center: float = StaticLayerParams().coupling_center
    coupling_halfwidth: float = StaticLayerParams().coupling_halfwidth

    def build(self) -> StaticLayerParams:
        return StaticLayerParams(
            self.field_halfwidth, self.coupling_center, self.coupling_halfwidth
        )


class ProtocolEntry(BaseModel):
    preset: str | None = None
    label: str | None = None
    local_dim: int | None = None
    n_sites: int | None = None
    kick: KickConfig | None = None
    observables: list = Field(default_factory=lambda: ["Mz"])

    @model_validator(mode="after")
    def _resolve(self):
        if self.preset is not None:
            base = protocol_preset(self.preset)
            if self.local_dim is None:
                self.local_dim = base["local_dim"]
            if self.n_sites is None:
                self.n_sites = base["n_sites"]
            if self.kick is None:
                self.kick = KickConfig(**base["kick"])
            if self.label is None:
                self.label = self.preset
        if self.local_dim is None or self.n_sites is None or self.kick is None:
            raise ValueError(
                "protocol entry needs either a preset or explicit "
                "local_dim, n_sites and kick"
            )
        if self.label is None:
            self.label = f"d{self.local_dim}-{self.kick.kind}"
        return self


class CmTarget(BaseModel):
    channel: str = "Mz"
    m: int

    @field_validator("m")
    @classmethod
    def _nonzero(cls, v):
        if v == 0:
            raise ValueError("m must be a nonzero integer")
        return v

    @property
    def key(self) -> str:
        return f"{self.channel}@{self.m}"


class PeakConfig(BaseModel):
    channel: str = "Mz"
    m: int = 2
    halfwidth: int = 3

    @property
    def key(self) -> str:
        return f"{self.channel}@{self.m}"


class SpectrumStatsConfig(BaseModel):
    n_realizations: int = 8
    dense_cap: int = 8192
    histogram_bins: int = 40
    histogram_smax: float = 4.0


class BaselineConfig(BaseModel):
    kinds: list[Literal["doublet", "enc", "plain"]]
    cross_leg_weight: float = 0.0  # lambda for the PLAIN model


class AnalysesConfig(BaseModel):
    cm: list[CmTarget] = Field(default_factory=lambda: [CmTarget(m=2)])
    peaks: list[PeakConfig] = Field(default_factory=list)
    spectrum_stats: SpectrumStatsConfig | None = None
    identities: bool = False
    baselines: BaselineConfig | None = None


class ExperimentConfig(BaseModel):
    name: str
    protocols: list[ProtocolEntry] = Field(min_length=1)
    epsilons: list[float] = Field(min_length=1)
    initial_states: list = Field(default_factory=lambda: ["0"])
    n_periods: int = 300
    n_realizations: int = 20
    base_seed: int = 1234
    static: StaticConfig = Field(default_factory=StaticConfig)
    analyses: AnalysesConfig = Field(default_factory=AnalysesConfig)
    output_dir: str | None = None

    @field_validator("epsilons")
    @classmethod
    def _finite(cls, v):
        for e in v:
            if not math.isfinite(e):
                raise ValueError("epsilon values must be finite")
        return v

    @model_validator(mode="after")
    def _check(self):
        if self.n_periods < 2:
            raise ValueError("n_periods must be >= 2")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        return self


def load_config(source: str | Path | dict) -> ExperimentConfig:
    """Config from a dict, a JSON file path, or an experiment preset name."""
    if isinstance(source, dict):
        return ExperimentConfig.model_validate(source)
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        return ExperimentConfig.model_validate(json.loads(path.read_text()))
    return ExperimentConfig.model_validate(load_experiment_preset(str(source)))


def config_schema() -> dict:
    return ExperimentConfig.model_json_schema()


# ---------------------------------------------------------------------------
# observables from config


def _build_observables(entry: ProtocolEntry, epsilon: float):
    specs = []
    d = entry.local_dim
    kick = entry.kick.build(d, epsilon)
    carrier = compile_kick(kick).carrier if entry.kick.kind == "embedded" else None
    for item in entry.observables:
        if isinstance(item, str):
            if item == "Mz":
                specs.append(ChainMagnetization())
            elif item == "Omega4":
                if d != 4:
                    raise ValueError("Omega4 requires local_dim 4")
                probe = ChargedProbe(omega4(), charge=1, cycle_order=4, name="Omega4")
                if carrier is None:
                    raise ValueError("Omega4 requires an embedded cyclic carrier")
                probe.validate_carrier(carrier)
                specs.append(probe)
            elif item == "block:Mz":
                if not isinstance(kick, EmbeddedKickSpec):
                    raise ValueError("block:Mz requires an embedded kick")
                blocks = kick.blocks
                inactive = kick.partition.inactive_levels
                full = blocks + ((inactive,) if inactive else ())
                specs.append(BlockResolved(full, sz_operator(d)))
            elif item == "block_weights":
                if not isinstance(kick, EmbeddedKickSpec):
                    raise ValueError("block_weights requires an embedded kick")
                blocks = kick.blocks
                inactive = kick.partition.inactive_levels
                full = blocks + ((inactive,) if inactive else ())
                specs.append(BlockWeights(full))
            else:
                raise ValueError(f"unknown observable {item!r}")
        elif isinstance(item, dict):
            matrix = np.array(
                [[complex(c[0], c[1]) if isinstance(c, list) else complex(c)
                  for c in row] for row in item["matrix"]]
            )
            op = __import__("quditdtc.chain", fromlist=["SiteOperator"]).SiteOperator(d, matrix)
            if item.get("kind", "sitewise") == "charged":
                probe = ChargedProbe(op, int(item["charge"]), int(item["cycle_order"]),
                                     item.get("name", "probe"))
                if carrier is not None:
                    probe.validate_carrier(carrier)
                specs.append(probe)
            else:
                specs.append(SitewiseHermitian(op, item.get("name", "custom")))
        else:
            raise ValueError(f"bad observable spec {item!r}")
    return specs


def _derived_metrics(analyses: AnalysesConfig, channels: tuple[str, ...]):
    metrics = {}
    for target in analyses.cm:
        if target.channel not in channels:
            continue

        def cm_fn(ts: TimeSeries, _ch=target.channel, _m=target.m) -> float:
            value = subharmonic_weight(periodogram(ts.column(_ch)), _m)
            return float("nan") if value is None else value

        metrics[f"C[{target.key}]"] = cm_fn
    for peak in analyses.peaks:
        if peak.channel not in channels:
            continue

        def df_fn(ts: TimeSeries, _p=peak) -> float:
            pm = peak_metrics(periodogram(ts.column(_p.channel)), _p.m, _p.halfwidth)
            return float("nan") if pm is None else pm.delta_f

        def gm_fn(ts: TimeSeries, _p=peak) -> float:
            pm = peak_metrics(periodogram(ts.column(_p.channel)), _p.m, _p.halfwidth)
            return float("nan") if pm is None else pm.gamma

        metrics[f"delta_f[{peak.key}]"] = df_fn
        metrics[f"gamma[{peak.key}]"] = gm_fn
    return metrics


# ---------------------------------------------------------------------------
# deterministic file output


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j".replace("+-", "-")
    return str(value)


def write_timeseries_csv(path: Path, ts: TimeSeries) -> None:
    lines = []
    header = ["n"]
    columns = []
    for name in ts.channels:
        col = ts.column(name)
        if np.iscomplexobj(col):
            header += [f"re_{name}", f"im_{name}"]
            columns += [col.real, col.imag]
        else:
            header.append(name)
            columns.append(col)
    lines.append(",".join(header))
    for n in range(ts.n_periods):
        lines.append(",".join([str(n)] + [_fmt(float(c[n])) for c in columns]))
    path.write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path: Path, power: np.ndarray) -> None:
    n = power.size
    lines = ["k,f,S"]
    for k in range(n):
        lines.append(f"{k},{_fmt(k / n)},{_fmt(float(power[k]))}")
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# analyses


def _run_spectrum_stats(entry: ProtocolEntry, static: StaticLayerParams,
                        epsilons, base_seed: int, cfg: SpectrumStatsConfig,
                        out_dir: Path, tag: str) -> list[dict]:
    shape = ChainShape(entry.n_sites, entry.local_dim)
    if shape.dim > cfg.dense_cap:
        raise ValueError(
            f"dense dimension {shape.dim} exceeds cap {cfg.dense_cap}; "
            "reduce n_sites for spectrum statistics"
        )
    rows = []
    for ie, eps in enumerate(epsilons):
        kick = entry.kick.build(entry.local_dim, eps)
        values = []
        pooled = []
        for r in range(cfg.n_realizations):
            realization = sample_disorder(static, shape, derive_seed(base_seed, r))
            protocol = FloquetProtocol(shape, kick, static, realization)
            phases = eigenphases(build_floquet_matrix(protocol, cfg.dense_cap))
            values.append(gap_ratio(phases))
            gaps = np.diff(np.concatenate([phases.phases, [phases.phases[0] + 2 * np.pi]]))
            pooled.append(gaps / gaps.mean())
        values = np.array(values)
        hist = np.histogram(
            np.concatenate(pooled),
            bins=cfg.histogram_bins,
            range=(0.0, cfg.histogram_smax),
        )
        counts, edges = hist
        total = sum(p.size for p in pooled)
        density = counts / (total * (edges[1] - edges[0]))
        hist_path = out_dir / f"spacings_{tag}_e{ie}.csv"
        lines = ["s,Ps"]
        centers = (edges[:-1] + edges[1:]) / 2
        for c, dens in zip(centers, density):
            lines.append(f"{_fmt(float(c))},{_fmt(float(dens))}")
        hist_path.write_text("\n".join(lines) + "\n")
        rows.append({
            "epsilon": eps,
            "r_mean": float(values.mean()),
            "r_stderr": float(values.std(ddof=1) / np.sqrt(values.size))
            if values.size > 1 else 0.0,
            "r_values": [float(v) for v in values],
            "spacing_histogram": hist_path.name,
        })
    return rows


def _run_baselines(entry: ProtocolEntry, static: StaticLayerParams, state_spec,
                   epsilons, base_seed: int, n_realizations: int, n_periods: int,
                   cfg: BaselineConfig) -> list[dict]:
    shape = ChainShape(entry.n_sites, entry.local_dim)
    initial = build_initial_state(state_spec, shape)
    rows = []
    for eps in epsilons:
        kick = entry.kick.build(entry.local_dim, eps)
        per_kind: dict[str, dict[str, list[float]]] = {
            k: {"max_abs_dMz": [], "C2_qudit": [], "C2_baseline": []}
            for k in cfg.kinds
        }
        for r in range(n_realizations):
            realization = sample_disorder(static, shape, derive_seed(base_seed, r))
            protocol = FloquetProtocol(shape, kick, static, realization)
            ts_q = evolve_record(initial, protocol, n_periods, [ChainMagnetization()])
            mz_q = ts_q.column("Mz")
            c2_q = subharmonic_weight(periodogram(mz_q), 2)
            for kind in cfg.kinds:
                if kind == "doublet":
                    qubit, map_state = map_qutrit_doublet_to_qubit(protocol)
                elif kind == "enc":
                    qubit, map_state = encode_d4_to_two_qubits(protocol)
                else:
                    qubit = build_plain_baseline(realization, cfg.cross_leg_weight, eps)
                    _, map_state = encode_d4_to_two_qubits(protocol)
                ts_b = evolve_record(map_state(initial), qubit, n_periods,
                                     [qubit.observable])
                mz_b = ts_b.column("Mz")
                stats = per_kind[kind]
                stats["max_abs_dMz"].append(float(np.max(np.abs(mz_q - mz_b))))
                c2_b = subharmonic_weight(periodogram(mz_b), 2)
                stats["C2_qudit"].append(float("nan") if c2_q is None else c2_q)
                stats["C2_baseline"].append(float("nan") if c2_b is None else c2_b)
        for kind in cfg.kinds:
            stats = per_kind[kind]
            rows.append({
                "kind": kind,
                "epsilon": eps,
                "cross_leg_weight": cfg.cross_leg_weight if kind == "plain" else None,
                "max_abs_dMz": max(stats["max_abs_dMz"]),
                "C2_qudit_mean": float(np.nanmean(stats["C2_qudit"])),
                "C2_baseline_mean": float(np.nanmean(stats["C2_baseline"])),
                "C2_qudit_values": stats["C2_qudit"],
                "C2_baseline_values": stats["C2_baseline"],
            })
    return rows


# ---------------------------------------------------------------------------
# main entry


def run_experiment(config: ExperimentConfig | str | Path | dict,
                   output_root: str | Path | None = None,
                   n_workers: int = 1,
                   base_seed: int | None = None) -> Path:
    """Execute a config and return the results directory."""
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    if base_seed is not None:
        cfg = cfg.model_copy(update={"base_seed": base_seed})
    started = time.time()

    if output_root is None:
        output_root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    out_dir = Path(cfg.output_dir) if cfg.output_dir else Path(output_root) / cfg.name
    out_dir.mkdir(parents=True, exist_ok=True)

    static = cfg.static.build()
    results = []
    stats_rows = []
    baseline_rows = []

    for ip, entry in enumerate(cfg.protocols):
        shape = ChainShape(entry.n_sites, entry.local_dim)
        for istate, state_spec in enumerate(cfg.initial_states):
            initial = build_initial_state(state_spec, shape)
            for ie, eps in enumerate(cfg.epsilons):
                kick = entry.kick.build(entry.local_dim, eps)
                observables = _build_observables(entry, eps)
                channels = tuple(
                    ch for obs in observables for ch in obs.channels
                )
                derived = _derived_metrics(cfg.analyses, channels)
                ensemble = run_ensemble(
                    initial, kick, static, cfg.n_realizations, cfg.base_seed,
                    cfg.n_periods, observables, derived, n_workers=n_workers,
                )
                tag = f"p{ip}_s{istate}_e{ie}"
                ts_path = out_dir / f"timeseries_{tag}.csv"
                write_timeseries_csv(ts_path, ensemble.series[0])
                files = {"timeseries": ts_path.name}
                if "Mz" in channels:
                    spec = periodogram(ensemble.series[0].column("Mz"))
                    sp_path = out_dir / f"spectrum_{tag}.csv"
                    write_spectrum_csv(sp_path, spec.power)
                    files["spectrum"] = sp_path.name
                row = {
                    "protocol": entry.label,
                    "initial_state": state_spec,
                    "epsilon": eps,
                    "tag": tag,
                    "files": files,
                    "metrics": {
                        name: {
                            "mean": agg.mean,
                            "stderr": agg.stderr,
                            "values": [float(v) for v in agg.values],
                        }
                        for name, agg in ensemble.derived.items()
                    },
                }
                results.append(row)

        if cfg.analyses.spectrum_stats is not None:
            rows = _run_spectrum_stats(
                entry, static, cfg.epsilons, cfg.base_seed,
                cfg.analyses.spectrum_stats, out_dir, f"p{ip}",
            )
            for row in rows:
                row["protocol"] = entry.label
            stats_rows.extend(rows)

        if cfg.analyses.baselines is not None:
            kinds = [k for k in cfg.analyses.baselines.kinds
                     if _baseline_applies(entry, k)]
            if kinds:
                sub = cfg.analyses.baselines.model_copy(update={"kinds": kinds})
                rows = _run_baselines(
                    entry, static, cfg.initial_states[0], cfg.epsilons,
                    cfg.base_seed, cfg.n_realizations, cfg.n_periods, sub,
                )
                for row in rows:
                    row["protocol"] = entry.label
                baseline_rows.extend(rows)

    summary = {
        "name": cfg.name,
        "version": __version__,
        "grid": {
            "protocols": [e.label for e in cfg.protocols],
            "initial_states": cfg.initial_states,
            "epsilons": cfg.epsilons,
        },
        "n_periods": cfg.n_periods,
        "n_realizations": cfg.n_realizations,
        "results": results,
    }
    if stats_rows:
        summary["spectrum_stats"] = stats_rows
    if baseline_rows:
        summary["baselines"] = baseline_rows
    _write_json(out_dir / "summary.json", summary)

    if cfg.analyses.identities:
        _write_json(out_dir / "identity_report.json", identity_report())

    inventory = {
        p.name: _sha256(p)
        for p in sorted(out_dir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    manifest = {
        "config": cfg.model_dump(mode="json"),
        "version": __version__,
        "base_seed": cfg.base_seed,
        "realization_seeds": [
            derive_seed(cfg.base_seed, r) for r in range(cfg.n_realizations)
        ],
        "wall_seconds": time.time() - started,
        "files": inventory,
    }
    _write_json(out_dir / "manifest.json", manifest)
    return out_dir


def _baseline_applies(entry: ProtocolEntry, kind: str) -> bool:
    kick = entry.kick
    if kind == "doublet":
        return entry.local_dim == 3 and kick.kind == "embedded" and kick.blocks == [[0, 2]]
    return entry.local_dim == 4 and kick.kind == "embedded" and kick.blocks == [[0, 1], [2, 3]]
