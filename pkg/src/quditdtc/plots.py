"""Deterministic SVG plots from a results directory.

Output depends only on the summary/CSV contents: the SVG hash salt is
pinned, savefig metadata is stripped, and every file ends with a comment
carrying the manifest checksum.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .levelstats import GOE_R, POISSON_R

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _setup():
    plt.rcParams["svg.hashsalt"] = "quditdtc"
    plt.rcParams["figure.figsize"] = (6.0, 4.0)


def _finish(fig, path: Path, checksum: str) -> Path:
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    text = path.read_text()
    path.write_text(text + f"<!-- manifest sha256: {checksum} -->\n")
    return path


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    lines = path.read_text().strip().split("\n")
    names = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(names)}


def emit_plots(results_dir: str | Path) -> list[Path]:
    _setup()
    results_dir = Path(results_dir)
    summary_path = results_dir / "summary.json"
    if not summary_path.exists():
        raise FileNotFoundError(f"missing inputs: {summary_path}")
    summary = json.loads(summary_path.read_text())
    manifest_path = results_dir / "manifest.json"
    checksum = (
        hashlib.sha256(manifest_path.read_bytes()).hexdigest()
        if manifest_path.exists() else "missing-manifest"
    )

    written: list[Path] = []
    epsilons = summary["grid"]["epsilons"]
    results = summary["results"]

    if len(epsilons) == 1:
        for row in results:
            tag = row["tag"]
            ts = _read_csv(results_dir / row["files"]["timeseries"])
            fig, ax = plt.subplots()
            for name, col in ts.items():
                if name != "n":
                    ax.plot(ts["n"], col, lw=0.8, label=name)
            ax.set_xlabel("period n")
            ax.set_ylabel("observable")
            ax.legend(fontsize=8)
            ax.set_title(f"{row['protocol']} eps={row['epsilon']:g}")
            written.append(_finish(fig, results_dir / f"timeseries_{tag}.svg", checksum))
            if "spectrum" in row["files"]:
                sp = _read_csv(results_dir / row["files"]["spectrum"])
                fig, ax = plt.subplots()
                ax.semilogy(sp["f"], np.maximum(sp["S"], 1e-16), lw=0.8)
                ax.set_xlabel("f (cycles per period)")
                ax.set_ylabel("S(f)")
                ax.set_title(f"{row['protocol']} spectrum")
                written.append(_finish(fig, results_dir / f"spectrum_{tag}.svg", checksum))
    else:
        metric_names = sorted({m for row in results for m in row["metrics"]})
        for metric in metric_names:
            if not metric.startswith(("C[", "delta_f[", "gamma[")):
                continue
            fig, ax = plt.subplots()
            for protocol in summary["grid"]["protocols"]:
                for state in summary["grid"]["initial_states"]:
                    xs, ys, es = [], [], []
                    for row in results:
                        if row["protocol"] != protocol or row["initial_state"] != state:
                            continue
                        if metric not in row["metrics"]:
                            continue
                        xs.append(row["epsilon"])
                        ys.append(row["metrics"][metric]["mean"])
                        es.append(row["metrics"][metric]["stderr"])
                    if xs:
                        label = protocol if len(summary["grid"]["initial_states"]) == 1 \
                            else f"{protocol} | {state}"
                        ax.errorbar(xs, ys, yerr=es, marker="o", ms=3, lw=1, label=label)
            ax.set_xscale("log")
            ax.set_xlabel("epsilon")
            ax.set_ylabel(metric)
            ax.legend(fontsize=7)
            safe = metric.replace("[", "_").replace("]", "").replace("@", "_m")
            written.append(_finish(fig, results_dir / f"sweep_{safe}.svg", checksum))

    for block, fname in ((summary.get("spectrum_stats"), "r_vs_eps.svg"),):
        if not block:
            continue
        fig, ax = plt.subplots()
        protocols = sorted({row["protocol"] for row in block})
        for protocol in protocols:
            rows = [r for r in block if r["protocol"] == protocol]
            xs = [r["epsilon"] for r in rows]
            ys = [r["r_mean"] for r in rows]
            es = [r["r_stderr"] for r in rows]
            ax.errorbar(xs, ys, yerr=es, marker="o", ms=3, lw=1, label=protocol)
        ax.axhline(POISSON_R, color="gray", ls="--", lw=1, label="Poisson 0.3863")
        ax.axhline(GOE_R, color="black", ls=":", lw=1, label="GOE 0.5307")
        ax.set_xscale("log")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("<r>")
        ax.legend(fontsize=7)
        written.append(_finish(fig, results_dir / fname, checksum))

    for path in sorted(results_dir.glob("spacings_*.csv")):
        data = _read_csv(path)
        fig, ax = plt.subplots()
        ax.bar(data["s"], data["Ps"], width=data["s"][1] - data["s"][0],
               align="center", alpha=0.7)
        s = np.linspace(0, data["s"][-1], 200)
        ax.plot(s, np.exp(-s), "k--", lw=1, label="Poisson e^-s")
        ax.plot(s, np.pi * s / 2 * np.exp(-np.pi * s**2 / 4), "k:", lw=1,
                label="Wigner surmise")
        ax.set_xlabel("s")
        ax.set_ylabel("P(s)")
        ax.legend(fontsize=8)
        ax.set_title(path.stem)
        written.append(_finish(fig, path.with_suffix(".svg"), checksum))

    if baselines := summary.get("baselines"):
        fig, ax = plt.subplots()
        kinds = sorted({row["kind"] for row in baselines})
        for kind in kinds:
            rows = [r for r in baselines if r["kind"] == kind]
            xs = [r["epsilon"] for r in rows]
            ax.plot(xs, [r["C2_baseline_mean"] for r in rows], marker="s", ms=3,
                    lw=1, label=f"{kind} baseline")
        xs = [r["epsilon"] for r in baselines if r["kind"] == kinds[0]]
        ax.plot(xs, [r["C2_qudit_mean"] for r in baselines if r["kind"] == kinds[0]],
                marker="o", ms=3, lw=1, label="qudit")
        ax.set_xscale("log")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("C2")
        ax.legend(fontsize=8)
        written.append(_finish(fig, results_dir / "baselines_C2.svg", checksum))

    if not written:
        raise ValueError("nothing to plot in this results directory")
    return written
