"""Named protocol presets and packaged experiment configurations.

Protocol presets fix the kick family and a default chain size; experiment
presets are JSON config files shipped with the package, named after the
figure-style studies they emulate. Disorder strengths are artifact
defaults (the source protocols do not publish theirs).
"""

from __future__ import annotations

import json
from importlib import resources

PROTOCOL_PRESETS: dict[str, dict] = {
    "d3-global-2T": {
        "local_dim": 3,
        "n_sites": 8,
        "kick": {"kind": "global", "cycle_order": 2, "axis": "x"},
    },
    "d3-embedded-2T": {
        "local_dim": 3,
        "n_sites": 8,
        "kick": {"kind": "embedded", "blocks": [[0, 2]]},
    },
    "d3-global-3T": {
        "local_dim": 3,
        "n_sites": 8,
        "kick": {"kind": "global", "cycle_order": 3, "axis": "x"},
    },
    "d3-embedded-3T": {
        "local_dim": 3,
        "n_sites": 8,
        "kick": {"kind": "embedded", "blocks": [[0, 1, 2]]},
    },
    "d4-symmetric-2T": {
        "local_dim": 4,
        "n_sites": 8,
        "kick": {"kind": "embedded", "blocks": [[0, 3], [1, 2]]},
    },
    "d4-contiguous-2T": {
        "local_dim": 4,
        "n_sites": 8,
        "kick": {"kind": "embedded", "blocks": [[0, 1], [2, 3]]},
    },
    "d4-trimer-3T": {
        "local_dim": 4,
        "n_sites": 6,
        "kick": {"kind": "embedded", "blocks": [[0, 1, 2]]},
    },
    "d4-cyclic-4T": {
        "local_dim": 4,
        "n_sites": 6,
        "kick": {"kind": "embedded", "blocks": [[0, 1, 2, 3]]},
    },
    "d5-mixed": {
        "local_dim": 5,
        "n_sites": 8,
        "kick": {"kind": "embedded", "blocks": [[0, 2, 4], [1, 3]]},
    },
}


def protocol_preset(name: str) -> dict:
    try:
        return json.loads(json.dumps(PROTOCOL_PRESETS[name]))
    except KeyError:
        known = ", ".join(sorted(PROTOCOL_PRESETS))
        raise KeyError(f"unknown protocol preset {name!r}; known: {known}") from None


def experiment_preset_names() -> list[str]:
    files = resources.files("quditdtc").joinpath("presets")
    return sorted(p.name[: -len(".json")] for p in files.iterdir()
                  if p.name.endswith(".json"))


def load_experiment_preset(name: str) -> dict:
    path = resources.files("quditdtc").joinpath("presets", f"{name}.json")
    try:
        text = path.read_text()
    except FileNotFoundError:
        known = ", ".join(experiment_preset_names())
        raise KeyError(f"unknown experiment preset {name!r}; known: {known}") from None
    return json.loads(text)
