"""Initial-state construction from config-friendly descriptions.

Accepted forms:

* "2"          -- the basis level |2>
* "0+2"        -- equal superposition (|0>+|2>)/sqrt(2)
* "L8"         -- d=4 preparation labels L0..L14 (tensor-power states)
* [a0, a1, ..] -- explicit amplitudes, real or [re, im] pairs
* {"levels": [0, 1], "angle": t} -- cos(t)|0> + sin(t)|1>

All of these describe one site; chain states are tensor powers.
"""

from __future__ import annotations

import math

import numpy as np

from .chain import ChainShape, QuditState, basis_product_state, prepare_product_state

# d=4 preparation labels: tensor powers of these single-site combinations.
D4_LABELS = {
    "L0": "0", "L1": "1", "L2": "2", "L3": "3",
    "L4": "0+1", "L5": "0+2", "L6": "1+2", "L7": "2+3",
    "L8": "1+3", "L9": "3+0",
    "L10": "0+1+2", "L11": "1+2+3", "L12": "2+3+0", "L13": "3+0+1",
    "L14": "0+1+2+3",
}


def parse_site_state(spec, d: int) -> np.ndarray:
    """Normalized length-d site vector from a config description."""
    if isinstance(spec, str):
        text = spec.strip()
        if text.upper() in D4_LABELS:
            if d != 4:
                raise ValueError(f"label {text} is defined for d=4 only")
            text = D4_LABELS[text.upper()]
        levels = [int(part) for part in text.split("+")]
        vec = np.zeros(d, dtype=np.complex128)
        for lv in levels:
            if not 0 <= lv < d:
                raise ValueError(f"level {lv} out of range for d={d}")
            vec[lv] += 1.0
        return vec / np.linalg.norm(vec)
    if isinstance(spec, dict):
        levels = spec["levels"]
        angle = float(spec["angle"])
        if len(levels) != 2:
            raise ValueError("angle form requires exactly two levels")
        vec = np.zeros(d, dtype=np.complex128)
        vec[int(levels[0])] = math.cos(angle)
        vec[int(levels[1])] = math.sin(angle)
        return vec
    vec = np.array(
        [complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a) for a in spec],
        dtype=np.complex128,
    )
    if vec.shape != (d,):
        raise ValueError(f"amplitude list has length {vec.size}, expected {d}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("zero state vector")
    return vec / norm


def build_initial_state(spec, shape: ChainShape) -> QuditState:
    """Tensor-power chain state from a site description."""
    if isinstance(spec, str):
        text = spec.strip()
        label = D4_LABELS.get(text.upper(), text) if shape.local_dim == 4 else text
        if "+" not in label and label.lstrip("-").isdigit():
            return basis_product_state(shape, int(label))
    return prepare_product_state(shape, parse_site_state(spec, shape.local_dim))
