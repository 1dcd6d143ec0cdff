"""Packaged reference style-weight presets.

happy and sad are weight vectors over the radius/height/orientation
features; hesitant adds per-segment velocity weights that reward speed in
the first half of a 10-waypoint motion and penalize it in the second, so
optimized motions slow down toward the goal. These serve as ground-truth
oracles for automated training runs.
"""

import json
from importlib import resources

from ..costs import StyleCost, cost_from_json

BUILTIN = ("happy", "sad", "hesitant")


def load_oracle(name: str) -> StyleCost:
    if name not in BUILTIN:
        raise ValueError(f"unknown oracle {name!r}; built-ins: {', '.join(BUILTIN)}")
    text = resources.files(__package__).joinpath(f"{name}.json").read_text()
    return cost_from_json(json.loads(text))
