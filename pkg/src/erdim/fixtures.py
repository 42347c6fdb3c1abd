"""Frozen parameter sets shipped with the package.

``exact_low`` and ``exact_high`` are band models on either side of the
two-level effective-reservoir regime; ``pseudomode`` is a damped-mode
configuration for cutoff convergence. Each file records the complexity
estimate that was current when it was frozen.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError
from .exact_model import ExactModel
from .lindblad import PseudomodeParams

NAMES = ("exact_low", "exact_high", "pseudomode")


def load(name: str) -> dict[str, Any]:
    if name not in NAMES:
        raise ValidationError(f"unknown fixture {name!r}; choose from {NAMES}")
    text = resources.files("erdim.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def times(fixture: dict[str, Any]) -> NDArray[np.float64]:
    grid = fixture["grid"]
    return np.linspace(0.0, grid["t_end"], grid["points"])


def exact_model(fixture: dict[str, Any]) -> ExactModel:
    return ExactModel(**fixture["model"])


def pseudomode(fixture: dict[str, Any], cutoff: int) -> PseudomodeParams:
    return PseudomodeParams(cutoff=cutoff, **fixture["model"])
