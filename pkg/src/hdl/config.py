"""Documented numerical defaults.

Every threshold used by the library has a default here; callers override
them through keyword arguments (library) or ``--tol.<name>`` (CLI).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Arc distance below which two eigenvalues are merged into one spectral point.
CLUSTER_TOL = 1e-8

#: Relative singular-value threshold for rank decisions.
RANK_TOL = 1e-10

#: Condition number above which a solve is refused.
MAX_CONDITION = 1e12

#: Weights with Frobenius norm below this are dropped from compressed measures.
ATOM_DROP_TOL = 1e-12

#: Default pass/fail thresholds, keyed by the names accepted on the CLI.
DEFAULT_TOLERANCES = {
    "identity": 1e-9,
    "measure": 1e-10,
    "compression": 1e-9,
    "herglotz": 1e-9,
    "cayley": 1e-9,
    "spectral": 1e-9,
    "clark": 1e-9,
    "gap": 1e-8,
    "det": 1e-8,
}


@dataclass(frozen=True)
class ZGrid:
    """Polar grid of evaluation points inside the open unit disc."""

    radii: tuple = (0.3, 0.6, 0.9)
    angles: int = 16
    version: str = "zgrid-v1"

    def points(self) -> np.ndarray:
        phi = 2 * np.pi * np.arange(self.angles) / self.angles
        return np.concatenate([r * np.exp(1j * phi) for r in self.radii])

    def to_dict(self) -> dict:
        return {"version": self.version, "radii": list(self.radii), "angles": self.angles}

    def __post_init__(self):
        if self.angles < 1 or not self.radii:
            raise ValueError("z-grid needs at least one radius and one angle")
        if any(not 0 <= r < 1 for r in self.radii):
            raise ValueError(f"z-grid radii must lie in [0, 1): {self.radii}")


DEFAULT_Z_GRID = ZGrid()


@dataclass
class Tolerances:
    values: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def update(self, overrides: dict) -> None:
        for name, val in overrides.items():
            if name not in self.values:
                raise KeyError(f"unknown tolerance {name!r}; known: {sorted(self.values)}")
            if not val > 0:
                raise ValueError(f"tolerance {name!r} must be positive, got {val}")
            self.values[name] = float(val)
