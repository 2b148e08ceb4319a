"""Physical constants of the photon-exciton model and the coherent input amplitudes.

All frequencies and rates are stored in units of the photon-exciton coupling g,
so times are the dimensionless product gt.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

from .errors import InvalidConfig

# CdS values: exciton energy, photon energy and exciton-exciton strength, units of g
CDS_OMEGA1 = 25.277
CDS_OMEGA2 = 24.013
CDS_CHI = 5.304


@dataclass(frozen=True)
class SystemParams:
    omega1: float = CDS_OMEGA1
    omega2: float = CDS_OMEGA2
    chi: float = CDS_CHI
    g: float = 1.0
    gamma: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        for name in ("omega1", "omega2", "chi", "g", "gamma", "n_th"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value != value:
                raise InvalidConfig(f"{name} must be a real number, got {value!r}")
        if self.chi < 0:
            raise InvalidConfig(f"chi must be >= 0, got {self.chi}")
        if self.gamma < 0:
            raise InvalidConfig(f"gamma must be >= 0, got {self.gamma}")
        if self.n_th < 0:
            raise InvalidConfig(f"n_th must be >= 0, got {self.n_th}")

    @property
    def delta_omega(self) -> float:
        return self.omega1 - self.omega2

    @classmethod
    def cds(cls, **overrides) -> "SystemParams":
        """CdS parameter set with optional field overrides."""
        return cls(**overrides)

    def replace(self, **changes) -> "SystemParams":
        fields = {k: getattr(self, k) for k in ("omega1", "omega2", "chi", "g", "gamma", "n_th")}
        fields.update(changes)
        return SystemParams(**fields)


@dataclass(frozen=True)
class InitialAmplitudes:
    """Coherent input |alpha>|beta> with real alpha and beta = |beta| exp(-i phi)."""

    alpha: float = 2.0
    beta_mag: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        if isinstance(self.alpha, complex):
            raise InvalidConfig("alpha is real by construction")
        if self.beta_mag < 0:
            raise InvalidConfig(f"beta_mag must be >= 0, got {self.beta_mag}")

    @property
    def beta(self) -> complex:
        return self.beta_mag * cmath.exp(-1j * self.phi)
