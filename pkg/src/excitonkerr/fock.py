"""Truncated two-mode Fock space: ladder operators, canonical states, expectations.

The composite space is always ordered exciton (mode a) first, photon (mode c)
second, so the basis index of |n_a, n_c> is ``n_a * dim_c + n_c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DimensionMismatch, IndexOutOfRange, InvalidConfig, TruncationLeakage
from .params import SystemParams

Mode = Literal["exciton", "photon"]

_MODE_ALIASES = {"exciton": "exciton", "a": "exciton", "photon": "photon", "c": "photon"}

KET_NORM_TOL = 1e-9
DENSITY_HERMITIAN_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-9
DENSITY_EIG_TOL = 1e-9
COHERENT_LEAKAGE_TOL = 1e-6


def _mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"mode must be 'exciton' or 'photon', got {mode!r}") from None


@dataclass(frozen=True)
class HilbertConfig:
    dim_a: int = 20
    dim_c: int = 20

    def __post_init__(self):
        for name in ("dim_a", "dim_c"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidConfig(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise InvalidConfig(f"{name} must be >= 2, got {value}")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_c

    def mode_dim(self, mode: str) -> int:
        return self.dim_a if _mode(mode) == "exciton" else self.dim_c


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense matrix on the composite space, tagged with its truncation."""

    config: HilbertConfig
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.config.dim, self.config.dim):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match composite dimension {self.config.dim}"
            )
        m = m.astype(complex, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, FockOperator):
            if other.config != self.config:
                raise DimensionMismatch(f"{self.config} vs {other.config}")
            return other.matrix
        raise TypeError(f"cannot combine FockOperator with {type(other).__name__}")

    def __add__(self, other):
        return FockOperator(self.config, self.matrix + self._coerce(other))

    def __sub__(self, other):
        return FockOperator(self.config, self.matrix - self._coerce(other))

    def __matmul__(self, other):
        return FockOperator(self.config, self.matrix @ self._coerce(other))

    def __mul__(self, scalar):
        if isinstance(scalar, FockOperator):
            return NotImplemented
        return FockOperator(self.config, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return FockOperator(self.config, -self.matrix)

    def dag(self) -> "FockOperator":
        return FockOperator(self.config, self.matrix.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def commutator(self, other: "FockOperator") -> "FockOperator":
        m = self._coerce(other)
        return FockOperator(self.config, self.matrix @ m - m @ self.matrix)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized ket or density matrix on the composite space."""

    config: HilbertConfig
    payload: np.ndarray
    kind: Literal["ket", "density"] = "ket"

    def __post_init__(self):
        p = np.array(self.payload, dtype=complex)
        d = self.config.dim
        if self.kind == "ket":
            if p.shape != (d,):
                raise DimensionMismatch(f"ket of shape {p.shape}, expected ({d},)")
            norm = np.linalg.norm(p)
            if abs(norm - 1.0) > KET_NORM_TOL:
                raise InvalidConfig(f"ket norm {norm!r} deviates from 1")
        elif self.kind == "density":
            if p.shape != (d, d):
                raise DimensionMismatch(f"density matrix of shape {p.shape}, expected ({d}, {d})")
            herm = np.max(np.abs(p - p.conj().T))
            if herm > DENSITY_HERMITIAN_TOL:
                raise InvalidConfig(f"density matrix not Hermitian (defect {herm:.3e})")
            tr = np.trace(p).real
            if abs(tr - 1.0) > DENSITY_TRACE_TOL:
                raise InvalidConfig(f"density matrix trace {tr!r} deviates from 1")
            lam = np.linalg.eigvalsh(p)[0]
            if lam < -DENSITY_EIG_TOL:
                raise InvalidConfig(f"density matrix has eigenvalue {lam:.3e}")
        else:
            raise ValueError(f"kind must be 'ket' or 'density', got {self.kind!r}")
        p.setflags(write=False)
        object.__setattr__(self, "payload", p)

    @classmethod
    def _trusted(cls, config, payload, kind):
        # skips validation; used by the propagators which check invariants themselves
        obj = object.__new__(cls)
        payload = np.asarray(payload)
        payload.setflags(write=False)
        object.__setattr__(obj, "config", config)
        object.__setattr__(obj, "payload", payload)
        object.__setattr__(obj, "kind", kind)
        return obj

    @property
    def is_ket(self) -> bool:
        return self.kind == "ket"

    def density_matrix(self) -> np.ndarray:
        if self.kind == "ket":
            return np.outer(self.payload, self.payload.conj())
        return np.array(self.payload)

    def to_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        return QuantumState._trusted(self.config, self.density_matrix(), "density")

    def populations(self) -> np.ndarray:
        """Joint occupation probabilities as an array of shape (dim_a, dim_c)."""
        if self.kind == "ket":
            p = np.abs(self.payload) ** 2
        else:
            p = np.diagonal(self.payload).real
        return p.reshape(self.config.dim_a, self.config.dim_c)

    def top_level_occupation(self) -> tuple[float, float]:
        """Probability of the highest retained level of each mode."""
        p = self.populations()
        return float(p[-1, :].sum()), float(p[:, -1].sum())


def identity(config: HilbertConfig) -> FockOperator:
    return FockOperator(config, np.eye(config.dim))


def annihilator(config: HilbertConfig, mode: Mode) -> FockOperator:
    """Annihilation operator a (x) 1 or 1 (x) c on the composite space."""
    if _mode(mode) == "exciton":
        m = np.kron(_ladder(config.dim_a), np.eye(config.dim_c))
    else:
        m = np.kron(np.eye(config.dim_a), _ladder(config.dim_c))
    return FockOperator(config, m)


def number_operator(config: HilbertConfig, mode: Mode) -> FockOperator:
    n = np.arange(config.mode_dim(mode), dtype=float)
    if _mode(mode) == "exciton":
        diag = np.repeat(n, config.dim_c)
    else:
        diag = np.tile(n, config.dim_a)
    return FockOperator(config, np.diag(diag))


def single_mode_operator(config: HilbertConfig, mode: Mode, matrix) -> FockOperator:
    """Embed a single-mode matrix into the composite space."""
    matrix = np.asarray(matrix)
    if matrix.shape != (config.mode_dim(mode),) * 2:
        raise DimensionMismatch(f"single-mode matrix of shape {matrix.shape} for {mode}")
    if _mode(mode) == "exciton":
        return FockOperator(config, np.kron(matrix, np.eye(config.dim_c)))
    return FockOperator(config, np.kron(np.eye(config.dim_a), matrix))


def coherent_amplitudes(z: complex, dim: int) -> tuple[np.ndarray, float]:
    """Truncated, renormalized coherent-state amplitudes and the discarded tail mass."""
    n = np.arange(dim)
    mean = abs(z) ** 2
    if z == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps, 0.0
    log_mag = -mean / 2 + n * np.log(abs(z)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag) * np.exp(1j * np.angle(z) * n)
    tail = float(poisson.sf(dim - 1, mean))
    return amps / np.linalg.norm(amps), tail


def coherent_state(
    config: HilbertConfig,
    alpha_a: complex,
    beta_c: complex,
    leakage_tol: float = COHERENT_LEAKAGE_TOL,
) -> QuantumState:
    """Product coherent state |alpha_a> (x) |beta_c>, renormalized after truncation.

    Raises
    ------
    TruncationLeakage
        If the Poisson tail discarded from either mode exceeds ``leakage_tol``.
    """
    amps_a, tail_a = coherent_amplitudes(complex(alpha_a), config.dim_a)
    amps_c, tail_c = coherent_amplitudes(complex(beta_c), config.dim_c)
    worst = max(tail_a, tail_c)
    if worst > leakage_tol:
        raise TruncationLeakage(
            f"coherent state tail probability {worst:.3e} exceeds {leakage_tol:.1e} "
            f"at dims ({config.dim_a}, {config.dim_c})",
            leakage=worst,
        )
    return QuantumState(config, np.kron(amps_a, amps_c), "ket")


def fock_state(config: HilbertConfig, n_a: int, n_c: int) -> QuantumState:
    if not 0 <= n_a < config.dim_a or not 0 <= n_c < config.dim_c:
        raise IndexOutOfRange(
            f"level ({n_a}, {n_c}) outside truncation ({config.dim_a}, {config.dim_c})"
        )
    psi = np.zeros(config.dim, dtype=complex)
    psi[n_a * config.dim_c + n_c] = 1.0
    return QuantumState(config, psi, "ket")


def expectation(state: QuantumState, op: Union[FockOperator, np.ndarray]) -> complex:
    """<psi|O|psi> for kets, Tr(rho O) for density matrices."""
    if isinstance(op, FockOperator):
        if op.config != state.config:
            raise DimensionMismatch(f"operator on {op.config}, state on {state.config}")
        m = op.matrix
    else:
        m = np.asarray(op)
        if m.shape != (state.config.dim,) * 2:
            raise DimensionMismatch(f"operator of shape {m.shape} for state on {state.config}")
    if state.kind == "ket":
        return complex(np.vdot(state.payload, m @ state.payload))
    return complex(np.sum(state.payload * m.T))


def build_hamiltonian(
    config: HilbertConfig, params: SystemParams, frame: float = 0.0
) -> FockOperator:
    """H = w1 a^dag a + w2 c^dag c - g (a^dag c + c^dag a) + chi a^dag^2 a^2.

    ``frame`` subtracts ``frame * (N_a + N_c)``, i.e. moves to a frame co-rotating
    at that frequency for both modes. The default is the laboratory frame.
    """
    a = annihilator(config, "exciton").matrix.real
    c = annihilator(config, "photon").matrix.real
    n_a = a.T @ a
    n_c = c.T @ c
    hop = a.T @ c
    h = (
        (params.omega1 - frame) * n_a
        + (params.omega2 - frame) * n_c
        - params.g * (hop + hop.T)
        + params.chi * (a.T @ a.T @ a @ a)
    )
    return FockOperator(config, 0.5 * (h + h.T))
