"""Exact propagation on the truncated space: unitary and Lindblad.

Closed evolution diagonalizes the time-independent Hamiltonian once. Open evolution
integrates the master equation

    drho/dt = -i[H, rho] + sum_j (L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho})

with L1 = sqrt((n_th + 1) gamma) a, L2 = sqrt(n_th gamma) a^dag, L3 = sqrt(gamma) c.
In the product Fock basis the generator splits into a diagonal part (the number
conserving energies and the damping anticommutator, both diagonal) and a sparse
remainder (photon-exciton hopping and the quantum jumps). The diagonal part is
applied exactly and the remainder with classical RK4 (integrating-factor RK4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

import numba
import numpy as np

from .errors import DimensionMismatch, NonphysicalState, TruncationLeakage
from .fock import (
    FockOperator,
    HilbertConfig,
    QuantumState,
    annihilator,
    build_hamiltonian,
    expectation,
)
from .params import SystemParams
from .series import TimeGrid, WitnessSeries

INITIAL_LEAKAGE_TOL = 1e-6
LEAKAGE_TOL = 1e-4
NEGATIVE_EIG_TOL = 1e-6
DEFAULT_MAX_STEP = 4e-3
# substeps are also capped at this fraction of 1 / (largest damping rate)
DAMPING_STEP_FACTOR = 0.05


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    config: HilbertConfig
    L1: FockOperator
    L2: FockOperator
    L3: FockOperator

    @property
    def operators(self) -> tuple[FockOperator, FockOperator, FockOperator]:
        return (self.L1, self.L2, self.L3)


def lindblad_spec(config: HilbertConfig, params: SystemParams) -> LindbladSpec:
    a = annihilator(config, "exciton")
    c = annihilator(config, "photon")
    return LindbladSpec(
        config,
        math.sqrt((params.n_th + 1) * params.gamma) * a,
        math.sqrt(params.n_th * params.gamma) * a.dag(),
        math.sqrt(params.gamma) * c,
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: tuple
    leakage: np.ndarray
    kind: str  # "closed" | "open"

    def __post_init__(self):
        if len(self.states) != len(self.grid):
            raise ValueError(f"{len(self.states)} states for a grid of {len(self.grid)} points")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "leakage", np.asarray(self.leakage, dtype=float))

    @property
    def config(self) -> HilbertConfig:
        return self.states[0].config

    def __len__(self):
        return len(self.states)


def _check_initial_leakage(state: QuantumState, tol: float):
    top = max(state.top_level_occupation())
    if top > tol:
        raise TruncationLeakage(
            f"initial top-level occupation {top:.3e} exceeds {tol:.1e}", leakage=top
        )


def _check_leakage(top: float, t: float, tol: float):
    if top > tol:
        raise TruncationLeakage(
            f"top-level occupation {top:.3e} at gt = {t:.6g} exceeds {tol:.1e}; "
            "increase the truncation dimensions",
            leakage=top,
        )


def evolve_closed(
    initial: QuantumState,
    params: SystemParams,
    grid: TimeGrid,
    frame: float = 0.0,
    leakage_tol: float = LEAKAGE_TOL,
) -> Trajectory:
    """exp(-iHt)|psi0> at every grid point via the eigenbasis of H."""
    if not initial.is_ket:
        raise ValueError("closed evolution needs a ket; use evolve_lindblad for density matrices")
    _check_initial_leakage(initial, INITIAL_LEAKAGE_TOL)
    config = initial.config
    h = build_hamiltonian(config, params, frame=frame).matrix
    energies, vecs = np.linalg.eigh(h)
    coeffs = vecs.conj().T @ initial.payload
    states = [initial]
    leak = [max(initial.top_level_occupation())]
    for t in grid.points[1:]:
        psi = vecs @ (np.exp(-1j * energies * t) * coeffs)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-9:
            raise NonphysicalState(f"norm drifted to {norm!r} at gt = {t}")
        state = QuantumState._trusted(config, psi, "ket")
        top = max(state.top_level_occupation())
        _check_leakage(top, t, leakage_tol)
        states.append(state)
        leak.append(top)
    return Trajectory(grid, states, np.array(leak), "closed")


@numba.njit(cache=True, fastmath=True)
def _offdiagonal_part(r, nc, h1, h2, ja, jd, jc, g, c1, c2, c3, out):
    # Hopping commutator -i[V, r] with V = -g (a^dag c + c^dag a), plus the jump terms.
    # Basis index m = i * nc + j; every term is a shifted row or column of r times a
    # coefficient vector that is zero wherever the ladder leaves the truncated space.
    d = r.shape[0]
    ig = 1j * g
    for m in range(d):
        o = out[m]
        for n in range(d):
            o[n] = 0j
        a1 = ig * h1[m]
        if a1 != 0:
            src = r[m - nc + 1]
            for n in range(d):
                o[n] += a1 * src[n]
        a2 = ig * h2[m]
        if a2 != 0:
            src = r[m + nc - 1]
            for n in range(d):
                o[n] += a2 * src[n]
        row = r[m]
        for n in range(nc, d):
            o[n] -= ig * h1[n] * row[n - nc + 1]
        for n in range(d - nc + 1):
            o[n] -= ig * h2[n] * row[n + nc - 1]
        if c1 != 0.0 and m + nc < d:
            f = c1 * ja[m]
            src = r[m + nc]
            for n in range(d - nc):
                o[n] += f * ja[n] * src[n + nc]
        if c2 != 0.0 and m >= nc:
            f = c2 * jd[m]
            src = r[m - nc]
            for n in range(nc, d):
                o[n] += f * jd[n] * src[n - nc]
        if c3 != 0.0 and m + 1 < d:
            f = c3 * jc[m]
            src = r[m + 1]
            for n in range(d - 1):
                o[n] += f * jc[n] * src[n + 1]


def _ladder_coefficients(na: int, nc: int):
    i = np.repeat(np.arange(na, dtype=float), nc)
    j = np.tile(np.arange(nc, dtype=float), na)
    h1 = np.where((i >= 1) & (j + 1 < nc), np.sqrt(i * (j + 1)), 0.0)  # from (i-1, j+1)
    h2 = np.where((i + 1 < na) & (j >= 1), np.sqrt((i + 1) * j), 0.0)  # from (i+1, j-1)
    ja = np.where(i + 1 < na, np.sqrt(i + 1), 0.0)
    jd = np.sqrt(i)
    jc = np.where(j + 1 < nc, np.sqrt(j + 1), 0.0)
    return h1, h2, ja, jd, jc


@numba.njit(cache=True, fastmath=True)
def _lawson_rk4_step(r, e_full, e_half, h, nc, lad, g, c1, c2, c3, k1, k2, k3, k4, tmp):
    d = r.shape[0]
    _offdiagonal_part(r, nc, lad[0], lad[1], lad[2], lad[3], lad[4], g, c1, c2, c3, k1)
    for m in range(d):
        for n in range(d):
            tmp[m, n] = e_half[m, n] * (r[m, n] + 0.5 * h * k1[m, n])
    _offdiagonal_part(tmp, nc, lad[0], lad[1], lad[2], lad[3], lad[4], g, c1, c2, c3, k2)
    for m in range(d):
        for n in range(d):
            tmp[m, n] = e_half[m, n] * r[m, n] + 0.5 * h * k2[m, n]
    _offdiagonal_part(tmp, nc, lad[0], lad[1], lad[2], lad[3], lad[4], g, c1, c2, c3, k3)
    for m in range(d):
        for n in range(d):
            tmp[m, n] = e_full[m, n] * r[m, n] + h * e_half[m, n] * k3[m, n]
    _offdiagonal_part(tmp, nc, lad[0], lad[1], lad[2], lad[3], lad[4], g, c1, c2, c3, k4)
    for m in range(d):
        for n in range(d):
            r[m, n] = (
                e_full[m, n] * (r[m, n] + (h / 6.0) * k1[m, n])
                + (h / 3.0) * e_half[m, n] * (k2[m, n] + k3[m, n])
                + (h / 6.0) * k4[m, n]
            )
    # Hermitian symmetrization
    for m in range(d):
        r[m, m] = r[m, m].real
        for n in range(m + 1, d):
            v = 0.5 * (r[m, n] + r[n, m].conjugate())
            r[m, n] = v
            r[n, m] = v.conjugate()


class LindbladPropagator:
    """Fixed-step integrating-factor RK4 for the two-mode master equation."""

    def __init__(self, config: HilbertConfig, params: SystemParams, frame: float = 0.0):
        self.config = config
        self.params = params
        self.frame = frame
        na, nc = config.dim_a, config.dim_c
        n_a = np.repeat(np.arange(na, dtype=float), nc)
        n_c = np.tile(np.arange(nc, dtype=float), na)
        # truncated a a^dag has a zero in the top exciton level
        aad = np.where(n_a < na - 1, n_a + 1, 0.0)
        self.c1 = (params.n_th + 1) * params.gamma
        self.c2 = params.n_th * params.gamma
        self.c3 = params.gamma
        energy = (
            (params.omega1 - frame) * n_a
            + (params.omega2 - frame) * n_c
            + params.chi * n_a * (n_a - 1)
        )
        kappa = self.c1 * n_a + self.c2 * aad + self.c3 * n_c
        self._generator = -1j * (energy[:, None] - energy[None, :]) - 0.5 * (
            kappa[:, None] + kappa[None, :]
        )
        # the jump terms integrated by RK4 scale with the largest damping rate
        self.rate_limited_step = DAMPING_STEP_FACTOR / kappa.max() if kappa.max() > 0 else math.inf
        self._ladder = _ladder_coefficients(na, nc)
        self._factors: dict[float, tuple[np.ndarray, np.ndarray]] = {}
        self._bufs = [np.empty((config.dim, config.dim), dtype=complex) for _ in range(5)]

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side of the master equation for a dense density matrix."""
        rho = np.ascontiguousarray(rho, dtype=complex)
        out = np.empty_like(rho)
        _offdiagonal_part(rho, self.config.dim_c, *self._ladder, self.params.g, self.c1, self.c2, self.c3, out)
        return out + self._generator * rho

    def _exp_factors(self, h: float):
        key = float(h)
        if key not in self._factors:
            self._factors[key] = (np.exp(self._generator * h), np.exp(self._generator * (h / 2)))
        return self._factors[key]

    def step(self, rho: np.ndarray, h: float) -> None:
        """Advance ``rho`` (contiguous complex D x D) in place by one step ``h``."""
        e_full, e_half = self._exp_factors(h)
        _lawson_rk4_step(
            rho, e_full, e_half, h, self.config.dim_c, self._ladder, self.params.g,
            self.c1, self.c2, self.c3, *self._bufs,
        )

    def advance(self, rho: np.ndarray, span: float, max_step: float) -> None:
        if span <= 0:
            return
        max_step = min(max_step, self.rate_limited_step)
        n = max(1, math.ceil(span / max_step - 1e-9))
        h = span / n
        for _ in range(n):
            self.step(rho, h)


def _min_eigenvalue_ok(rho: np.ndarray, tol: float) -> tuple[bool, Optional[float]]:
    # rho + tol*I is positive definite iff every eigenvalue of rho exceeds -tol
    try:
        np.linalg.cholesky(rho + tol * np.eye(rho.shape[0]))
        return True, None
    except np.linalg.LinAlgError:
        return False, float(np.linalg.eigvalsh(rho)[0])


def iter_lindblad(
    initial: QuantumState,
    params: SystemParams,
    grid: TimeGrid,
    max_step: float = DEFAULT_MAX_STEP,
    frame: float = 0.0,
    leakage_tol: float = LEAKAGE_TOL,
    check_positivity: bool = True,
) -> Iterator[tuple[float, QuantumState, float]]:
    """Yield ``(t, state, top_level_occupation)`` on the grid without storing the run.

    Raises
    ------
    TruncationLeakage
        Top-level occupation of either mode exceeds ``leakage_tol``.
    NonphysicalState
        An eigenvalue of rho falls below -1e-6 or the trace drifts by more than 1e-7.
    """
    if params.gamma < 0:
        raise ValueError("gamma must be >= 0")
    if max_step <= 0:
        raise ValueError("max_step must be > 0")
    _check_initial_leakage(initial, INITIAL_LEAKAGE_TOL)
    config = initial.config
    prop = LindbladPropagator(config, params, frame=frame)
    rho = np.ascontiguousarray(initial.density_matrix(), dtype=complex)
    t_prev = 0.0
    for t in grid.points:
        prop.advance(rho, t - t_prev, max_step)
        t_prev = t
        trace = np.trace(rho).real
        if abs(trace - 1.0) > 1e-7:
            raise NonphysicalState(f"trace drifted to {trace!r} at gt = {t:.6g}")
        if check_positivity:
            ok, lam = _min_eigenvalue_ok(rho, NEGATIVE_EIG_TOL)
            if not ok:
                raise NonphysicalState(f"eigenvalue {lam:.3e} of rho at gt = {t:.6g}")
        state = QuantumState._trusted(config, rho.copy(), "density")
        top = max(state.top_level_occupation())
        _check_leakage(top, t, leakage_tol)
        yield float(t), state, top


def evolve_lindblad(
    initial: QuantumState,
    params: SystemParams,
    grid: TimeGrid,
    max_step: float = DEFAULT_MAX_STEP,
    frame: float = 0.0,
    leakage_tol: float = LEAKAGE_TOL,
    check_positivity: bool = True,
) -> Trajectory:
    """Density-matrix trajectory of the master equation on ``grid``.

    A ket initial state is promoted to a projector. Each grid interval is split
    into equal steps no longer than ``max_step`` (and no longer than 0.05 over the
    largest damping rate, which only binds for strong damping).
    """
    states, leak = [], []
    for _, state, top in iter_lindblad(
        initial, params, grid, max_step=max_step, frame=frame,
        leakage_tol=leakage_tol, check_positivity=check_positivity,
    ):
        states.append(state)
        leak.append(top)
    return Trajectory(grid, states, np.array(leak), "open")


def lindblad_rhs_dense(rho: np.ndarray, hamiltonian: FockOperator, spec: LindbladSpec) -> np.ndarray:
    """Master-equation right-hand side by plain dense matrix products."""
    h = hamiltonian.matrix
    out = -1j * (h @ rho - rho @ h)
    for op in spec.operators:
        L = op.matrix
        LdL = L.conj().T @ L
        out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def observables_over(trajectory: Trajectory, ops: Mapping[str, FockOperator]) -> WitnessSeries:
    """Expectation of each named operator at every grid point.

    Columns whose imaginary part stays below 1e-10 are stored as real; otherwise
    the operator contributes ``<name>_re`` and ``<name>_im`` columns.
    """
    for name, op in ops.items():
        if op.config != trajectory.config:
            raise DimensionMismatch(f"operator {name!r} on {op.config}, trajectory on {trajectory.config}")
    cols: dict[str, np.ndarray] = {}
    for name, op in ops.items():
        vals = np.array([expectation(s, op) for s in trajectory.states])
        if np.max(np.abs(vals.imag)) <= 1e-10:
            cols[name] = vals.real
        else:
            cols[f"{name}_re"] = vals.real
            cols[f"{name}_im"] = vals.imag
    source = "numeric-closed" if trajectory.kind == "closed" else "numeric-open"
    return WitnessSeries(trajectory.grid, cols, source)
