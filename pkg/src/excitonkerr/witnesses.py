"""Nonclassicality witnesses evaluated directly on kets or density matrices.

Every moment is a contraction of the state with the truncated operator matrix,
so nothing assumes Gaussian or coherent factorization and mixed states from
Lindblad runs are handled the same way as kets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .fock import HilbertConfig, QuantumState, _mode
from .series import WITNESS_COLUMNS, TimeGrid, WitnessSeries

G2_GUARD = 1e-12


def _ladder(n):
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr")


@lru_cache(maxsize=16)
def _operators(config: HilbertConfig) -> dict:
    ia = sp.identity(config.dim_a, format="csr")
    ic = sp.identity(config.dim_c, format="csr")
    a = sp.kron(_ladder(config.dim_a), ic, format="csr")
    c = sp.kron(ia, _ladder(config.dim_c), format="csr")
    ops = {
        "a": a,
        "c": c,
        "aa": a @ a,
        "cc": c @ c,
        "ac": a @ c,
        "acd": a @ c.T,
        "ad_a": a.T @ a,
        "a_ad": a @ a.T,
        "cd_c": c.T @ c,
        "c_cd": c @ c.T,
        "na2": (a.T @ a) @ (a.T @ a),
        "nc2": (c.T @ c) @ (c.T @ c),
        "na_nc": (a.T @ a) @ (c.T @ c),
    }
    out = {}
    for name, m in ops.items():
        coo = m.tocoo()
        out[name] = (coo.row, coo.col, coo.data.astype(complex))
    return out


@dataclass(frozen=True)
class Moments:
    """Raw operator moments of one state (all from the truncated matrices)."""

    a: complex
    c: complex
    aa: complex
    cc: complex
    ac: complex
    acd: complex  # <a c^dag>
    n_a: float
    n_c: float
    a_ad: float  # <a a^dag>
    c_cd: float
    n_a2: float
    n_c2: float
    na_nc: float


def moments(state: QuantumState) -> Moments:
    ops = _operators(state.config)
    p = state.payload
    vals = {}
    if state.is_ket:
        for name, (row, col, data) in ops.items():
            # <psi|O|psi> = sum_k conj(psi[row]) O_k psi[col]
            vals[name] = complex(np.sum(p[row].conj() * data * p[col]))
    else:
        for name, (row, col, data) in ops.items():
            # Tr(O rho) = sum_k O_k rho[col, row]
            vals[name] = complex(np.sum(data * p[col, row]))
    real = lambda k: vals[k].real
    return Moments(
        a=vals["a"], c=vals["c"], aa=vals["aa"], cc=vals["cc"], ac=vals["ac"], acd=vals["acd"],
        n_a=real("ad_a"), n_c=real("cd_c"), a_ad=real("a_ad"), c_cd=real("c_cd"),
        n_a2=real("na2"), n_c2=real("nc2"), na_nc=real("na_nc"),
    )


def _quadratures(m: Moments):
    # X = (k + k^dag)/2, Y = (k - k^dag)/(2i)
    var_x_a = (2 * m.aa.real + m.a_ad + m.n_a) / 4 - m.a.real**2
    var_y_a = (-2 * m.aa.real + m.a_ad + m.n_a) / 4 - m.a.imag**2
    var_x_c = (2 * m.cc.real + m.c_cd + m.n_c) / 4 - m.c.real**2
    var_y_c = (-2 * m.cc.real + m.c_cd + m.n_c) / 4 - m.c.imag**2
    # modes commute, so <X_a X_c> = Re(<ac> + <ac^dag>)/2 and <Y_a Y_c> = -Re(<ac> - <ac^dag>)/2
    cov_x = (m.ac.real + m.acd.real) / 2 - m.a.real * m.c.real
    cov_y = -(m.ac.real - m.acd.real) / 2 - m.a.imag * m.c.imag
    # X_ac = (X_a + X_c)/sqrt(2)
    var_x_ac = 0.5 * (var_x_a + var_x_c + 2 * cov_x)
    var_y_ac = 0.5 * (var_y_a + var_y_c + 2 * cov_y)
    return var_x_a, var_y_a, var_x_c, var_y_c, var_x_ac, var_y_ac


def quadrature_variances(state: QuantumState) -> tuple[float, ...]:
    """(varX_a, varY_a, varX_c, varY_c, varX_ac, varY_ac); coherent value 1/4 each."""
    return _quadratures(moments(state))


def mandel_D(state: QuantumState, mode: str) -> float:
    """<N^2> - <N>^2 - <N>; negative means sub-Poissonian."""
    m = moments(state)
    if _mode(mode) == "exciton":
        return m.n_a2 - m.n_a**2 - m.n_a
    return m.n_c2 - m.n_c**2 - m.n_c


def intermodal_D(state: QuantumState) -> float:
    """<a^dag c^dag c a> - <N_a><N_c>."""
    m = moments(state)
    return m.na_nc - m.n_a * m.n_c


def _hz(m: Moments):
    return m.na_nc - abs(m.acd) ** 2, m.n_a * m.n_c - abs(m.ac) ** 2


def hz_witnesses(state: QuantumState) -> tuple[float, float]:
    """(HZ1, HZ2) = (<N_a N_c> - |<a c^dag>|^2, <N_a><N_c> - |<a c>|^2)."""
    return _hz(moments(state))


def _duan(quads) -> float:
    # u = sqrt(2)(X_a + X_c) = 2 X_ac and v = 2 Y_ac
    return 4 * quads[4] + 4 * quads[5] - 2


def duan_value(state: QuantumState) -> float:
    """<(du)^2> + <(dv)^2> - 2 for the collective EPR quadratures u, v."""
    return _duan(_quadratures(moments(state)))


def steering_witnesses(state: QuantumState) -> tuple[float, float]:
    """(S_a_to_c, S_c_to_a) = HZ1 + <N_a>/2 and HZ1 + <N_c>/2."""
    m = moments(state)
    hz1 = _hz(m)[0]
    return hz1 + m.n_a / 2, hz1 + m.n_c / 2


def g2(n2: float, n: float) -> float:
    """Zero-delay second-order correlation <N^2 - N>/<N>^2, nan for an empty mode."""
    if n < G2_GUARD:
        return math.nan
    return (n2 - n) / n**2


def witness_row(state: QuantumState) -> dict:
    """Every witness column of one state, keyed as in WITNESS_COLUMNS."""
    m = moments(state)
    q = _quadratures(m)
    hz1, hz2 = _hz(m)
    row = {
        "N_a": m.n_a,
        "N_c": m.n_c,
        "varX_a": q[0],
        "varY_a": q[1],
        "varX_c": q[2],
        "varY_c": q[3],
        "varX_ac": q[4],
        "varY_ac": q[5],
        "D_a": m.n_a2 - m.n_a**2 - m.n_a,
        "D_c": m.n_c2 - m.n_c**2 - m.n_c,
        "D_ac": m.na_nc - m.n_a * m.n_c,
        "g2_a": g2(m.n_a2, m.n_a),
        "g2_c": g2(m.n_c2, m.n_c),
        "HZ1": hz1,
        "HZ2": hz2,
        "Duan": _duan(q),
        "S_a_to_c": hz1 + m.n_a / 2,
        "S_c_to_a": hz1 + m.n_c / 2,
    }
    return row


def series_from_states(grid: TimeGrid, states: Iterable[QuantumState], source: str, meta=None) -> WitnessSeries:
    rows = [witness_row(s) for s in states]
    if len(rows) != len(grid):
        raise ValueError(f"{len(rows)} states for a grid of {len(grid)} points")
    cols = {name: np.array([r[name] for r in rows]) for name in WITNESS_COLUMNS}
    series = WitnessSeries(grid, cols, source, dict(meta or {}))
    check_steering_implies_entanglement(series)
    return series


def witness_series(trajectory) -> WitnessSeries:
    """Apply every witness at each grid point of a Trajectory."""
    source = "numeric-closed" if trajectory.kind == "closed" else "numeric-open"
    meta = {"max_leakage": float(np.max(trajectory.leakage))}
    return series_from_states(trajectory.grid, trajectory.states, source, meta)


def check_steering_implies_entanglement(series: WitnessSeries) -> None:
    """S_a_to_c < 0 or S_c_to_a < 0 at a point forces HZ1 < 0 there."""
    steer = (series["S_a_to_c"] < 0) | (series["S_c_to_a"] < 0)
    bad = steer & ~(series["HZ1"] < 0)
    if np.any(bad):
        raise AssertionError(f"steering without HZ1 entanglement at gt = {series.t[bad][0]}")
