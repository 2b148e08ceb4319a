"""Second-order perturbative operator solution and the witnesses built from it.

The Heisenberg operators are expanded as

    a(t) = f1 a + f2 c + f3 a^dag a^2 + f4 a + f5 a^dag a c + f6 c^dag a^2
           + f7 a^dag a^2 + f8 a^dag^2 a^3
    c(t) = h1 c + h2 a + h3 c + h4 a^dag a^2

with every operator on the right taken at t = 0. Expectation values are then taken
in the product coherent state |alpha>|beta>. Every public function accepts a scalar
time or a numpy array of times.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .params import InitialAmplitudes, SystemParams
from .series import TimeGrid, WitnessSeries

# Below this |z| the removable singularities are evaluated by their Taylor series.
_SERIES_RADIUS = 0.1
_SERIES_TERMS = 12


class PerturbativeRangeWarning(UserWarning):
    """Evaluation outside the range where the second-order solution is trustworthy."""


def _check_range(t, params: SystemParams):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be >= 0")
    t_max = float(np.max(t)) if t.size else 0.0
    if params.g * t_max > 0.3 or params.chi * t_max > 1.0:
        warnings.warn(
            f"gt = {params.g * t_max:.3g}, chi t = {params.chi * t_max:.3g}: outside the "
            "perturbative window (gt <= 0.3, chi t <= 1)",
            PerturbativeRangeWarning,
            stacklevel=3,
        )


def _exp_ratio1(z):
    """(e^z - 1) / z, finite at z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    term = np.ones_like(zs)
    acc = np.ones_like(zs)
    for k in range(2, _SERIES_TERMS + 2):
        term = term * zs / k
        acc = acc + term
    out[small] = acc
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _exp_ratio2(z):
    """(e^z - 1 - z) / z^2, finite at z = 0 (value 1/2)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    term = np.full_like(zs, 0.5)
    acc = term.copy()
    for k in range(3, _SERIES_TERMS + 3):
        term = term * zs / k
        acc = acc + term
    out[small] = acc
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl**2
    return out


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """The twelve evolution coefficients at one time (or an array of times)."""

    t: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray
    f5: np.ndarray
    f6: np.ndarray
    f7: np.ndarray
    f8: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    h4: np.ndarray

    NAMES = ("f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "h1", "h2", "h3", "h4")

    def as_array(self) -> np.ndarray:
        """Stack as shape (12, ...) in the order f1..f8, h1..h4."""
        return np.stack([np.asarray(getattr(self, n), dtype=complex) for n in self.NAMES])

    @classmethod
    def from_array(cls, t, arr) -> "CoefficientSet":
        arr = np.asarray(arr, dtype=complex)
        return cls(np.asarray(t, dtype=float), *[arr[i] for i in range(12)])

    def max_abs_difference(self, other: "CoefficientSet") -> float:
        return float(np.max(np.abs(self.as_array() - other.as_array())))


def coefficients(t, params: SystemParams) -> CoefficientSet:
    """Closed-form coefficients, stable as the detuning goes to zero."""
    _check_range(t, params)
    t = np.asarray(t, dtype=float)
    g, chi = params.g, params.chi
    z = 1j * params.delta_omega * t
    e1 = np.exp(-1j * params.omega1 * t)
    e2 = np.exp(-1j * params.omega2 * t)
    r1 = _exp_ratio1(z)
    r2p = _exp_ratio2(z)
    r2m = _exp_ratio2(-z)
    t2 = t * t
    f1 = e1
    f2 = 1j * g * t * r1 * e1
    f3 = -2j * chi * t * e1
    f4 = -(g**2) * t2 * r2p * e1
    f5 = 4 * g * chi * t2 * r2p * e1
    f6 = -2 * g * chi * t2 * r2m * e1
    f7 = -2 * chi**2 * t2 * e1
    f8 = f7.copy()
    h1 = e2
    h2 = f2.copy()
    h3 = -(g**2) * t2 * r2m * e2
    h4 = 2 * g * chi * t2 * r2p * e1
    return CoefficientSet(t, f1, f2, f3, f4, f5, f6, f7, f8, h1, h2, h3, h4)


@numba.njit(cache=True)
def _coefficient_rhs(y, w1, w2, chi, g, d):
    f1 = y[0]
    f2 = y[1]
    f3 = y[2]
    n1 = (f1 * f1.conjugate()).real
    d[0] = -1j * w1 * f1
    d[1] = -1j * w1 * f2 + 1j * g * y[8]
    d[2] = -1j * w1 * f3 - 2j * chi * n1 * f1
    d[3] = -1j * w1 * y[3] + 1j * g * y[9]
    d[4] = -1j * w1 * y[4] - 4j * chi * n1 * f2
    d[5] = -1j * w1 * y[5] - 2j * chi * f1 * f1 * f2.conjugate()
    d[6] = -1j * w1 * y[6] - 2j * chi * n1 * f3
    d[7] = -1j * w1 * y[7] - 4j * chi * n1 * f3 - 2j * chi * f1 * f1 * f3.conjugate()
    d[8] = -1j * w2 * y[8]
    d[9] = -1j * w2 * y[9] + 1j * g * f1
    d[10] = -1j * w2 * y[10] + 1j * g * f2
    d[11] = -1j * w2 * y[11] + 1j * g * f3


@numba.njit(cache=True)
def _integrate_coefficients(times, w1, w2, chi, g, step):
    out = np.empty((times.size, 12), dtype=np.complex128)
    y = np.zeros(12, dtype=np.complex128)
    tmp = np.empty(12, dtype=np.complex128)
    k1 = np.empty(12, dtype=np.complex128)
    k2 = np.empty(12, dtype=np.complex128)
    k3 = np.empty(12, dtype=np.complex128)
    k4 = np.empty(12, dtype=np.complex128)
    y[0] = 1.0
    y[8] = 1.0
    t = 0.0
    for k in range(times.size):
        span = times[k] - t
        if span > 0:
            n = max(1, int(math.ceil(span / step - 1e-9)))
            h = span / n
            for _ in range(n):
                _coefficient_rhs(y, w1, w2, chi, g, k1)
                for i in range(12):
                    tmp[i] = y[i] + 0.5 * h * k1[i]
                _coefficient_rhs(tmp, w1, w2, chi, g, k2)
                for i in range(12):
                    tmp[i] = y[i] + 0.5 * h * k2[i]
                _coefficient_rhs(tmp, w1, w2, chi, g, k3)
                for i in range(12):
                    tmp[i] = y[i] + h * k3[i]
                _coefficient_rhs(tmp, w1, w2, chi, g, k4)
                for i in range(12):
                    y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            t = times[k]
        out[k] = y
    return out


def coefficient_ode_oracle(t, params: SystemParams, step: float = 1e-5) -> CoefficientSet:
    """Integrate the coupled coefficient equations with fixed-step RK4.

    Independent of :func:`coefficients`: starts from f1 = h1 = 1 (all others 0) and
    integrates the linear-in-order equations obtained by matching operator
    monomials, truncated consistently at second order in (g, chi).
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("time must be >= 0")
    order = np.argsort(t_arr, kind="stable")
    sorted_t = t_arr[order]
    raw = _integrate_coefficients(
        sorted_t, params.omega1, params.omega2, params.chi, params.g, step
    )
    vals = np.empty_like(raw)
    vals[order] = raw
    if np.ndim(t) == 0:
        return CoefficientSet.from_array(float(t), vals[0])
    return CoefficientSet.from_array(t_arr, vals.T)


def _cc(z):
    # z + conj(z)
    return 2.0 * np.real(z)


def _prep(t, params, amps):
    c = coefficients(t, params)
    alpha = complex(amps.alpha)
    beta = amps.beta
    return c, alpha, beta


def equal_time_commutators(t, params: SystemParams) -> dict:
    """Coefficients of the normal-ordered expansion of the equal-time commutators.

    Returns the second-order coefficients of [a(t), a^dag(t)] - 1 on the monomials
    1, a^dag a, a^dag^2 a^2 and a^dag c, plus the identity coefficient of
    [c(t), c^dag(t)] - 1 and the first-order part of [a(t), c^dag(t)]. All vanish
    identically when the closed forms are consistent.
    """
    c = coefficients(t, params)
    cj = np.conj
    return {
        "aa_identity": np.abs(c.f1) ** 2 + np.abs(c.f2) ** 2 + _cc(c.f1 * cj(c.f4)) - 1.0,
        "aa_number": 4 * np.real(c.f1 * cj(c.f3)) + 2 * np.abs(c.f3) ** 2 + 2 * _cc(c.f1 * cj(c.f7)),
        "aa_pair": 3 * np.abs(c.f3) ** 2 + 3 * _cc(c.f1 * cj(c.f8)),
        "aa_exchange": cj(c.f1) * c.f5 + 2 * c.f1 * cj(c.f6),
        "cc_identity": np.abs(c.h1) ** 2 + np.abs(c.h2) ** 2 + _cc(c.h1 * cj(c.h3)) - 1.0,
        "ac_identity": c.f1 * cj(c.h2) + c.f2 * cj(c.h1),
    }


def expected_numbers(t, params: SystemParams, amps: InitialAmplitudes):
    """Mean exciton and photon numbers (N_a, N_c)."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2 = abs(al) ** 2
    b2 = abs(be) ** 2
    cubic = a2 * al * cj(be)
    n_a = a2 + np.abs(c.f2) ** 2 * (b2 - a2) + _cc(cj(c.f1) * c.f2 * cj(al) * be - cj(c.h1) * c.h4 * cubic)
    n_c = b2 + np.abs(c.h2) ** 2 * (a2 - b2) + _cc(cj(c.h1) * c.h2 * cj(be) * al + cj(c.h1) * c.h4 * cubic)
    return n_a, n_c


def exciton_quadrature_variances(t, params: SystemParams, amps: InitialAmplitudes):
    """(varX_a, varY_a); the upper sign of the +/- block belongs to X."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2 = abs(al) ** 2
    common = 1 + 2 * np.abs(c.f3) ** 2 * a2**2 + _cc((cj(c.f1) * c.f5 + 2 * c.f1 * cj(c.f6)) * cj(al) * be)
    anomalous = _cc(
        (c.f1 * c.f3 + c.f1 * c.f7) * al**2 + c.f1 * c.f5 * al * be + 2 * c.f1 * c.f8 * a2 * al**2
    )
    return 0.25 * (common + anomalous), 0.25 * (common - anomalous)


def photon_quadrature_variances(t, params: SystemParams, amps: InitialAmplitudes):
    """(varX_c, varY_c): coherent-state value at this perturbative order."""
    _check_range(t, params)
    quarter = np.full(np.shape(t), 0.25)
    return quarter, quarter.copy()


def intermodal_quadrature_variances(t, params: SystemParams, amps: InitialAmplitudes):
    """(varX_ac, varY_ac) for the 1/(2 sqrt 2)-normalized compound quadratures."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2 = abs(al) ** 2
    normal = (
        cj(c.f1) * c.h2
        + c.h1 * cj(c.f2)
        + (cj(c.f1) * c.f5 + 2 * c.f1 * cj(c.f6)) * cj(al) * be
        + (2 * c.f1 * cj(c.h4) + c.h1 * cj(c.f5) + 2 * c.f3 * cj(c.h2)) * a2
    )
    anomalous = (
        (c.f1 * c.f3 + c.f1 * c.f7 + c.f1 * c.h4 + c.h1 * c.f6 + c.h2 * c.f3) * al**2
        + c.f1 * c.f5 * al * be
        + 3 * c.f3**2 * a2 * al**2
    )
    base = 1 + np.abs(c.f3) ** 2 * a2**2
    var_x = 0.25 * (base + 0.5 * _cc(normal + anomalous))
    var_y = 0.25 * (base + 0.5 * _cc(normal - anomalous))
    return var_x, var_y


def antibunching_Da(t, params: SystemParams, amps: InitialAmplitudes):
    """Exciton D_a = (Delta N_a)^2 - <N_a>; negative means sub-Poissonian."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    k = 2 * (cj(c.f1) * c.f5 + c.f1 * cj(c.f6) + 2 * c.f2 * cj(c.f3) + cj(c.f1) ** 2 * c.f2 * c.f3)
    return _cc(k * abs(al) ** 2 * cj(al) * be)


def antibunching_Dc(t, params: SystemParams, amps: InitialAmplitudes):
    c, _, be = _prep(t, params, amps)
    return np.abs(c.f2) ** 2 * abs(be) ** 2


def intermodal_Dac(t, params: SystemParams, amps: InitialAmplitudes):
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    k = c.f1 * cj(c.f6) + c.f1 * cj(c.f3) * c.h1 * cj(c.h2)
    return _cc(k * abs(al) ** 2 * cj(al) * be)


def hz1_witness(t, params: SystemParams, amps: InitialAmplitudes):
    """<N_a N_c> - |<a c^dag>|^2; negative means entangled."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2, b2 = abs(al) ** 2, abs(be) ** 2
    k = cj(c.f1) * c.f6 - c.f1 * cj(c.f3) * cj(c.h1) * c.h2
    return np.abs(c.f3) ** 2 * a2**2 * b2 + _cc(k * a2 * al * cj(be))


def hz2_witness(t, params: SystemParams, amps: InitialAmplitudes):
    """<N_a><N_c> - |<a c>|^2; negative means entangled."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2, b2 = abs(al) ** 2, abs(be) ** 2
    return np.abs(c.f3) ** 2 * a2**2 * b2 - _cc(cj(c.h1) * c.h4 * a2 * al * cj(be))


def duan_witness(t, params: SystemParams, amps: InitialAmplitudes):
    """Sum of EPR-quadrature variances minus 2; negative would witness entanglement."""
    c, al, be = _prep(t, params, amps)
    cj = np.conj
    a2 = abs(al) ** 2
    inner = (
        cj(c.f1) * c.h2
        + c.h1 * cj(c.f2)
        + (cj(c.f1) * c.f5 + 2 * c.f1 * cj(c.f6)) * cj(al) * be
        + (2 * c.f1 * cj(c.h4) + c.h1 * cj(c.f5) + 2 * c.f3 * cj(c.h2)) * a2
    )
    return 2 * (np.abs(c.f3) ** 2 * a2**2 + 0.5 * _cc(inner))


def _g2(d, n):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(n) < 1e-12, np.nan, 1.0 + np.asarray(d) / n**2)


def analytic_series(grid: TimeGrid, params: SystemParams, amps: InitialAmplitudes) -> WitnessSeries:
    """Every closed-form witness on ``grid``.

    The range warning is raised once for the whole grid rather than per column.
    """
    t = grid.points
    _check_range(t, params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeRangeWarning)
        n_a, n_c = expected_numbers(t, params, amps)
        vx_a, vy_a = exciton_quadrature_variances(t, params, amps)
        vx_c, vy_c = photon_quadrature_variances(t, params, amps)
        vx_ac, vy_ac = intermodal_quadrature_variances(t, params, amps)
        d_a = antibunching_Da(t, params, amps)
        d_c = antibunching_Dc(t, params, amps)
        hz1 = hz1_witness(t, params, amps)
        cols = {
            "N_a": n_a,
            "N_c": n_c,
            "varX_a": vx_a,
            "varY_a": vy_a,
            "varX_c": vx_c,
            "varY_c": vy_c,
            "varX_ac": vx_ac,
            "varY_ac": vy_ac,
            "D_a": d_a,
            "D_c": d_c,
            "D_ac": intermodal_Dac(t, params, amps),
            "g2_a": _g2(d_a, n_a),
            "g2_c": _g2(d_c, n_c),
            "HZ1": hz1,
            "HZ2": hz2_witness(t, params, amps),
            "Duan": duan_witness(t, params, amps),
            "S_a_to_c": hz1 + n_a / 2,
            "S_c_to_a": hz1 + n_c / 2,
        }
    return WitnessSeries(grid, cols, "analytic")


__all__ = [
    "CoefficientSet",
    "PerturbativeRangeWarning",
    "coefficients",
    "coefficient_ode_oracle",
    "equal_time_commutators",
    "expected_numbers",
    "exciton_quadrature_variances",
    "photon_quadrature_variances",
    "intermodal_quadrature_variances",
    "antibunching_Da",
    "antibunching_Dc",
    "intermodal_Dac",
    "hz1_witness",
    "hz2_witness",
    "duan_witness",
    "analytic_series",
]
