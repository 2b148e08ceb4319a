"""Photon mode coupled to a Kerr-nonlinear exciton mode.

Two independent routes to the same nonclassicality witnesses: closed-form
second-order perturbative expressions (:mod:`excitonkerr.analytic`) and exact
propagation on a truncated Fock space (:mod:`excitonkerr.dynamics` with
:mod:`excitonkerr.witnesses`).
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DimensionMismatch,
    ExcitonKerrError,
    IndexOutOfRange,
    InvalidConfig,
    NonphysicalState,
    TruncationLeakage,
)
from .params import InitialAmplitudes, SystemParams  # noqa: E402
from .fock import (  # noqa: E402
    FockOperator,
    HilbertConfig,
    QuantumState,
    annihilator,
    build_hamiltonian,
    coherent_state,
    expectation,
    fock_state,
    number_operator,
)
from .series import TimeGrid, WitnessSeries  # noqa: E402
from .analytic import CoefficientSet, analytic_series, coefficient_ode_oracle, coefficients  # noqa: E402
from .dynamics import LindbladSpec, Trajectory, evolve_closed, evolve_lindblad, observables_over  # noqa: E402
from .witnesses import (  # noqa: E402
    duan_value,
    hz_witnesses,
    intermodal_D,
    mandel_D,
    quadrature_variances,
    steering_witnesses,
    witness_series,
)
