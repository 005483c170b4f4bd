"""Numerical toolkit for affine solutions of the cold-plasma equations.

Subpackages cover the ODE hierarchy (full planar system and its
electrostatic, axisymmetric and radially symmetric reductions), an adaptive
RKF45 integrator with dense output and event location, first-integral and
period machinery, Floquet monodromy/multiplier analysis, and finite-time
blow-up experiments.  A command-line front end is available as
``coldplasma`` (see :mod:`coldplasma.cli`).
"""

from .backend import NUMBA_ACTIVE, backend_name
from .systems import (
    AxisymState2, ElectrostaticState4, EquilibriumSpectrum, PlasmaState9,
    RadialState5, density, embed_axisym, embed_electrostatic, embed_radial,
    equilibrium_spectrum, jacobian_full, rhs_axisym, rhs_electrostatic,
    rhs_full, rhs_radial,
)
from .integrator import (
    EventSpec, IntegratorConfig, StepBudgetExhausted, StepSizeUnderflow,
    Trajectory, integrate, integrate_with_events,
)
from .conserved import (
    PeriodResult, compute_period, first_integral_K, amplitude_roots,
    period_asymptotic, period_event, period_quadrature,
)
from .eigen import EigenResult, NonConvergence, eigen_small
from .floquet import (
    MonodromyResult, ScanRow, asymptotic_multipliers, fundamental_matrix,
    instability_measure, liouville_residual, scan,
)
from .blowup import BlowupReport, growth_rate, magnetic_threshold_probe, \
    simulate_until_blowup

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ACTIVE", "backend_name", "__version__",
    "PlasmaState9", "ElectrostaticState4", "AxisymState2", "RadialState5",
    "EquilibriumSpectrum", "density", "equilibrium_spectrum", "jacobian_full",
    "rhs_full", "rhs_electrostatic", "rhs_axisym", "rhs_radial",
    "embed_radial", "embed_electrostatic", "embed_axisym",
    "IntegratorConfig", "Trajectory", "EventSpec", "integrate",
    "integrate_with_events", "StepBudgetExhausted", "StepSizeUnderflow",
    "PeriodResult", "compute_period", "first_integral_K", "amplitude_roots",
    "period_quadrature", "period_event", "period_asymptotic",
    "EigenResult", "NonConvergence", "eigen_small",
    "MonodromyResult", "ScanRow", "fundamental_matrix",
    "instability_measure", "liouville_residual", "asymptotic_multipliers",
    "scan", "BlowupReport", "simulate_until_blowup", "growth_rate",
    "magnetic_threshold_probe",
]
