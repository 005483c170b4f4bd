"""State spaces, right-hand sides and embeddings of the affine plasma hierarchy.

The planar affine ansatz turns the cold-plasma equations into a 9-component
ODE system for the velocity-matrix entries (a, b, c, d), the field-matrix
entries (A, B, C, D) and the out-of-plane magnetic component Bz.  Symmetry
classes reduce it further:

* electrostatic (Bz = 0, b = c = B = C = 0): 4 components (a, d, A, D),
* axisymmetric electrostatic (d = a, D = A): 2 components (a, A),
* radially symmetric with magnetic field: 5 components (a, c, A, C, Bz).

All right-hand sides are pure functions; the electron density n = 1 - tr R
must stay positive for a state to be physically valid, which is checked but
never silently enforced.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels

__all__ = [
    "PlasmaState9", "ElectrostaticState4", "AxisymState2", "RadialState5",
    "EquilibriumSpectrum", "SystemDef", "SYSTEMS",
    "rhs_full", "rhs_electrostatic", "rhs_axisym", "rhs_radial",
    "embed_radial", "embed_electrostatic", "embed_axisym",
    "embed_axisym_into", "project_electrostatic", "project_axisym",
    "project_radial", "density", "system_density", "equilibrium_spectrum",
    "jacobian_full", "variational_rhs_electrostatic",
    "variational_rhs_radial", "variational_rhs_axisym",
]


def _coerce(state, dim: int) -> np.ndarray:
    if hasattr(state, "array"):
        y = state.array
    else:
        y = np.asarray(state, dtype=float)
    if y.shape != (dim,):
        raise ValueError(f"expected a state of dimension {dim}, got shape {y.shape}")
    return y


@dataclass(frozen=True)
class PlasmaState9:
    """Full planar affine state: velocity entries a..d, field entries A..D, Bz."""

    a: float
    b: float
    c: float
    d: float
    A: float
    B: float
    C: float
    D: float
    Bz: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d,
                         self.A, self.B, self.C, self.D, self.Bz])

    @classmethod
    def from_array(cls, y) -> "PlasmaState9":
        y = _coerce(y, 9)
        return cls(*y)

    def density(self) -> float:
        return 1.0 - self.A - self.D

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.array)))

    def is_valid(self) -> bool:
        return self.is_finite() and self.density() > 0.0


@dataclass(frozen=True)
class ElectrostaticState4:
    """Electrostatic state (a, d, A, D); embeds with b=c=B=C=Bz=0."""

    a: float
    d: float
    A: float
    D: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a, self.d, self.A, self.D])

    @classmethod
    def from_array(cls, y) -> "ElectrostaticState4":
        return cls(*_coerce(y, 4))

    def density(self) -> float:
        return 1.0 - self.A - self.D

    def is_valid(self) -> bool:
        return bool(np.all(np.isfinite(self.array))) and self.density() > 0.0


@dataclass(frozen=True)
class AxisymState2:
    """Axisymmetric electrostatic state (a, A); valid while A < 1/2."""

    a: float
    A: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a, self.A])

    @classmethod
    def from_array(cls, y) -> "AxisymState2":
        return cls(*_coerce(y, 2))

    def density(self) -> float:
        return 1.0 - 2.0 * self.A

    def is_valid(self) -> bool:
        return bool(np.all(np.isfinite(self.array))) and self.A < 0.5


@dataclass(frozen=True)
class RadialState5:
    """Radially symmetric state (a, c, A, C, Bz); valid while A < 1/2."""

    a: float
    c: float
    A: float
    C: float
    Bz: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a, self.c, self.A, self.C, self.Bz])

    @classmethod
    def from_array(cls, y) -> "RadialState5":
        return cls(*_coerce(y, 5))

    def density(self) -> float:
        return 1.0 - 2.0 * self.A

    def is_valid(self) -> bool:
        return bool(np.all(np.isfinite(self.array))) and self.A < 0.5


@dataclass(frozen=True)
class EquilibriumSpectrum:
    """Linearization eigenvalues at the zero-flow equilibrium with Bz = Bz0."""

    Bz0: float
    eigenvalues: tuple

    def max_real_part(self) -> float:
        return max(ev.real for ev in self.eigenvalues)


# ---------------------------------------------------------------------------
# Right-hand sides (pure functions of the state)
# ---------------------------------------------------------------------------


def rhs_full(state) -> np.ndarray:
    """Time derivative of the full 9-component planar affine system."""
    return kernels.rhs_full(0.0, _coerce(state, 9))


def rhs_electrostatic(state) -> np.ndarray:
    """Time derivative of the electrostatic (a, d, A, D) system."""
    return kernels.rhs_electrostatic(0.0, _coerce(state, 4))


def rhs_axisym(state) -> np.ndarray:
    """Time derivative of the axisymmetric (a, A) system."""
    return kernels.rhs_axisym(0.0, _coerce(state, 2))


def rhs_radial(state) -> np.ndarray:
    """Time derivative of the radially symmetric (a, c, A, C, Bz) system."""
    return kernels.rhs_radial(0.0, _coerce(state, 5))


# ---------------------------------------------------------------------------
# Embeddings and projections between the state spaces
# ---------------------------------------------------------------------------


def embed_radial(state) -> np.ndarray:
    """Embed (a, c, A, C, Bz) into the full system.

    The radial velocity a rides the diagonal of Q and the azimuthal part c
    fills the antisymmetric off-diagonal (b = c, c_matrix = -c); likewise for
    the field entries.
    """
    y = _coerce(state, 5)
    a, c, A, C, Bz = y
    return np.array([a, c, -c, a, A, C, -C, A, Bz])


def embed_electrostatic(state) -> np.ndarray:
    """Embed (a, d, A, D) into the full system with b=c=B=C=Bz=0."""
    y = _coerce(state, 4)
    a, d, A, D = y
    return np.array([a, 0.0, 0.0, d, A, 0.0, 0.0, D, 0.0])


def embed_axisym(state) -> np.ndarray:
    """Embed (a, A) into the electrostatic system (d = a, D = A)."""
    y = _coerce(state, 2)
    a, A = y
    return np.array([a, a, A, A])


def project_electrostatic(state) -> np.ndarray:
    """Left inverse of ``embed_electrostatic``: extract (a, d, A, D)."""
    y = _coerce(state, 9)
    return np.array([y[0], y[3], y[4], y[7]])


def project_axisym(state) -> np.ndarray:
    """Left inverse of ``embed_axisym``: extract (a, A)."""
    y = _coerce(state, 4)
    return np.array([y[0], y[2]])


def project_radial(state) -> np.ndarray:
    """Left inverse of ``embed_radial``: extract (a, c, A, C, Bz)."""
    y = _coerce(state, 9)
    return np.array([y[0], y[1], y[4], y[5], y[8]])


def density(state) -> float:
    """Electron density n = 1 - A - D of a full state; must be > 0."""
    y = _coerce(state, 9)
    return 1.0 - y[4] - y[7]


def jacobian_full(state) -> np.ndarray:
    """Analytic 9x9 Jacobian of ``rhs_full``."""
    return kernels.jacobian_full9(_coerce(state, 9))


def equilibrium_spectrum(Bz0: float) -> EquilibriumSpectrum:
    """Eigenvalues of the linearization at Q = R = 0, Bz = Bz0.

    Returns the two purely imaginary pairs (each of double multiplicity in
    the full system) together with the zero eigenvalue.  The inner radicand
    4 + 2*Bz0^2 -+ 2*sqrt(Bz0^4 + 4*Bz0^2) is positive for every real Bz0,
    so the real parts vanish identically.
    """
    B2 = float(Bz0) * float(Bz0)
    s = cmath.sqrt(B2 * B2 + 4.0 * B2).real
    w_hi = 0.5 * np.sqrt(4.0 + 2.0 * B2 + 2.0 * s)
    w_lo = 0.5 * np.sqrt(4.0 + 2.0 * B2 - 2.0 * s)
    eigs = (complex(0.0, w_hi), complex(0.0, -w_hi),
            complex(0.0, w_lo), complex(0.0, -w_lo), complex(0.0, 0.0))
    return EquilibriumSpectrum(Bz0=float(Bz0), eigenvalues=eigs)


# ---------------------------------------------------------------------------
# Variational right-hand sides along an axisymmetric base orbit
# ---------------------------------------------------------------------------


def variational_rhs_electrostatic(base, tangent) -> np.ndarray:
    """Linearized electrostatic flow; tangent order (A1, a1, delta1, sigma1).

    delta1/sigma1 measure the deviation from axial symmetry (D - A, d - a);
    they drive A1 but are never driven by it, so a tangent starting with
    delta1 = sigma1 = 0 stays axisymmetric.
    """
    a0, A0 = _coerce(base, 2)
    v = _coerce(tangent, 4)
    return kernels.var_matrix_electrostatic(a0, A0) @ v


def variational_rhs_radial(base, tangent) -> np.ndarray:
    """Linearized magnetic-deviation flow; tangent order (C1, c1, B1)."""
    a0, A0 = _coerce(base, 2)
    v = _coerce(tangent, 3)
    return kernels.var_matrix_radial(a0, A0) @ v


def variational_rhs_axisym(base, tangent) -> np.ndarray:
    """Linearization of the axisymmetric system itself; tangent order (a1, A1)."""
    a0, A0 = _coerce(base, 2)
    v = _coerce(tangent, 2)
    return kernels.var_matrix_axisym(a0, A0) @ v


# ---------------------------------------------------------------------------
# Registry of the nonlinear systems (used by the integrator front ends / CLI)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemDef:
    """A nonlinear subsystem: dimension, component labels and hot kernel."""

    name: str
    dim: int
    labels: tuple
    rhs: Callable
    # indices of field entries entering the density (1 - sum over them)
    density_indices: tuple
    # indices watched for the A -> 1/2 density-boundary diagnostic
    amplitude_indices: tuple


SYSTEMS = {
    "axisym2": SystemDef(
        "axisym2", 2, ("a", "A"), kernels.rhs_axisym, (1, 1), (1,)),
    "electrostatic4": SystemDef(
        "electrostatic4", 4, ("a", "d", "A", "D"), kernels.rhs_electrostatic,
        (2, 3), (2, 3)),
    "radial5": SystemDef(
        "radial5", 5, ("a", "c", "A", "C", "Bz"), kernels.rhs_radial,
        (2, 2), (2,)),
    "full9": SystemDef(
        "full9", 9, ("a", "b", "c", "d", "A", "B", "C", "D", "Bz"),
        kernels.rhs_full, (4, 7), (4, 7)),
}


def get_system(name: str) -> SystemDef:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {sorted(SYSTEMS)}") from None


def system_density(name: str, y) -> float:
    """Density of a state of the named subsystem."""
    sysdef = get_system(name)
    y = _coerce(y, sysdef.dim)
    i, j = sysdef.density_indices
    return 1.0 - y[i] - y[j]


def embed_axisym_into(name: str, base) -> np.ndarray:
    """Embed an axisymmetric state (a, A) into the named subsystem."""
    y = _coerce(base, 2)
    a, A = y
    if name == "axisym2":
        return y.copy()
    if name == "electrostatic4":
        return np.array([a, a, A, A])
    if name == "radial5":
        return np.array([a, 0.0, A, 0.0, 0.0])
    if name == "full9":
        return np.array([a, 0.0, 0.0, a, A, 0.0, 0.0, A, 0.0])
    raise KeyError(f"unknown system {name!r}")
