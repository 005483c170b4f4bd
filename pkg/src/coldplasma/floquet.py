"""Monodromy matrices, characteristic multipliers and stability scans.

For a base amplitude A* the axisymmetric orbit through (a, A) = (0, A*) is
periodic with period T(A*).  Integrating the variational equations of a
chosen perturbation class over one period with identity initial data yields
the monodromy matrix; its eigenvalues (the characteristic multipliers) decide
Lyapunov stability of the orbit against that class.  Any multiplier off the
unit circle signals instability, measured by S = max|lambda| - 1.
"""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .conserved import InvalidAmplitude, period_event
from .eigen import EigenResult, NonConvergence, eigen_small
from .integrator import IntegratorConfig, Trajectory, integrate
from .systems import embed_axisym_into

__all__ = [
    "MonodromyResult", "ScanRow", "VariationalSystem", "VARIATIONAL_SYSTEMS",
    "fundamental_matrix", "instability_measure", "liouville_residual",
    "asymptotic_multipliers", "scan", "write_scan_csv", "read_scan_csv",
    "EigenResult", "NonConvergence", "eigen_small", "InvalidAmplitude",
]

log = logging.getLogger(__name__)

# imaginary parts below this are numerical noise, not a complex pair
COMPLEX_PAIR_THRESHOLD = 1e-10

CLASS_REAL = "real-pair-dominant"
CLASS_COMPLEX = "complex-pair-dominant"
CLASS_FAILED = "failed"


@dataclass(frozen=True)
class VariationalSystem:
    """A perturbation class: augmented kernel plus base-orbit bookkeeping."""

    name: str
    n: int                  # tangent dimension
    aug_rhs: object         # kernel for base + n*n fundamental-matrix entries
    base_dim: int
    base_A_index: int       # index of the A-like entry in the base block
    trace_coeff: float      # tr M(t) = trace_coeff * a0(t)


def _base_axisym(eps: float) -> np.ndarray:
    return np.array([0.0, eps])


def _base_full9(eps: float) -> np.ndarray:
    return embed_axisym_into("full9", np.array([0.0, eps]))


VARIATIONAL_SYSTEMS = {
    "axisym2": VariationalSystem("axisym2", 2, kernels.rhs_aug_axisym,
                                 2, 1, -4.0),
    "electrostatic4": VariationalSystem("electrostatic4", 4,
                                        kernels.rhs_aug_electrostatic,
                                        2, 1, -6.0),
    "radial3": VariationalSystem("radial3", 3, kernels.rhs_aug_radial,
                                 2, 1, -2.0),
    "full9": VariationalSystem("full9", 9, kernels.rhs_aug_full9,
                               9, 4, -10.0),
}


@dataclass
class MonodromyResult:
    """Fundamental matrix at one period and its spectral diagnostics."""

    system: str
    A_star: float
    T: float
    Psi_T: np.ndarray
    multipliers: np.ndarray
    S: float
    det_residual: float
    eigen_backward_error: float
    trajectory: Trajectory = field(repr=False, default=None)


@dataclass(frozen=True)
class ScanRow:
    """One grid point of a stability scan (multiplier moduli sorted desc.)."""

    A_star: float
    T: float
    lambda_abs: tuple
    S: float
    classification: str


def _get_variational(system: str) -> VariationalSystem:
    try:
        return VARIATIONAL_SYSTEMS[system]
    except KeyError:
        raise KeyError(
            f"unknown variational system {system!r}; "
            f"known: {sorted(VARIATIONAL_SYSTEMS)}") from None


def fundamental_matrix(system: str, A_star: float,
                       cfg: Optional[IntegratorConfig] = None
                       ) -> MonodromyResult:
    """Monodromy matrix of the named perturbation class at base amplitude A*.

    The base orbit and the n tangent columns (identity at t = 0) are
    integrated together over [0, T(A*)], with T located by the return event
    at the same tolerances, so the period error and the fundamental-matrix
    error stay coupled.
    """
    vs = _get_variational(system)
    if not (0.0 < A_star < 0.5):
        raise InvalidAmplitude(f"A_star must lie in (0, 1/2), got {A_star}")
    if cfg is None:
        cfg = IntegratorConfig()
    T = period_event(A_star, cfg)
    if vs.base_dim == 2:
        base0 = _base_axisym(A_star)
    else:
        base0 = _base_full9(A_star)
    y0 = np.concatenate([base0, np.eye(vs.n).ravel()])
    # The base orbit is bounded by construction (may legitimately swing far
    # past any fixed norm) and the tangent flow is linear, so the blow-up
    # guard serves no purpose here; the step budget still applies.
    aug_cfg = IntegratorConfig(
        rtol=cfg.rtol, atol=cfg.atol, h_init=cfg.h_init, h_min=cfg.h_min,
        h_max=cfg.h_max, max_steps=cfg.max_steps, divergence_norm=np.inf)
    traj = integrate(vs.aug_rhs, y0, 0.0, T, aug_cfg)
    Psi_T = traj.final_state[vs.base_dim:].reshape(vs.n, vs.n).copy()
    eig = eigen_small(Psi_T)
    mults = eig.eigenvalues
    return MonodromyResult(
        system=system,
        A_star=A_star,
        T=T,
        Psi_T=Psi_T,
        multipliers=mults,
        S=instability_measure(mults),
        det_residual=abs(float(np.linalg.det(Psi_T)) - 1.0),
        eigen_backward_error=eig.backward_error,
        trajectory=traj,
    )


def instability_measure(multipliers) -> float:
    """S = max |lambda_i| - 1; positive S means Lyapunov instability."""
    return float(np.max(np.abs(np.asarray(multipliers)))) - 1.0


def liouville_residual(result: MonodromyResult,
                       trajectory: Optional[Trajectory] = None) -> float:
    """|det Psi(T) - exp(int tr M dt)| for the phase-volume identity.

    For every variational class here tr M(t) is a multiple of the base
    velocity a0(t), and dA0/dt = (1 - 2 A0) a0 turns its integral into the
    closed form -log(1 - 2 A0)/2 evaluated at the trajectory endpoints, so
    the reference value is exp of (coefficient) * (a quantity that vanishes
    over one exact period).
    """
    vs = _get_variational(result.system)
    traj = trajectory if trajectory is not None else result.trajectory
    if traj is None:
        raise ValueError("no base trajectory available")
    iA = vs.base_A_index
    A_start = traj.states[0, iA]
    A_end = traj.states[-1, iA]
    int_a0 = -0.5 * (np.log1p(-2.0 * A_end) - np.log1p(-2.0 * A_start))
    reference = np.exp(vs.trace_coeff * int_a0)
    det = float(np.linalg.det(result.Psi_T))
    return abs(det - reference)


_SQRT3_PI = np.sqrt(3.0) * np.pi
_SQRT5_PI = np.sqrt(5.0) * np.pi


def asymptotic_multipliers(system: str, epsilon: float) -> np.ndarray:
    """Small-amplitude multiplier values 1 +- const * eps^2.

    electrostatic4: constants sqrt(3)*pi/6 and sqrt(3)*pi/2 (two pairs);
    radial3: constant sqrt(5)*pi/3 plus a unit multiplier.
    """
    e2 = float(epsilon) ** 2
    if system == "electrostatic4":
        return np.array([
            1.0 + _SQRT3_PI / 6.0 * e2, 1.0 - _SQRT3_PI / 6.0 * e2,
            1.0 + _SQRT3_PI / 2.0 * e2, 1.0 - _SQRT3_PI / 2.0 * e2,
        ])
    if system == "radial3":
        return np.array([
            1.0 + _SQRT5_PI / 3.0 * e2, 1.0 - _SQRT5_PI / 3.0 * e2, 1.0,
        ])
    raise ValueError(
        f"asymptotic multipliers known for electrostatic4/radial3 only, "
        f"got {system!r}")


def classify(multipliers) -> str:
    """Dominant-multiplier tag: real pair or complex-conjugate pair."""
    mults = np.asarray(multipliers)
    dom = mults[int(np.argmax(np.abs(mults)))]
    if abs(dom.imag) > COMPLEX_PAIR_THRESHOLD:
        return CLASS_COMPLEX
    return CLASS_REAL


def _scan_one(system: str, A_star: float, cfg: IntegratorConfig) -> ScanRow:
    res = fundamental_matrix(system, A_star, cfg)
    lam = np.sort(np.abs(res.multipliers))[::-1]
    return ScanRow(A_star=A_star, T=res.T, lambda_abs=tuple(lam),
                   S=res.S, classification=classify(res.multipliers))


def scan(system: str, grid: Sequence[float],
         cfg: Optional[IntegratorConfig] = None,
         jobs: Optional[int] = None) -> list:
    """Stability scan over a grid of base amplitudes.

    Rows are computed independently (worker threads; the hot loops release
    the GIL) and assembled in grid order.  A failing grid point yields a
    'failed' row with NaN diagnostics instead of aborting the scan.
    """
    vs = _get_variational(system)
    grid = [float(g) for g in grid]
    if cfg is None:
        cfg = IntegratorConfig()
    if jobs is None:
        jobs = min(32, os.cpu_count() or 1)

    def run(A_star: float) -> ScanRow:
        try:
            return _scan_one(system, A_star, cfg)
        except Exception as exc:  # noqa: BLE001 - reported inline per row
            log.warning("scan point A*=%g failed: %s", A_star, exc)
            return ScanRow(A_star=A_star, T=float("nan"),
                           lambda_abs=(float("nan"),) * vs.n,
                           S=float("nan"), classification=CLASS_FAILED)

    if jobs <= 1 or len(grid) <= 1:
        return [run(a) for a in grid]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, grid))


def write_scan_csv(rows: Sequence[ScanRow], path) -> None:
    """CSV with header A_star, T, lambda_abs_1..n, S, class (17 sig. digits)."""
    if not rows:
        raise ValueError("no scan rows to write")
    n = len(rows[0].lambda_abs)
    header = (["A_star", "T"] + [f"lambda_abs_{i + 1}" for i in range(n)]
              + ["S", "class"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{row.A_star:.17g}", f"{row.T:.17g}"]
                            + [f"{v:.17g}" for v in row.lambda_abs]
                            + [f"{row.S:.17g}", row.classification])


def read_scan_csv(path) -> list:
    """Inverse of :func:`write_scan_csv`."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 4
        for rec in reader:
            rows.append(ScanRow(
                A_star=float(rec[0]), T=float(rec[1]),
                lambda_abs=tuple(float(v) for v in rec[2:2 + n]),
                S=float(rec[2 + n]), classification=rec[3 + n]))
    return rows
