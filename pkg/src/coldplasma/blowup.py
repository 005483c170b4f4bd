"""Nonlinear perturbation experiments: finite-time blow-up and growth rates.

Blow-up of the affine systems shows up numerically as unbounded state growth
with collapsing step size; runs are classified by which guard fired.  The
density-boundary diagnostic (the A-like components crossing 1/2) is recorded
alongside, and growth rates of small perturbations are fitted per period for
comparison against Floquet exponents.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .conserved import period_event
from .integrator import IntegratorConfig, Trajectory, integrate
from .systems import SystemDef, embed_axisym_into, get_system

__all__ = [
    "BlowupReport", "FitFailure", "simulate_until_blowup", "growth_rate",
    "magnetic_threshold_probe", "write_report_json", "read_report_json",
    "write_series_csv", "read_series_csv",
]

VERDICT_BLEWUP = "BlewUp"
VERDICT_BOUNDED = "BoundedThrough"
VERDICT_INCONCLUSIVE = "Inconclusive"

REASON_NORM = "NormThreshold"
REASON_UNDERFLOW = "StepUnderflow"
REASON_COMPLETED = "Completed"
REASON_BUDGET = "StepBudget"

_STATUS_TO_REASON = {
    "completed": REASON_COMPLETED,
    "diverged": REASON_NORM,
    "step_underflow": REASON_UNDERFLOW,
    "step_budget": REASON_BUDGET,
}


class FitFailure(RuntimeError):
    """Growth-rate fit aborted: the deviation saturated too early."""

    def __init__(self, message: str, saturation_time: float):
        super().__init__(message)
        self.saturation_time = saturation_time


@dataclass
class BlowupReport:
    """Outcome of one nonlinear run against the divergence guards."""

    system: str
    initial_state: np.ndarray
    t_max: float
    verdict: str
    t_c_estimate: Optional[float]
    reason: str
    max_norm_observed: float
    max_A_observed: float
    trajectory: Trajectory = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "initial_state": [float(v) for v in self.initial_state],
            "t_max": float(self.t_max),
            "verdict": self.verdict,
            "t_c_estimate": (None if self.t_c_estimate is None
                             else float(self.t_c_estimate)),
            "reason": self.reason,
            "max_norm_observed": float(self.max_norm_observed),
            "max_A_observed": float(self.max_A_observed),
        }


def _observe(sysdef: SystemDef, traj: Trajectory):
    max_norm = float(np.abs(traj.states).max())
    max_A = float(max(traj.states[:, i].max()
                      for i in sysdef.amplitude_indices))
    return max_norm, max_A


def simulate_until_blowup(system, y0, t_max: float,
                          cfg: Optional[IntegratorConfig] = None
                          ) -> BlowupReport:
    """Integrate the nonlinear system and classify the outcome.

    BlewUp when the norm guard or step-size underflow fires before t_max,
    BoundedThrough when t_max is reached, Inconclusive when the step budget
    runs out first.  On blow-up the critical-time estimate is refined by
    re-running the final stretch at 100x tighter tolerance from the last
    moderate-norm state.
    """
    sysdef = system if isinstance(system, SystemDef) else get_system(system)
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (sysdef.dim,):
        raise ValueError(
            f"initial state of dimension {sysdef.dim} required for "
            f"{sysdef.name}, got shape {y0.shape}")
    if not t_max > 0.0:
        raise ValueError("t_max must be positive")
    if cfg is None:
        cfg = IntegratorConfig()

    traj = integrate(sysdef.rhs, y0, 0.0, t_max, cfg, raise_on_limit=False)
    reason = _STATUS_TO_REASON[traj.status]
    max_norm, max_A = _observe(sysdef, traj)

    if reason == REASON_COMPLETED:
        return BlowupReport(sysdef.name, y0, t_max, VERDICT_BOUNDED, None,
                            reason, max_norm, max_A, traj)
    if reason == REASON_BUDGET:
        return BlowupReport(sysdef.name, y0, t_max, VERDICT_INCONCLUSIVE,
                            float(traj.t_final), reason, max_norm, max_A,
                            traj)

    # blow-up: refine the critical time from the last moderate-norm state
    t_c = float(traj.t_final)
    norms = np.abs(traj.states).max(axis=1)
    safe = np.nonzero(norms <= 0.01 * cfg.divergence_norm)[0]
    if len(safe) > 0 and safe[-1] + 1 < len(traj.times):
        k = int(safe[-1])
        fine = cfg.tightened(0.01)
        retraj = integrate(sysdef.rhs, traj.states[k], traj.times[k], t_max,
                           fine, raise_on_limit=False)
        if retraj.status in ("diverged", "step_underflow"):
            t_c = float(retraj.t_final)
            reason = _STATUS_TO_REASON[retraj.status]
            m2, a2 = _observe(sysdef, retraj)
            max_norm = max(max_norm, m2)
            max_A = max(max_A, a2)
    return BlowupReport(sysdef.name, y0, t_max, VERDICT_BLEWUP, t_c, reason,
                        max_norm, max_A, traj)


def growth_rate(system, A_star: float, perturbation, n_periods: int = 20,
                cfg: Optional[IntegratorConfig] = None, scale: float = 1e-6,
                burn_in: int = 2, saturation: float = 1e-2) -> float:
    """Fitted exponential rate of a small deviation from the periodic orbit.

    The nonlinear system is integrated from the embedded axisymmetric state
    and from the same state plus ``scale`` times the normalized perturbation;
    the deviation norm is sampled once per base period and log-fitted against
    time.  Raises :class:`FitFailure` when fewer than five samples stay below
    the saturation threshold.
    """
    sysdef = system if isinstance(system, SystemDef) else get_system(system)
    if not (0.0 < A_star < 0.5):
        raise ValueError(f"A_star must lie in (0, 1/2), got {A_star}")
    v = np.asarray(perturbation, dtype=float)
    if v.shape != (sysdef.dim,):
        raise ValueError(f"perturbation must have dimension {sysdef.dim}")
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise ValueError("perturbation must be nonzero")
    if cfg is None:
        cfg = IntegratorConfig()

    T = period_event(A_star, cfg)
    y_base = embed_axisym_into(sysdef.name, np.array([0.0, A_star]))
    y_pert = y_base + (scale / nv) * v

    times = []
    devs = []
    for m in range(1, n_periods + 1):
        y_base = integrate(sysdef.rhs, y_base, (m - 1) * T, m * T,
                           cfg).final_state
        y_pert = integrate(sysdef.rhs, y_pert, (m - 1) * T, m * T,
                           cfg).final_state
        dev = float(np.linalg.norm(y_pert - y_base))
        if dev >= saturation:
            if len(devs) < 5:
                raise FitFailure(
                    f"deviation saturated after {m} periods "
                    f"(t={m * T:.3f}) with only {len(devs)} usable samples",
                    saturation_time=m * T)
            break
        times.append(m * T)
        devs.append(dev)
    if len(devs) < max(5, burn_in + 2):
        raise FitFailure("not enough pre-saturation samples for a fit",
                         saturation_time=times[-1] if times else 0.0)
    t_arr = np.array(times[burn_in:])
    log_dev = np.log(np.array(devs[burn_in:]))
    slope, _ = np.polyfit(t_arr, log_dev, 1)
    return float(slope)


def magnetic_threshold_probe(base_state4, bz0_grid: Sequence[float],
                             t_max: float,
                             cfg: Optional[IntegratorConfig] = None) -> list:
    """Blow-up verdicts of the radial system across initial magnetic fields.

    ``base_state4`` holds (a, c, A, C); each grid value of Bz0 completes the
    5-component initial state.  Returns [(Bz0, BlowupReport)] in grid order;
    no monotonicity in Bz0 is asserted, the table records observations.
    """
    base = np.asarray(base_state4, dtype=float)
    if base.shape != (4,):
        raise ValueError("base_state4 must hold (a, c, A, C)")
    out = []
    for bz0 in bz0_grid:
        y0 = np.concatenate([base, [float(bz0)]])
        out.append((float(bz0),
                    simulate_until_blowup("radial5", y0, t_max, cfg)))
    return out


# ---------------------------------------------------------------------------
# Serialization consumed by the CLI
# ---------------------------------------------------------------------------


def write_report_json(report: BlowupReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_series_csv(traj: Trajectory, labels: Sequence[str], path) -> None:
    """Time series (t, components..., norm) with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + list(labels) + ["norm"])
        for t, row in zip(traj.times, traj.states):
            writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row]
                            + [f"{np.abs(row).max():.17g}"])


def read_series_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in rec] for rec in reader]
    data = np.array(rows)
    return header, data[:, 0], data[:, 1:-1]
