"""Adaptive RKF45 integration with dense output and event location.

The stepping loop itself lives in :mod:`coldplasma.kernels` so it can run
jitted; this module owns configuration, trajectory bookkeeping, the quartic
dense-output interpolant and root-finding for zero-crossing events.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import backend, kernels

__all__ = [
    "IntegratorConfig", "Trajectory", "EventSpec", "EventHit",
    "IntegrationError", "StepBudgetExhausted", "StepSizeUnderflow",
    "integrate", "integrate_with_events", "integrate_fixed", "rkf45_step",
]

_STATUS_NAMES = {
    kernels.STATUS_COMPLETED: "completed",
    kernels.STATUS_DIVERGED: "diverged",
    kernels.STATUS_STEP_UNDERFLOW: "step_underflow",
    kernels.STATUS_STEP_BUDGET: "step_budget",
}


class IntegrationError(RuntimeError):
    """Base class for integrator failures; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory
        self.t_last = trajectory.times[-1]


class StepBudgetExhausted(IntegrationError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


@dataclass
class IntegratorConfig:
    """Tolerances and guards for the adaptive RKF45 driver.

    ``divergence_norm`` is the blow-up guard: integration stops with a
    "diverged" status once the max-norm of the state exceeds it.
    """

    rtol: float = 1e-10
    atol: float = 1e-10
    h_init: float = 0.0  # 0 -> (t1 - t0) / 1000
    h_min: float = 1e-14
    h_max: float = np.inf
    max_steps: int = 1_000_000
    divergence_norm: float = 1e6

    def validate(self) -> None:
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("rtol and atol must be positive")
        if not (0.0 < self.h_min <= self.h_max):
            raise ValueError("need 0 < h_min <= h_max")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.divergence_norm <= 0.0:
            raise ValueError("divergence_norm must be positive")

    def tightened(self, factor: float) -> "IntegratorConfig":
        return IntegratorConfig(
            rtol=self.rtol * factor, atol=self.atol * factor,
            h_init=self.h_init, h_min=self.h_min, h_max=self.h_max,
            max_steps=self.max_steps, divergence_norm=self.divergence_norm)


@dataclass
class Trajectory:
    """Accepted steps of one integration, with quartic dense output.

    ``status`` is one of completed / diverged / step_underflow / step_budget;
    the last two normally surface as exceptions unless the caller opted out.
    """

    times: np.ndarray
    states: np.ndarray
    status: str
    accepted: int
    rejected: int
    h_final: float
    rhs: Callable = field(repr=False, default=None)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def check(self) -> None:
        if np.any(np.diff(self.times) <= 0.0):
            raise AssertionError("trajectory times are not strictly increasing")

    def at(self, t: float) -> np.ndarray:
        """Dense-output state at time ``t`` inside the integrated span."""
        ts = self.times
        if not (ts[0] <= t <= ts[-1]):
            raise ValueError(f"t={t} outside trajectory span [{ts[0]}, {ts[-1]}]")
        k = int(np.searchsorted(ts, t, side="right")) - 1
        if k >= len(ts) - 1:
            return self.states[-1].copy()
        interp = _QuarticInterp.for_step(self.rhs, ts[k], self.states[k],
                                         ts[k + 1], self.states[k + 1])
        return interp(t)


@dataclass
class EventSpec:
    """Zero crossing of g(t, y); direction is 'rising', 'falling' or 'any'."""

    g: Callable
    direction: str = "any"
    root_tol: float = 1e-12

    def validate(self) -> None:
        if self.direction not in ("rising", "falling", "any"):
            raise ValueError(f"bad event direction {self.direction!r}")
        if self.root_tol <= 0.0:
            raise ValueError("root_tol must be positive")


@dataclass(frozen=True)
class EventHit:
    index: int
    t: float
    y: np.ndarray


# ---------------------------------------------------------------------------
# Single RKF45 step (shared tableau with the jitted driver)
# ---------------------------------------------------------------------------


def rkf45_step(rhs, t, y, h):
    """One RKF45 step: returns (y4, y5), the 4th- and 5th-order solutions."""
    K = kernels
    k1 = np.asarray(rhs(t, y))
    k2 = np.asarray(rhs(t + K.C2 * h, y + h * (K.A21 * k1)))
    k3 = np.asarray(rhs(t + K.C3 * h, y + h * (K.A31 * k1 + K.A32 * k2)))
    k4 = np.asarray(rhs(t + K.C4 * h,
                        y + h * (K.A41 * k1 + K.A42 * k2 + K.A43 * k3)))
    k5 = np.asarray(rhs(t + K.C5 * h,
                        y + h * (K.A51 * k1 + K.A52 * k2 + K.A53 * k3
                                 + K.A54 * k4)))
    k6 = np.asarray(rhs(t + K.C6 * h,
                        y + h * (K.A61 * k1 + K.A62 * k2 + K.A63 * k3
                                 + K.A64 * k4 + K.A65 * k5)))
    y4 = y + h * (K.B41 * k1 + K.B43 * k3 + K.B44 * k4 + K.B45 * k5)
    y5 = y + h * (K.B51 * k1 + K.B53 * k3 + K.B54 * k4 + K.B55 * k5
                  + K.B56 * k6)
    return y4, y5


def integrate_fixed(rhs, y0, t0, t1, n_steps, member=5):
    """Fixed-step RKF45 propagating the 4th- or 5th-order pair member.

    Used for order verification and benchmarking; no error control.
    """
    if member not in (4, 5):
        raise ValueError("member must be 4 or 5")
    y = np.asarray(y0, dtype=float).copy()
    h = (t1 - t0) / n_steps
    t = t0
    for k in range(n_steps):
        y4, y5 = rkf45_step(rhs, t, y, h)
        y = y4 if member == 4 else y5
        t = t0 + (k + 1) * h
    return y


class _QuarticInterp:
    """Quartic Hermite interpolant over one accepted step.

    Matches state and derivative at both endpoints plus a 5th-order-accurate
    midpoint obtained from one RKF45 half step, giving O(h^5) local accuracy
    for event refinement.
    """

    def __init__(self, t0, h, coeffs):
        self.t0 = t0
        self.h = h
        self.coeffs = coeffs  # (5, n)

    @classmethod
    def for_step(cls, rhs, t0, y0, t1, y1):
        h = t1 - t0
        f0 = np.asarray(rhs(t0, y0))
        f1 = np.asarray(rhs(t1, y1))
        _, ymid = rkf45_step(rhs, t0, y0, 0.5 * h)
        r1 = y1 - y0 - h * f0
        r2 = h * (f1 - f0)
        r3 = 16.0 * (ymid - y0 - 0.5 * h * f0)
        c4 = r3 - 8.0 * r1 + 2.0 * r2
        c3 = r2 - 2.0 * r1 - 2.0 * c4
        c2 = r1 - c3 - c4
        coeffs = np.stack([y0, h * f0, c2, c3, c4])
        return cls(t0, h, coeffs)

    def __call__(self, t):
        s = (t - self.t0) / self.h
        c = self.coeffs
        return c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * c[4])))


# ---------------------------------------------------------------------------
# Front ends
# ---------------------------------------------------------------------------


def _prepare(rhs, y0, t0, t1, cfg):
    cfg = cfg if cfg is not None else IntegratorConfig()
    cfg.validate()
    y0 = np.ascontiguousarray(np.asarray(y0, dtype=np.float64))
    if y0.ndim != 1:
        raise ValueError("y0 must be one-dimensional")
    if not np.all(np.isfinite(y0)):
        raise ValueError("y0 contains non-finite entries")
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    drive = (kernels.rkf45_drive_compiled if backend.is_compiled(rhs)
             else kernels.rkf45_drive_python)
    return drive, y0, cfg


def integrate(rhs, y0, t0, t1, cfg: Optional[IntegratorConfig] = None,
              raise_on_limit: bool = True) -> Trajectory:
    """Integrate y' = rhs(t, y) over [t0, t1] with adaptive RKF45.

    Local error is kept below atol + rtol*|y| componentwise.  Exceeding the
    divergence guard ends the run early with status "diverged".  Step-size
    underflow and step-budget exhaustion raise (with the partial trajectory
    attached) unless ``raise_on_limit`` is false, in which case they are
    reported through ``Trajectory.status`` -- the form consumed by the
    blow-up experiments.
    """
    drive, y0, cfg = _prepare(rhs, y0, t0, t1, cfg)
    ts, ys, status, acc, rej, h_last = drive(
        rhs, y0, float(t0), float(t1), cfg.rtol, cfg.atol, float(cfg.h_init),
        cfg.h_min, cfg.h_max, cfg.max_steps, cfg.divergence_norm)
    traj = Trajectory(times=ts, states=ys, status=_STATUS_NAMES[status],
                      accepted=acc, rejected=rej, h_final=h_last, rhs=rhs)
    if raise_on_limit:
        if status == kernels.STATUS_STEP_BUDGET:
            raise StepBudgetExhausted(
                f"step budget {cfg.max_steps} exhausted at t={traj.t_final}",
                traj)
        if status == kernels.STATUS_STEP_UNDERFLOW:
            raise StepSizeUnderflow(
                f"step size underflow below {cfg.h_min} at t={traj.t_final}",
                traj)
    return traj


def _sign(x: float) -> int:
    return int(x > 0.0) - int(x < 0.0)


def _direction_ok(spec: EventSpec, s_before: int, s_after: int) -> bool:
    if spec.direction == "rising":
        return s_before < 0 < s_after or (s_before == 0 and s_after > 0)
    if spec.direction == "falling":
        return s_before > 0 > s_after or (s_before == 0 and s_after < 0)
    return s_before != s_after


def integrate_with_events(rhs, y0, t0, t_max,
                          cfg: Optional[IntegratorConfig] = None,
                          events: Sequence[EventSpec] = ()):
    """Integrate and locate zero crossings of the event functions.

    Sign changes of each g across accepted steps are bracketed and refined
    with Brent's method on the quartic dense output, so each reported root
    satisfies |g(t*, y*)| <= root_tol.  Returns (trajectory, hits) with hits
    ordered by time.
    """
    for ev in events:
        ev.validate()
    traj = integrate(rhs, y0, t0, t_max, cfg)
    hits = []
    ts, ys = traj.times, traj.states
    n_nodes = len(ts)
    for idx, ev in enumerate(events):
        gvals = np.array([ev.g(ts[i], ys[i]) for i in range(n_nodes)],
                         dtype=float)
        s_prev = _sign(gvals[0])
        for i in range(n_nodes - 1):
            s_next = _sign(gvals[i + 1])
            if s_next == 0:
                # exact zero on a node; direction from the following sign,
                # and reset the carried sign so the next pair cannot
                # re-bracket the same root
                s_after = (_sign(gvals[i + 2]) if i + 2 < n_nodes
                           else -s_prev)
                if _direction_ok(ev, s_prev, s_after):
                    hits.append(EventHit(idx, float(ts[i + 1]),
                                         ys[i + 1].copy()))
                s_prev = 0
                continue
            if s_prev != 0 and s_next != s_prev and _direction_ok(ev, s_prev, s_next):
                interp = _QuarticInterp.for_step(rhs, ts[i], ys[i],
                                                 ts[i + 1], ys[i + 1])
                phi = lambda t: ev.g(t, interp(t))
                t_star = brentq(phi, ts[i], ts[i + 1], xtol=1e-14,
                                rtol=8.9e-16, maxiter=200)
                y_star = interp(t_star)
                if abs(ev.g(t_star, y_star)) > ev.root_tol:
                    # fall back to the bracketing node closest to the root
                    raise RuntimeError(
                        f"event {idx} refinement missed tolerance at t={t_star}")
                hits.append(EventHit(idx, float(t_star), y_star))
            s_prev = s_next if s_next != 0 else s_prev
    hits.sort(key=lambda h: h.t)
    return traj, hits
