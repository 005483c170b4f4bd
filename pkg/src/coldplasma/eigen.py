"""Dense eigenvalue solver for the small real matrices of monodromy analysis.

Implements the classical pipeline for a general real matrix of order <= 9:
Parlett-Reinsch balancing, Householder reduction to upper Hessenberg form and
Francis double-shift QR iteration with 2x2 deflation, so complex-conjugate
multiplier pairs come out of real arithmetic.  Accuracy is certified by the
trace/determinant identities carried on every result and by planted-spectrum
tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EigenResult", "NonConvergence", "eigen_small"]

MAX_ORDER = 9
_EPS = np.finfo(float).eps


class NonConvergence(RuntimeError):
    """QR iteration exceeded its sweep budget; never silently ignored."""


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues (descending |.|) plus a trace/determinant backward error."""

    eigenvalues: np.ndarray
    backward_error: float


def _balance(A: np.ndarray) -> None:
    # Parlett-Reinsch: diagonal similarity with powers of 2 equalizing
    # row/column norms; exact in floating point.
    n = A.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            r = sum(abs(A[i, j]) for j in range(n) if j != i)
            c = sum(abs(A[j, i]) for j in range(n) if j != i)
            if r == 0.0 or c == 0.0:
                continue
            f = 1.0
            s = c + r
            while c < r / radix:
                f *= radix
                c *= radix
                r /= radix
            while c >= r * radix:
                f /= radix
                c /= radix
                r *= radix
            if (c + r) < 0.95 * s and f != 1.0:
                converged = False
                A[i, :] *= 1.0 / f
                A[:, i] *= f


def _house(v: np.ndarray):
    # unit Householder vector w with (I - 2 w w^T) v || e1, or None if v ~ 0
    nv = np.sqrt(np.dot(v, v))
    if nv == 0.0:
        return None
    alpha = -nv if v[0] >= 0.0 else nv
    w = v.copy()
    w[0] -= alpha
    nw = np.sqrt(np.dot(w, w))
    if nw == 0.0:
        return None
    return w / nw


def _hessenberg(A: np.ndarray) -> None:
    n = A.shape[0]
    for k in range(n - 2):
        w = _house(A[k + 1:, k].copy())
        if w is None:
            continue
        A[k + 1:, k:] -= 2.0 * np.outer(w, w @ A[k + 1:, k:])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ w, w)
        A[k + 2:, k] = 0.0


def _eig2(a, b, c, d):
    # eigenvalues of [[a, b], [c, d]]
    mean = 0.5 * (a + d)
    disc = 0.25 * (a - d) ** 2 + b * c
    if disc >= 0.0:
        root = np.sqrt(disc)
        return complex(mean + root), complex(mean - root)
    root = np.sqrt(-disc)
    return complex(mean, root), complex(mean, -root)


def _francis_sweep(H, lo, hi, exceptional):
    # One implicit double-shift bulge chase on the active block [lo, hi].
    # Returns False when the bulge vector underflowed to zero entirely, which
    # proves a subdiagonal product fell below the representable range.
    if exceptional:
        # ad-hoc shift to break rare limit cycles (as in classic hqr)
        s = 0.75 * (abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2])) + H[hi, hi]
        trace, det = 2.0 * s, s * s
    else:
        trace = H[hi - 1, hi - 1] + H[hi, hi]
        det = (H[hi - 1, hi - 1] * H[hi, hi]
               - H[hi - 1, hi] * H[hi, hi - 1])
    x = H[lo, lo] * H[lo, lo] + H[lo, lo + 1] * H[lo + 1, lo] \
        - trace * H[lo, lo] + det
    y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - trace)
    z = H[lo + 2, lo + 1] * H[lo + 1, lo]
    if x == 0.0 and y == 0.0 and z == 0.0:
        return False
    for k in range(lo - 1, hi - 2):
        w = _house(np.array([x, y, z]))
        if w is not None:
            r0 = k + 1
            c0 = max(k, lo)
            H[r0:r0 + 3, c0:hi + 1] -= 2.0 * np.outer(
                w, w @ H[r0:r0 + 3, c0:hi + 1])
            r1 = min(k + 4, hi)
            H[lo:r1 + 1, r0:r0 + 3] -= 2.0 * np.outer(
                H[lo:r1 + 1, r0:r0 + 3] @ w, w)
        x = H[k + 2, k + 1]
        y = H[k + 3, k + 1]
        if k < hi - 3:
            z = H[k + 4, k + 1]
    w = _house(np.array([x, y]))
    if w is not None:
        r0 = hi - 1
        H[r0:hi + 1, hi - 2:hi + 1] -= 2.0 * np.outer(
            w, w @ H[r0:hi + 1, hi - 2:hi + 1])
        H[lo:hi + 1, r0:hi + 1] -= 2.0 * np.outer(
            H[lo:hi + 1, r0:hi + 1] @ w, w)
    return True


def _qr_eigenvalues(H: np.ndarray, sweep_budget: int):
    n = H.shape[0]
    eigs = []
    hi = n - 1
    sweeps = 0
    stuck = 0
    exp_accum = 0  # power-of-two factor taken out of H so far
    while hi >= 0:
        if hi == 0:
            eigs.append(_ldexp2(complex(H[0, 0]), exp_accum))
            break
        # deflate negligible subdiagonals from the bottom
        lo = hi
        while lo > 0:
            thresh = _EPS * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo]))
            if thresh == 0.0:
                thresh = _EPS * np.max(np.abs(H[lo - 1:hi + 1,
                                               lo - 1:hi + 1]))
            if abs(H[lo, lo - 1]) <= thresh:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(_ldexp2(complex(H[hi, hi]), exp_accum))
            hi -= 1
            stuck = 0
            continue
        if lo == hi - 1:
            e1, e2 = _eig2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi])
            eigs.extend([_ldexp2(e1, exp_accum), _ldexp2(e2, exp_accum)])
            hi -= 2
            stuck = 0
            continue
        # graded matrices drift the active block out of the range where
        # subdiagonal products stay representable; renormalize the whole
        # matrix by an exact power of two and fold it into the results
        peak = float(np.max(np.abs(H[lo:hi + 1, lo:hi + 1])))
        if peak > 0.0 and not (2.0 ** -64 < peak < 2.0 ** 64):
            shift = int(np.floor(np.log2(peak)))
            H[:, :] = _ldexp2(H, -shift)
            exp_accum += shift
        sweeps += 1
        stuck += 1
        if sweeps > sweep_budget:
            raise NonConvergence(
                f"QR iteration did not deflate within {sweep_budget} sweeps "
                f"(order {n}, active block {hi - lo + 1})")
        if not _francis_sweep(H, lo, hi, exceptional=(stuck % 11 == 10)):
            # coupling through this block fell below the representable
            # range: split it at its weakest subdiagonal
            sub = [abs(H[i + 1, i]) for i in range(lo, hi)]
            H[lo + 1 + int(np.argmin(sub)), lo + int(np.argmin(sub))] = 0.0
    return np.array(eigs, dtype=complex)


def _ldexp2(values, e: int):
    # multiply by 2**e exactly, split in two so 2**|half| stays finite
    h1 = e // 2
    h2 = e - h1
    return values * (2.0 ** h1) * (2.0 ** h2)


def eigen_small(M, sweep_budget: int | None = None) -> EigenResult:
    """All eigenvalues of a real square matrix of order <= 9.

    The sweep budget defaults to 100*n Francis iterations; exhausting it
    raises :class:`NonConvergence`.
    """
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0 or n > MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}], got {n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")

    tr = float(np.trace(A))
    det = float(np.linalg.det(A))

    if sweep_budget is None:
        sweep_budget = 100 * n

    peak = float(np.max(np.abs(A)))
    if peak == 0.0:
        return EigenResult(eigenvalues=np.zeros(n, dtype=complex),
                           backward_error=0.0)
    # exact power-of-two normalization: keeps deflation thresholds and bulge
    # products out of the subnormal range for extreme inputs
    exp2 = int(np.floor(np.log2(peak)))
    work = _ldexp2(A, -exp2)
    _balance(work)
    _hessenberg(work)
    eigs = _ldexp2(_qr_eigenvalues(work, sweep_budget), exp2)

    order = np.lexsort((-eigs.imag, -np.abs(eigs)))
    eigs = eigs[order]

    be_trace = abs(np.sum(eigs) - tr) / (1.0 + abs(tr))
    be_det = abs(np.prod(eigs) - det) / (1.0 + abs(det))
    return EigenResult(eigenvalues=eigs,
                       backward_error=float(max(be_trace, be_det)))
