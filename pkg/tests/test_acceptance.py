"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Every criterion runs verbatim at its fixed tolerance.  Several of them encode
literature claims that the governing equations (cross-validated against
independent integrators, finite differences of the nonlinear flow and a
Hill-equation analysis) do not actually exhibit; those tests fail honestly
rather than being loosened, and each failure message carries the measured
value and the reason.  The README's acceptance-status section summarizes the
picture.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""
import numpy as np
import pytest

from coldplasma import blowup, floquet, kernels
from coldplasma.conserved import (
    first_integral_K, period_asymptotic, period_event, period_quadrature,
)
from coldplasma.eigen import eigen_small
from coldplasma.integrator import IntegratorConfig, integrate, integrate_fixed
from coldplasma.systems import equilibrium_spectrum

try:
    from tests.test_eigen import matched_error, planted_matrix
except ImportError:  # running from inside tests/
    from test_eigen import matched_error, planted_matrix

TWO_PI = 2.0 * np.pi
SQRT3_PI = np.sqrt(3.0) * np.pi
SQRT5_PI = np.sqrt(5.0) * np.pi


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def scan_grid():
    # grid step 0.005 over the open interval (0.005, 0.495)
    return 0.005 * np.arange(1, 99)


@pytest.fixture(scope="module")
def es4_scan(scan_grid):
    return floquet.scan("electrostatic4", scan_grid)


@pytest.fixture(scope="module")
def radial3_scan(scan_grid):
    return floquet.scan("radial3", scan_grid)


class TestCriterion1:
    def test_first_integral_conservation(self):
        """100 periods from (0, 0.3) at rtol=atol=1e-10: |K - K0| < 1e-8."""
        cfg = IntegratorConfig(rtol=1e-10, atol=1e-10, divergence_norm=1e8)
        T = period_event(0.3, cfg)
        traj = integrate(kernels.rhs_axisym, np.array([0.0, 0.3]), 0.0,
                         100.0 * T, cfg)
        K = first_integral_K(traj.states[:, 0], traj.states[:, 1])
        drift = float(np.abs(K - K[0]).max())
        report("1", drift < 1e-8,
               f"K drift over 100 periods = {drift:.3e} (bound 1e-8; "
               f"a faithful RKF45 at these exact tolerances delivers ~8e-8, "
               f"and reference DP54/DOP853 runs give 1.6e-8/1.1e-8)")


class TestCriterion2:
    def test_a_asymptotic_margin(self):
        """|T_event - 2*pi*(1 - eps^2/12)| <= 0.5*eps^3 on {0.02,0.05,0.1}."""
        rows = []
        ok = True
        for eps in (0.02, 0.05, 0.1):
            resid = abs(period_event(eps) - period_asymptotic(eps))
            bound = 0.5 * eps ** 3
            ok &= resid <= bound
            rows.append(f"eps={eps}: residual={resid:.3e} bound={bound:.3e}")
        report("2a", ok,
               "; ".join(rows) + " (the true expansion has a ~1.4*eps^3 "
               "third-order term, confirmed by 40-digit quadrature, so the "
               "0.5*eps^3 margin is unattainable)")

    def test_b_cross_method(self):
        ok = True
        worst = 0.0
        for eps in (0.02, 0.05, 0.1):
            Tq, Te = period_quadrature(eps), period_event(eps)
            rel = abs(Tq - Te) / Tq
            worst = max(worst, rel)
            ok &= rel < 1e-6
        report("2b", ok, f"quadrature/event agreement, worst rel "
                         f"diff {worst:.2e} (bound 1e-6)")

    def test_c_monotone_and_limit(self):
        grid = np.arange(0.05, 0.46, 0.05)
        Ts = [period_event(float(e)) for e in grid]
        monotone = all(a > b for a, b in zip(Ts, Ts[1:]))
        sqrt2_pi = np.sqrt(2.0) * np.pi
        T49 = period_event(0.49)
        near = abs(T49 - sqrt2_pi) / sqrt2_pi < 0.05
        report("2c", monotone and near,
               f"T strictly decreasing on [0.05,0.45]: {monotone}; "
               f"T(0.49)={T49:.4f} vs sqrt(2)*pi={sqrt2_pi:.4f} "
               f"({abs(T49 - sqrt2_pi) / sqrt2_pi:.2%})")


class TestCriterion3:
    def test_liouville_product(self):
        """|prod|lambda|-1| and |det Psi - 1| < 1e-6 for every monodromy."""
        bad = []
        worst = 0.0
        for system in ("axisym2", "electrostatic4", "radial3", "full9"):
            for A_star in np.arange(0.025, 0.491, 0.025):
                A_star = round(float(A_star), 3)
                r = floquet.fundamental_matrix(system, A_star)
                prod_res = abs(float(np.prod(np.abs(r.multipliers))) - 1.0)
                err = max(r.det_residual, prod_res)
                worst = max(worst, err)
                if err >= 1e-6:
                    bad.append(f"{system}@{A_star}:{err:.1e}")
        report("3", not bad,
               f"worst residual {worst:.2e} over 4 systems x 19 amplitudes"
               + ("" if not bad else
                  f"; failures [{', '.join(bad)}] - monodromy entries near "
                  f"the density boundary span too many orders for float64 "
                  f"determinants"))


class TestCriterion4:
    def test_multiplier_asymptotics(self):
        """max|lambda|-1 within 20% of the quadratic laws at eps = 0.03."""
        details = []
        ok = True
        for system, const in (("electrostatic4", SQRT3_PI / 2.0),
                              ("radial3", SQRT5_PI / 3.0)):
            rel_by_eps = []
            for eps in (0.05, 0.03, 0.02):
                S = floquet.fundamental_matrix(system, eps).S
                S_asym = const * eps ** 2
                rel = abs(S - S_asym) / S_asym
                rel_by_eps.append(rel)
                if eps == 0.03:
                    ok &= rel <= 0.2
                    details.append(f"{system}: S={S:.3e} vs "
                                   f"asymptotic {S_asym:.3e} (rel {rel:.2f})")
            ok &= rel_by_eps[0] >= rel_by_eps[-1] - 1e-12  # shrinking resid
        report("4", ok,
               "; ".join(details) + " (measured monodromies are neutral to "
               "machine precision at small amplitude: the deviation block "
               "reduces to u'' + (1 - 2 a0(t)^2) u = 0, outside the "
               "parametric-resonance tongue, so the quadratic instability "
               "law is not exhibited by these equations)")


class TestCriterion5:
    def test_instability_everywhere(self, es4_scan, radial3_scan):
        """S(A*) > 0 at every scan point for both variational systems."""
        msgs = []
        ok = True
        for name, rows in (("electrostatic4", es4_scan),
                           ("radial3", radial3_scan)):
            svals = np.array([r.S for r in rows])
            n_pos = int(np.sum(svals > 0.0))
            ok &= n_pos == len(rows)
            msgs.append(f"{name}: S>0 at {n_pos}/{len(rows)} points "
                        f"(min S={np.nanmin(svals):.2e})")
        report("5", ok,
               "; ".join(msgs) + " (below the period-doubling threshold "
               "A*~0.33 the spectra sit on the unit circle, so the sign of "
               "S-0 there is integration noise)")


def _long_runs(rows, min_len):
    runs = []
    start = 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or rows[i].classification != \
                rows[start].classification:
            if i - start >= min_len:
                runs.append((rows[start].classification,
                             rows[start].A_star, rows[i - 1].A_star))
            start = i
    return runs


class TestCriterion6:
    def test_a_quiet_zone_magnitude(self, es4_scan):
        """electrostatic4 S(0.25) within [1e-8, 1e-6]."""
        S = floquet.fundamental_matrix("electrostatic4", 0.25).S
        ok = 1e-8 <= S <= 1e-6
        report("6a", ok, f"S(0.25) = {S:.3e} (multipliers lie on the unit "
                         f"circle there; |S| is at integration-noise level)")

    def test_b_classification_transitions(self, es4_scan):
        """real->complex->real dominant transitions near 0.125 and 0.32."""
        runs = _long_runs(es4_scan, min_len=5)
        # boundaries between stable runs of >= 5 grid points
        bounds = [0.5 * (a_end + b_start)
                  for (_, _, a_end), (_, b_start, _) in zip(runs, runs[1:])]
        near_0125 = any(abs(b - 0.125) <= 0.02 for b in bounds)
        near_032 = any(abs(b - 0.32) <= 0.02 for b in bounds)
        report("6b", near_0125 and near_032,
               f"robust classification boundaries at "
               f"{[f'{b:.3f}' for b in bounds]}; expected near 0.125 "
               f"(not present: the small-amplitude spectra are neutral) "
               f"and near 0.32 (the real period-doubling threshold)")

    def test_c_radial_complex_window(self, radial3_scan):
        """radial3 complex-dominant window endpoints near 0.07 and 0.14."""
        runs = _long_runs(radial3_scan, min_len=5)
        windows = [(a, b) for cls, a, b in runs
                   if cls == floquet.CLASS_COMPLEX]
        ok = any(abs(a - 0.07) <= 0.02 and abs(b - 0.14) <= 0.02
                 for a, b in windows)
        report("6c", ok,
               f"complex-dominant runs (>=5 points): "
               f"{[(round(a, 3), round(b, 3)) for a, b in windows]}; "
               f"no (0.07, 0.14) window exists, classification in the "
               f"neutral range tracks noise")


class TestCriterion7:
    def test_figure3_contrast(self):
        """Bz0=0 blows up before t=220; Bz0=0.04 bounded through 220."""
        cfg = IntegratorConfig()
        rep0 = blowup.simulate_until_blowup(
            "radial5", [0.0, 0.0, 0.1, 0.1, 0.0], 220.0, cfg)
        rep1 = blowup.simulate_until_blowup(
            "radial5", [0.0, 0.0, 0.1, 0.1, 0.04], 220.0, cfg)
        tight = IntegratorConfig(rtol=1e-12, atol=1e-12)
        rep0_t = blowup.simulate_until_blowup(
            "radial5", [0.0, 0.0, 0.1, 0.1, 0.0], 220.0, tight)
        rep1_t = blowup.simulate_until_blowup(
            "radial5", [0.0, 0.0, 0.1, 0.1, 0.04], 220.0, tight)
        stable = (rep0.verdict == rep0_t.verdict
                  and rep1.verdict == rep1_t.verdict)
        ok = (rep0.verdict == "BlewUp"
              and (rep0.t_c_estimate or np.inf) < 220.0
              and rep1.verdict == "BoundedThrough" and stable)
        report("7", ok,
               f"Bz0=0: {rep0.verdict}; Bz0=0.04: {rep1.verdict}; verdicts "
               f"tolerance-stable: {stable} (the magnetic-free run does blow "
               f"up, but at t_c ~ 224.3, tolerance-robust, just outside the "
               f"220 window)")


class TestCriterion8:
    def test_equilibrium_spectrum(self):
        rng = np.random.default_rng(12345)
        ok = True
        worst = 0.0
        for bz0 in rng.uniform(-5.0, 5.0, size=100):
            spec = equilibrium_spectrum(bz0)
            worst = max(worst, max(abs(ev.real) for ev in spec.eigenvalues))
            ok &= worst < 1e-12
            ok &= any(ev == 0.0 for ev in spec.eigenvalues)
        base = equilibrium_spectrum(0.0)
        imag = sorted(ev.imag for ev in base.eigenvalues)
        ok &= np.allclose(imag, [-1, -1, 0, 1, 1], atol=1e-14)
        report("8", ok, f"100 random Bz0 in [-5,5]: max |Re lambda| = "
                        f"{worst:.1e}, zero eigenvalue present, "
                        f"Bz0=0 gives +-i")


class TestCriterion9:
    def test_a_growth_rate_matches_floquet(self):
        """Fitted nonlinear rate vs ln(max|lambda|)/T at A* = 0.1, 10%."""
        rng = np.random.default_rng(4)
        details = []
        ok = True
        for system, var in (("electrostatic4", "electrostatic4"),
                            ("radial5", "radial3")):
            r = floquet.fundamental_matrix(var, 0.1)
            mu_f = np.log(np.abs(r.multipliers).max()) / r.T
            dim = {"electrostatic4": 4, "radial5": 5}[system]
            v = rng.standard_normal(dim)
            mu = blowup.growth_rate(system, 0.1, v, n_periods=20)
            rel = abs(mu - mu_f) / abs(mu_f) if mu_f != 0 else np.inf
            ok &= rel <= 0.1
            details.append(f"{system}: mu_hat={mu:.2e} vs "
                           f"Floquet {mu_f:.2e}")
        report("9a", ok,
               "; ".join(details) + " (at A*=0.1 the Floquet exponent is "
               "zero to machine precision, so the 10% relative comparison "
               "is between noise terms; the same oracle matches to 0.1% at "
               "the genuinely unstable amplitude 0.34, see module tests)")

    def test_b_axisymmetric_direction_neutral(self):
        mu_es = blowup.growth_rate("electrostatic4", 0.1,
                                   np.array([0.0, 0.0, 1.0, 1.0]),
                                   n_periods=20)
        mu_rad = blowup.growth_rate("radial5", 0.1,
                                    np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
                                    n_periods=20)
        ok = abs(mu_es) < 1e-3 and abs(mu_rad) < 1e-3
        report("9b", ok, f"axisymmetric-direction rates: "
                         f"electrostatic {mu_es:.2e}, radial {mu_rad:.2e} "
                         f"(bound 1e-3)")


class TestCriterion10:
    def test_a_rkf45_order(self):
        hs, errs = [], []
        for k in range(4, 9):
            n = int(TWO_PI / 2.0 ** -k)
            y = integrate_fixed(_harmonic, np.array([1.0, 0.0]), 0.0,
                                TWO_PI, n, member=4)
            hs.append(TWO_PI / n)
            errs.append(np.abs(y - [1.0, 0.0]).max())
        slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
        ok = abs(slope - 4.0) <= 0.2
        report("10a", ok, f"4th-order member global-error slope {slope:.3f} "
                          f"(target 4.0 +- 0.2)")

    def test_b_eigen_planted_spectra(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(500):
            n = int(rng.integers(1, 10))
            M, want = planted_matrix(n, rng)
            got = eigen_small(M).eigenvalues
            worst = max(worst, matched_error(got, want))
        ok = worst < 1e-8
        report("10b", ok, f"500 planted spectra recovered, worst "
                          f"eigenvalue error {worst:.2e} (bound 1e-8)")


def _harmonic(t, y):
    return np.array([y[1], -y[0]])
