"""Monodromy computations, multiplier diagnostics and stability scans."""
import numpy as np
import pytest

from coldplasma import floquet
from coldplasma.conserved import InvalidAmplitude
from coldplasma.floquet import (
    CLASS_COMPLEX, CLASS_FAILED, CLASS_REAL, asymptotic_multipliers,
    classify, fundamental_matrix, instability_measure, liouville_residual,
    read_scan_csv, scan, write_scan_csv,
)
from coldplasma.integrator import IntegratorConfig, integrate

SQRT3_PI = np.sqrt(3.0) * np.pi
SQRT5_PI = np.sqrt(5.0) * np.pi


@pytest.fixture(scope="module")
def mono_cache():
    cache = {}

    def get(system, A_star, tol=1e-10):
        key = (system, A_star, tol)
        if key not in cache:
            cfg = IntegratorConfig(rtol=tol, atol=tol)
            cache[key] = fundamental_matrix(system, A_star, cfg)
        return cache[key]

    return get


class TestFundamentalMatrix:
    def test_axisym_multipliers_on_unit_circle(self, mono_cache):
        # closed level sets of the first integral: |multiplier| = 1
        for A_star in (0.1, 0.25, 0.4):
            r = mono_cache("axisym2", A_star)
            assert np.abs(np.abs(r.multipliers) - 1.0).max() < 1e-7

    def test_shapes_and_period(self, mono_cache):
        r = mono_cache("electrostatic4", 0.1)
        assert r.Psi_T.shape == (4, 4)
        assert len(r.multipliers) == 4
        assert 0 < r.T < 2 * np.pi
        assert r.S == instability_measure(r.multipliers)

    def test_full9_shapes(self, mono_cache):
        r = mono_cache("full9", 0.34)
        assert r.Psi_T.shape == (9, 9)
        assert r.det_residual < 1e-6

    def test_invalid_amplitude(self):
        with pytest.raises(InvalidAmplitude):
            fundamental_matrix("axisym2", 0.6)
        with pytest.raises(InvalidAmplitude):
            fundamental_matrix("axisym2", 0.0)

    def test_unknown_system(self):
        with pytest.raises(KeyError):
            fundamental_matrix("hexagonal7", 0.1)

    def test_monodromy_linearity(self, mono_cache):
        # integrating a single tangent column reproduces Psi(T) @ v
        r = mono_cache("electrostatic4", 0.1)
        rng = np.random.default_rng(2)
        v = rng.standard_normal(4)
        cols = np.zeros((4, 4))
        cols[:, 0] = v
        y0 = np.concatenate([[0.0, 0.1], cols.ravel()])
        vs = floquet.VARIATIONAL_SYSTEMS["electrostatic4"]
        traj = integrate(vs.aug_rhs, y0, 0.0, r.T, IntegratorConfig())
        got = traj.final_state[2:].reshape(4, 4)[:, 0]
        assert np.abs(got - r.Psi_T @ v).max() < 1e-9


class TestLiouville:
    def test_determinant_residuals(self, mono_cache):
        for system, bound in (("axisym2", 1e-8), ("electrostatic4", 1e-7),
                              ("radial3", 1e-7), ("full9", 1e-6)):
            r = mono_cache(system, 0.1)
            assert r.det_residual < bound
            assert liouville_residual(r) < bound

    def test_multiplier_product(self, mono_cache):
        for system in ("axisym2", "electrostatic4", "radial3", "full9"):
            r = mono_cache(system, 0.1)
            assert abs(np.prod(np.abs(r.multipliers)) - 1.0) < 1e-6

    def test_requires_trajectory(self, mono_cache):
        r = mono_cache("axisym2", 0.1)
        stripped = floquet.MonodromyResult(
            system=r.system, A_star=r.A_star, T=r.T, Psi_T=r.Psi_T,
            multipliers=r.multipliers, S=r.S, det_residual=r.det_residual,
            eigen_backward_error=r.eigen_backward_error)
        with pytest.raises(ValueError):
            liouville_residual(stripped)


class TestFlipInstability:
    """The electrostatic deviation block crosses a period-doubling threshold
    between A* = 0.32 and 0.33; beyond it a real multiplier below -1 appears
    and grows violently toward the density boundary."""

    def test_strong_instability_beyond_threshold(self, mono_cache):
        r = mono_cache("electrostatic4", 0.34)
        dom = r.multipliers[np.argmax(np.abs(r.multipliers))]
        assert dom.real < -1.0 and abs(dom.imag) < 1e-8
        assert r.S > 3.0
        assert classify(r.multipliers) == CLASS_REAL

    def test_neutral_below_threshold(self, mono_cache):
        r = mono_cache("electrostatic4", 0.25)
        assert abs(r.S) < 1e-6

    def test_flip_pair_in_full_system(self, mono_cache):
        # the 9x9 monodromy over the embedded base orbit contains the
        # electrostatic and radial deviation spectra as subsets
        r9 = mono_cache("full9", 0.34)
        r4 = mono_cache("electrostatic4", 0.34)
        for lam in r4.multipliers:
            dist = np.abs(r9.multipliers - lam).min()
            assert dist < 1e-4 * max(1.0, abs(lam))
        r3 = mono_cache("radial3", 0.34)
        for lam in r3.multipliers:
            dist = np.abs(r9.multipliers - lam).min()
            assert dist < 1e-3

    def test_growth_over_many_periods(self, mono_cache):
        # |Psi(kT) v| tracks |lambda_max|^k for the dominant direction
        r = mono_cache("electrostatic4", 0.34)
        lam = np.abs(r.multipliers).max()
        v = np.ones(4)
        for _ in range(60):
            v = r.Psi_T @ v
            v /= np.linalg.norm(v)
        k = 5
        cols = np.zeros((4, 4))
        cols[:, 0] = v
        vs = floquet.VARIATIONAL_SYSTEMS["electrostatic4"]
        y0 = np.concatenate([[0.0, 0.34], cols.ravel()])
        traj = integrate(vs.aug_rhs, y0, 0.0, k * r.T, IntegratorConfig())
        grown = np.linalg.norm(traj.final_state[2:].reshape(4, 4)[:, 0])
        assert grown == pytest.approx(lam ** k, rel=0.1)


class TestAsymptoticMultipliers:
    def test_frozen_values(self):
        es = asymptotic_multipliers("electrostatic4", 0.1)
        assert np.allclose(np.sort(es), np.sort([
            1.0 + 0.009068996821171087, 1.0 - 0.009068996821171087,
            1.0 + 0.02720699046351326, 1.0 - 0.02720699046351326]),
            atol=1e-15)
        rad = asymptotic_multipliers("radial3", 0.1)
        assert np.allclose(np.sort(rad), np.sort([
            1.0 + 0.02341604910346909, 1.0 - 0.02341604910346909, 1.0]),
            atol=1e-15)

    def test_zero_amplitude(self):
        assert np.allclose(asymptotic_multipliers("electrostatic4", 0.0),
                           np.ones(4))
        assert np.allclose(asymptotic_multipliers("radial3", 0.0), np.ones(3))

    def test_constants(self):
        es = asymptotic_multipliers("electrostatic4", 1.0)
        assert es[0] - 1.0 == pytest.approx(SQRT3_PI / 6.0, abs=1e-15)
        assert es[2] - 1.0 == pytest.approx(SQRT3_PI / 2.0, abs=1e-15)
        rad = asymptotic_multipliers("radial3", 1.0)
        assert rad[0] - 1.0 == pytest.approx(SQRT5_PI / 3.0, abs=1e-15)

    def test_unknown_system(self):
        with pytest.raises(ValueError):
            asymptotic_multipliers("axisym2", 0.1)


class TestInstabilityMeasure:
    def test_unit_circle(self):
        assert instability_measure([1.0 + 0j, -1.0 + 0j, 1j, -1j]) == \
            pytest.approx(0.0, abs=1e-15)

    def test_real_pair(self):
        assert instability_measure([1.5, 1.0 / 1.5, 1.0, 1.0]) == \
            pytest.approx(0.5, abs=1e-15)

    def test_classify_threshold(self):
        assert classify([1.5 + 0j, 0.6 + 0j]) == CLASS_REAL
        assert classify([1.2 + 0.3j, 1.2 - 0.3j]) == CLASS_COMPLEX
        assert classify([1.5 + 1e-12j, 0.6 + 0j]) == CLASS_REAL


class TestScan:
    def test_rows_in_grid_order(self):
        grid = [0.34, 0.1, 0.2]
        rows = scan("electrostatic4", grid, jobs=2)
        assert [r.A_star for r in rows] == grid
        for row in rows:
            assert row.lambda_abs == tuple(sorted(row.lambda_abs,
                                                  reverse=True))
            assert row.S == pytest.approx(row.lambda_abs[0] - 1.0, abs=1e-14)

    def test_thread_count_does_not_change_results(self):
        grid = [0.1, 0.34]
        r1 = scan("electrostatic4", grid, jobs=1)
        r2 = scan("electrostatic4", grid, jobs=4)
        for a, b in zip(r1, r2):
            assert a.A_star == b.A_star and a.T == b.T
            assert a.lambda_abs == b.lambda_abs

    def test_failed_row_reported_inline(self):
        rows = scan("axisym2", [0.1, 0.4995], jobs=1)
        assert rows[0].classification != CLASS_FAILED
        assert rows[1].classification == CLASS_FAILED
        assert np.isnan(rows[1].S)

    def test_flip_transition_located(self):
        # period-doubling boundary of the deviation block near A* = 0.3255
        grid = np.arange(0.300, 0.351, 0.005)
        rows = scan("electrostatic4", grid)
        strong = [r.A_star for r in rows if r.S > 0.1]
        assert strong and 0.315 < min(strong) < 0.335
        for r in rows:
            if r.S > 0.1:
                assert r.classification == CLASS_REAL

    def test_csv_round_trip(self, tmp_path):
        rows = scan("radial3", [0.1, 0.34], jobs=1)
        path = tmp_path / "scan.csv"
        write_scan_csv(rows, path)
        back = read_scan_csv(path)
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            assert a.A_star == b.A_star
            assert a.T == b.T
            assert a.lambda_abs == b.lambda_abs
            assert a.classification == b.classification

    def test_empty_scan_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_scan_csv([], tmp_path / "x.csv")
