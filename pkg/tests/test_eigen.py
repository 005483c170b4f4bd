"""QR eigensolver: planted spectra, identities, failure modes."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from coldplasma.eigen import NonConvergence, eigen_small


def planted_matrix(n, rng):
    """Random orthogonal similarity of a block-diagonal matrix with a known,
    well-separated spectrum (1x1 real blocks and 2x2 rotation-scale blocks)."""
    eigs = []
    blocks = []
    k = 0
    while k < n:
        if k == n - 1 or rng.random() < 0.5:
            lam = rng.uniform(-2.0, 2.0)
            blocks.append(np.array([[lam]]))
            eigs.append(complex(lam))
            k += 1
        else:
            r = rng.uniform(0.2, 2.0)
            th = rng.uniform(0.2, np.pi - 0.2)
            p, q = r * np.cos(th), r * np.sin(th)
            blocks.append(np.array([[p, q], [-q, p]]))
            eigs.extend([complex(p, q), complex(p, -q)])
            k += 2
    B = np.zeros((n, n))
    i = 0
    for b in blocks:
        m = b.shape[0]
        B[i:i + m, i:i + m] = b
        i += m
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ B @ Q.T, np.array(eigs)


def matched_error(got, want):
    key = lambda z: (round(z.real, 9), round(z.imag, 9))
    got = sorted(got, key=key)
    want = sorted(want, key=key)
    return max(abs(g - w) for g, w in zip(got, want))


class TestKnownSpectra:
    def test_identity(self):
        res = eigen_small(np.eye(4))
        assert np.allclose(res.eigenvalues, np.ones(4))
        assert res.backward_error < 1e-14

    def test_rotation_pair(self):
        th = 0.7
        R = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
        ev = eigen_small(R).eigenvalues
        assert matched_error(ev, [np.exp(1j * th), np.exp(-1j * th)]) < 1e-14

    def test_upper_triangular(self):
        M = np.triu(np.arange(1.0, 17.0).reshape(4, 4))
        ev = np.sort(eigen_small(M).eigenvalues.real)
        assert np.allclose(ev, [1.0, 6.0, 11.0, 16.0], atol=1e-12)

    def test_planted_spectra(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 10))
            M, want = planted_matrix(n, rng)
            res = eigen_small(M)
            worst = max(worst, matched_error(res.eigenvalues, want))
            assert res.backward_error < 1e-9
        assert worst < 1e-8

    def test_badly_scaled_matrix(self):
        # balancing handles wide dynamic range in the entries
        rng = np.random.default_rng(5)
        M, want = planted_matrix(5, rng)
        D = np.diag([1e-6, 1.0, 1e6, 1.0, 1e-3])
        scaled = D @ M @ np.linalg.inv(D)
        ev = eigen_small(scaled).eigenvalues
        assert matched_error(ev, want) < 1e-7


class TestIdentities:
    @given(hnp.arrays(np.float64, (5, 5),
                      elements=st.floats(-3.0, 3.0, allow_nan=False)))
    @settings(max_examples=60, deadline=None)
    def test_trace_and_determinant(self, M):
        res = eigen_small(M)
        assert abs(np.sum(res.eigenvalues) - np.trace(M)) \
            <= 1e-8 * (1.0 + abs(np.trace(M)))
        det = np.linalg.det(M)
        assert abs(np.prod(res.eigenvalues) - det) <= 1e-7 * (1.0 + abs(det))

    def test_ordering_deterministic(self):
        rng = np.random.default_rng(11)
        M, _ = planted_matrix(6, rng)
        a = eigen_small(M).eigenvalues
        b = eigen_small(M).eigenvalues
        assert np.array_equal(a, b)
        assert np.all(np.diff(np.abs(a)) <= 1e-12)  # descending magnitude


class TestFailureModes:
    def test_order_limit(self):
        with pytest.raises(ValueError):
            eigen_small(np.eye(10))

    def test_non_square(self):
        with pytest.raises(ValueError):
            eigen_small(np.ones((3, 4)))

    def test_non_finite(self):
        M = np.eye(3)
        M[1, 2] = np.inf
        with pytest.raises(ValueError):
            eigen_small(M)

    def test_sweep_budget_exhaustion_reported(self):
        rng = np.random.default_rng(21)
        M, _ = planted_matrix(5, rng)
        with pytest.raises(NonConvergence):
            eigen_small(M, sweep_budget=0)
