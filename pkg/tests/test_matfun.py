import numpy as np
import pytest

from oqrisk.errors import (
    DimensionTooLarge,
    MissingTailBound,
    NotHurwitz,
    NotPsd,
)
from oqrisk.matfun import (
    QuadratureSpec,
    TailHint,
    expm,
    expm_multi,
    integrate_cube,
    integrate_line,
    integrate_realline,
    lyap_solve,
    opnorm2,
    sqrt_psd,
)

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


class TestExpm:
    def test_zero_time_is_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(expm(a, 0.0), np.eye(2))

    def test_diagonal(self):
        out = expm(-np.eye(2), 1.0)
        assert np.allclose(out, np.exp(-1.0) * np.eye(2), atol=1e-14)

    def test_rotation_quarter_turn(self):
        # e^{tau J2} = [[cos, sin], [-sin, cos]]
        out = expm(J2, np.pi / 2)
        assert np.abs(out - np.array([[0.0, 1.0], [-1.0, 0.0]])).max() < 1e-12

    def test_semigroup_on_random_stable(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = rng.standard_normal((4, 4)) - 3.0 * np.eye(4)
            s, t = rng.uniform(0.1, 2.0, 2)
            lhs = expm(a, s + t)
            rhs = expm(a, s) @ expm(a, t)
            assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()

    def test_overflow_guard(self):
        from oqrisk.errors import Overflow

        with pytest.raises(Overflow):
            expm(np.diag([1000.0, -1.0]), 1.0)

    def test_expm_multi_matches_pointwise(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((3, 3)) - 2.0 * np.eye(3)
        ts = np.array([0.0, 0.3, 1.7])
        batch = expm_multi(a, ts)
        for k, t in enumerate(ts):
            assert np.abs(batch[k] - expm(a, t)).max() < 1e-11


class TestLyap:
    def test_closed_form_diagonal(self):
        x = lyap_solve(-np.eye(2), 2.0 * np.eye(2))
        assert np.allclose(x, np.eye(2), atol=1e-13)

    def test_tiny_gramian(self):
        x = lyap_solve(-np.eye(2), J2 @ J2.T)
        assert np.allclose(x, 0.5 * np.eye(2), atol=1e-13)

    def test_residual_on_random_hurwitz(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            n = int(rng.integers(2, 9))
            a = rng.standard_normal((n, n))
            a -= (np.linalg.eigvals(a).real.max() + rng.uniform(0.2, 2.0)) * np.eye(n)
            q = rng.standard_normal((n, n))
            q = q @ q.T
            x = lyap_solve(a, q)
            res = np.linalg.norm(a @ x + x @ a.T + q)
            scale = np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(q)
            assert res <= 1e-10 * scale

    def test_symmetry_inherited(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((3, 3)) - 2.0 * np.eye(3)
        q = rng.standard_normal((3, 3))
        qs = q + q.T
        x = lyap_solve(a, qs)
        assert np.abs(x - x.T).max() < 1e-12 * np.abs(x).max()

    def test_rejects_non_hurwitz(self):
        with pytest.raises(NotHurwitz):
            lyap_solve(np.zeros((2, 2)), np.eye(2))
        with pytest.raises(NotHurwitz):
            lyap_solve(np.diag([-1.0, 1e-12]), np.eye(2))


class TestOpnorm:
    def test_rotation_norm_one(self):
        assert opnorm2(J2) == pytest.approx(1.0, abs=1e-12)

    def test_projector(self):
        k = 0.5 * (np.eye(2) + 1j * J2)  # Hermitian with eigenvalues {0, 1}
        assert opnorm2(k) == pytest.approx(1.0, abs=1e-12)

    def test_zero(self):
        assert opnorm2(np.zeros((3, 3))) == 0.0


class TestSqrtPsd:
    def test_identity(self):
        assert np.array_equal(sqrt_psd(np.eye(3)), np.eye(3))

    def test_scaled_identity(self):
        assert np.allclose(sqrt_psd(4.0 * np.eye(2)), 2.0 * np.eye(2))

    def test_round_trip_random(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            b = rng.standard_normal((n, n))
            k = b @ b.T
            root = sqrt_psd(k)
            assert np.abs(root @ root - k).max() <= 1e-10 * max(1.0, np.abs(k).max())

    def test_clips_rounding_band(self):
        k = np.diag([1.0, -1e-14])
        root = sqrt_psd(k)
        assert root[1, 1] == 0.0

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsd):
            sqrt_psd(np.diag([1.0, -0.5]))


class TestQuadrature:
    def test_unit_interval(self):
        assert integrate_line(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_truncated_exponential(self):
        val = integrate_line(np.exp, -40.0, 0.0)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_lorentzian_over_line(self):
        spec = QuadratureSpec(abs_tol=1e-11, rel_tol=1e-11,
                              tail_decay_hint=TailHint(c=1.0, rate=2.0))
        val = integrate_realline(lambda x: 1.0 / (1.0 + x * x), spec)
        assert val == pytest.approx(np.pi, abs=1e-10)

    def test_lorentzian_heuristic_tail(self):
        val = integrate_realline(lambda x: 2.0 / (1.0 + x * x))
        assert val == pytest.approx(2.0 * np.pi, abs=1e-9)

    def test_zero_integrand(self):
        assert integrate_realline(lambda x: 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_even_integrand_halves(self):
        spec = QuadratureSpec(tail_decay_hint=TailHint(c=2.0, rate=4.0))
        full = integrate_realline(lambda x: 1.0 / (1.0 + x**4), spec)
        half = integrate_line(lambda x: 1.0 / (1.0 + x**4), 0.0, 1e3)
        assert full == pytest.approx(2.0 * half, rel=1e-9)

    def test_slow_decay_rejected(self):
        with pytest.raises(MissingTailBound):
            integrate_realline(lambda x: 1.0 / (1.0 + abs(x)))

    def test_matrix_valued(self):
        out = integrate_line(lambda x: np.array([[np.cos(x), 0.0], [0.0, np.sin(x)]]),
                             0.0, np.pi / 2)
        assert np.allclose(out, np.eye(2), atol=1e-11)


class TestCube:
    def test_constant(self):
        assert integrate_cube(lambda s, t: 1.0, 1.0, 2, 9) == pytest.approx(1.0, abs=1e-13)

    def test_difference_kernel_reduces_to_line(self):
        # int_{[0,1]^2} e^{-|s-t|} = 2 int_0^1 (1 - tau) e^{-tau} dtau
        target = 2.0 * integrate_line(lambda u: (1.0 - u) * np.exp(-u), 0.0, 1.0)
        val = integrate_cube(lambda s, t: np.exp(-abs(s - t)), 1.0, 2, 81)
        assert val == pytest.approx(target, rel=2e-4)

    def test_second_order_convergence(self):
        f = lambda s, t: np.exp(s * t)  # smooth
        exact = 1.3179021514544038  # int_{[0,1]^2} e^{st}, series-summed
        e1 = abs(integrate_cube(f, 1.0, 2, 11) - exact)
        e2 = abs(integrate_cube(f, 1.0, 2, 21) - exact)
        assert 3.5 <= e1 / e2 <= 4.5

    def test_dimension_guard(self):
        with pytest.raises(DimensionTooLarge):
            integrate_cube(lambda *a: 1.0, 1.0, 5, 5)
