import itertools
import math

import numpy as np
import pytest

from latkern.interpolant import (
    TrigPolynomial,
    build,
    build_many,
    evaluate,
    evaluate_shifted_union,
    h_norm,
    l2_error_estimate,
    load_interpolant,
    save_interpolant,
)
from latkern.kernel import KernelSpec, kernel_eval, rnorm
from latkern.lattice import Lattice, cbc_construct, fooling_vector
from latkern.weights import WeightScheme


def _spec(gammas=(0.9, 0.6, 0.4), alpha=2):
    return KernelSpec(
        alpha, WeightScheme("product", gamma_j=np.asarray(gammas))
    )


def _dense_gram_solve(spec, lat, values):
    pts = lat.points()
    G = np.array(
        [[kernel_eval(spec, pts[k], pts[kp]) for k in range(lat.n)]
         for kp in range(lat.n)]
    )
    return np.linalg.solve(G, values)


class TestBuild:
    def test_n1(self):
        spec = _spec((0.5,))
        lat = Lattice(1, np.array([1]))
        itp = build(spec, lat, np.array([3.7]))
        k00 = kernel_eval(spec, [0.0], [0.0])
        assert itp.coeffs[0] == pytest.approx(3.7 / k00, rel=1e-14)
        assert evaluate(itp, [0.25]) == pytest.approx(
            itp.coeffs[0] * kernel_eval(spec, [0.0], [0.25]), rel=1e-13
        )

    def test_constant_values(self):
        spec = _spec()
        lat = Lattice(16, np.array([1, 7, 5]))
        itp = build(spec, lat, np.full(16, 2.5))
        assert itp.residual <= 1e-10 * 2.5

    def test_matches_dense_gram_oracle(self):
        spec = _spec((0.9, 0.6, 0.4, 0.2))
        lat = cbc_construct(spec, 16, 4).lattice()
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(16)
        itp = build(spec, lat, vals)
        dense = _dense_gram_solve(spec, lat, vals)
        np.testing.assert_allclose(itp.coeffs, dense, rtol=1e-9, atol=1e-12)

    def test_hand_solved_n2(self):
        spec = _spec((0.8,))
        lat = Lattice(2, np.array([1]))
        v = np.array([1.3, -0.4])
        a = kernel_eval(spec, [0.0], [0.0])
        b = kernel_eval(spec, [0.5], [0.0])
        det = a * a - b * b
        want = np.array(
            [(a * v[0] - b * v[1]) / det, (a * v[1] - b * v[0]) / det]
        )
        itp = build(spec, lat, v)
        np.testing.assert_allclose(itp.coeffs, want, rtol=1e-12)

    def test_hand_solved_n3(self):
        spec = _spec((0.8,))
        lat = Lattice(3, np.array([1]))
        v = np.array([0.2, 1.0, -0.7])
        pts = lat.points()
        G = np.array(
            [[kernel_eval(spec, pts[i], pts[j]) for j in range(3)]
             for i in range(3)]
        )
        want = np.linalg.solve(G, v)
        itp = build(spec, lat, v)
        np.testing.assert_allclose(itp.coeffs, want, rtol=1e-11)

    def test_spectrum_nonzero(self):
        spec = _spec()
        lat = Lattice(32, np.array([1, 13, 9]))
        itp = build(spec, lat, np.zeros(32))
        assert np.min(np.abs(itp.spectrum)) > 0.0

    def test_wrong_length_rejected(self):
        spec = _spec()
        with pytest.raises(ValueError):
            build(spec, Lattice(8, np.array([1, 3, 5])), np.zeros(7))


class TestEvaluate:
    def test_interpolation_condition(self):
        spec = _spec()
        lat = cbc_construct(spec, 16, 3).lattice()
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(16)
        itp = build(spec, lat, vals)
        for k in range(16):
            assert evaluate(itp, lat.points()[k]) == pytest.approx(
                vals[k], rel=1e-8, abs=1e-10
            )

    def test_linearity(self):
        spec = _spec()
        lat = Lattice(16, np.array([1, 7, 5]))
        rng = np.random.default_rng(4)
        f, g = rng.standard_normal(16), rng.standard_normal(16)
        combo = build(spec, lat, 2.0 * f + 3.0 * g)
        fi, gi = build(spec, lat, f), build(spec, lat, g)
        for y in rng.random((5, 3)):
            want = 2.0 * evaluate(fi, y) + 3.0 * evaluate(gi, y)
            assert evaluate(combo, y) == pytest.approx(
                want, rel=1e-10, abs=1e-10
            )

    def test_periodicity(self):
        spec = _spec()
        lat = Lattice(8, np.array([1, 3, 5]))
        itp = build(spec, lat, np.arange(8.0))
        y = np.array([0.12, 0.77, 0.31])
        shift = y + np.array([2.0, -1.0, 5.0])
        assert evaluate(itp, y) == pytest.approx(
            evaluate(itp, shift), rel=1e-12
        )


class TestShiftedUnion:
    def test_zero_shift_gives_node_values(self):
        spec = _spec()
        lat = Lattice(16, np.array([1, 7, 5]))
        rng = np.random.default_rng(6)
        vals = rng.standard_normal(16)
        itp = build(spec, lat, vals)
        su = evaluate_shifted_union(itp, np.zeros(3))
        np.testing.assert_allclose(su, vals, rtol=1e-10, atol=1e-12)

    def test_matches_direct_evaluation(self):
        spec = _spec()
        lat = cbc_construct(spec, 32, 3).lattice()
        rng = np.random.default_rng(8)
        itp = build(spec, lat, rng.standard_normal(32))
        y = rng.random(3)
        su = evaluate_shifted_union(itp, y)
        direct = [
            evaluate(itp, (y + lat.points()[k]) % 1.0) for k in range(32)
        ]
        np.testing.assert_allclose(su, direct, rtol=1e-10, atol=1e-12)


class TestHNorm:
    def test_constant(self):
        f = TrigPolynomial({(0, 0, 0): -2.5})
        assert h_norm(_spec(), f) == pytest.approx(2.5)

    def test_single_frequency(self):
        spec = _spec()
        h = (2, 0, 1)
        f = TrigPolynomial({h: 1.0})
        want = math.sqrt(rnorm(spec.alpha, spec.scheme, h).to_float())
        assert h_norm(spec, f) == pytest.approx(want, rel=1e-12)

    def test_pythagoras(self):
        # Pythagoras ||f||^2 = ||f - f_n||^2 + ||f_n||^2 is equivalent to
        # <f, f_n> = ||f_n||^2.  Both sides are computed by independent
        # exact routes: the inner product as a finite Fourier sum (f is
        # band-limited) and the norm as coeffs . values by kernel algebra.
        spec = _spec((0.9, 0.6), alpha=2)
        lat = Lattice(8, np.array([1, 3]))
        pts = lat.points()
        terms = {}
        rng = np.random.default_rng(11)
        for h in [(0, 0), (1, 0), (0, 2), (1, 1), (2, -1), (-1, 3)]:
            c = complex(rng.standard_normal(), rng.standard_normal())
            terms[h] = c
            terms[tuple(-v for v in h)] = np.conj(c)
        f = TrigPolynomial(terms)
        vals = np.real(f(pts))
        itp = build(spec, lat, vals)
        inner = 0.0
        for h, fc in terms.items():
            phase = np.exp(-2j * np.pi * (pts @ np.asarray(h, float)))
            r = rnorm(spec.alpha, spec.scheme, h).to_float()
            fn_hat = np.sum(itp.coeffs * phase) / r
            inner += np.real(fc * np.conj(fn_hat)) * r
        norm_sq = float(np.dot(itp.coeffs, vals))
        assert inner == pytest.approx(norm_sq, rel=1e-6)
        # and the implied error norm is nonnegative
        assert h_norm(spec, f) ** 2 - norm_sq >= -1e-10


class TestL2ErrorEstimate:
    def _setup(self):
        spec = _spec()
        lat = Lattice(16, np.array([1, 7, 5]))
        rng = np.random.default_rng(13)
        itp = build(spec, lat, rng.standard_normal(16))
        sampler = rng.random((4, 3))
        return spec, lat, itp, sampler

    def test_self_is_zero(self):
        _, _, itp, sampler = self._setup()
        err = l2_error_estimate(
            itp, lambda P: [evaluate(itp, p) for p in P], sampler, 4
        )
        assert err <= 1e-12

    def test_constant_offset(self):
        _, _, itp, sampler = self._setup()
        err = l2_error_estimate(
            itp,
            lambda P: np.array([evaluate(itp, p) for p in P]) + 0.75,
            sampler,
            4,
        )
        assert err == pytest.approx(0.75, rel=1e-10)

    def test_aliased_frequency_error(self):
        # f = cos(2 pi h.y) with h in the dual lattice, h not an aliasing
        # representative of 0 of its own class... the interpolant sees node
        # data identical to the aliased representative and the estimated
        # error matches dense sampling
        spec = _spec((0.9, 0.6))
        n, z = 8, np.array([1, 3])
        lat = Lattice(n, z)
        h = fooling_vector(n, z)
        f = TrigPolynomial({tuple(h): 0.5, tuple(-h): 0.5})
        vals = np.real(f(lat.points()))
        itp = build(spec, lat, vals)
        g = np.linspace(0.0, 1.0, 60, endpoint=False)
        G = np.array([[a, b] for a in g for b in g])
        approx = np.array([evaluate(itp, p) for p in G])
        dense = math.sqrt(np.mean((np.real(f(G)) - approx) ** 2))
        sampler = np.random.default_rng(17).random((30, 2))
        est = l2_error_estimate(
            itp, lambda P: np.real(f(P)), sampler, 30
        )
        assert est == pytest.approx(dense, rel=0.15)
        assert est > 0.1  # genuinely nonzero aliasing error


class TestLowerBound:
    def test_fooling_function_and_l1_norm(self):
        n, z = 64, np.array([1, 27])
        h = fooling_vector(n, z)
        lat = Lattice(n, z)
        pts = lat.points()
        q = np.exp(2j * np.pi * h[0] * pts[:, 0]) - np.exp(
            -2j * np.pi * h[1] * pts[:, 1]
        )
        assert np.max(np.abs(q)) <= 1e-12
        # interpolating its (zero) node data yields the zero interpolant
        spec = _spec((0.9, 0.6))
        itp = build(spec, lat, np.real(q))
        assert np.max(np.abs(itp.coeffs)) <= 1e-12
        # dense L1 norm = 4/pi
        g = np.linspace(0.0, 1.0, 1000, endpoint=False)
        Y1, Y2 = np.meshgrid(g, g, indexing="ij")
        qv = np.abs(
            np.exp(2j * np.pi * h[0] * Y1) - np.exp(-2j * np.pi * h[1] * Y2)
        )
        assert np.mean(qv) == pytest.approx(4.0 / math.pi, abs=1e-3)


class TestBatchSharedSpectrum:
    def test_matches_individual_builds(self):
        spec = _spec()
        lat = cbc_construct(spec, 16, 3).lattice()
        rng = np.random.default_rng(19)
        V = rng.standard_normal((5, 16))
        batch = build_many(spec, lat, V)
        y = rng.random(3)
        su = batch.shifted_union(y)
        for i in range(5):
            itp = build(spec, lat, V[i])
            want = evaluate_shifted_union(itp, y)
            np.testing.assert_allclose(su[i], want, rtol=1e-12, atol=1e-12)


class TestOptimalitySanity:
    def test_beats_truncated_fourier_quadrature(self):
        # kernel interpolant error <= truncated-Fourier-by-quadrature error
        # on the same lattice data (within 2x sampling noise)
        spec = _spec((0.9, 0.6), alpha=2)
        lat = cbc_construct(spec, 32, 2).lattice()
        pts = lat.points()
        rng = np.random.default_rng(23)
        terms = {}
        for h in [(1, 0), (0, 1), (2, 3), (1, -2), (4, 1), (3, -4)]:
            c = complex(rng.standard_normal(), rng.standard_normal())
            terms[h] = c
            terms[tuple(-v for v in h)] = np.conj(c)
        f = TrigPolynomial(terms)
        norm = h_norm(spec, f)
        terms = {h: c / norm for h, c in terms.items()}
        f = TrigPolynomial(terms)
        vals = np.real(f(pts))
        itp = build(spec, lat, vals)
        H = 8
        quad_terms = {}
        for h1, h2 in itertools.product(range(-H, H + 1), repeat=2):
            phase = np.exp(-2j * np.pi * (pts @ np.array([h1, h2])))
            quad_terms[(h1, h2)] = np.sum(vals * phase) / lat.n
        fq = TrigPolynomial(quad_terms)
        G = np.random.default_rng(29).random((4000, 2))
        e_kernel = math.sqrt(
            np.mean(
                (np.real(f(G)) - [evaluate(itp, p) for p in G]) ** 2
            )
        )
        e_quad = math.sqrt(np.mean((np.real(f(G)) - np.real(fq(G))) ** 2))
        assert e_kernel <= 2.0 * e_quad + 1e-12


class TestSerialization:
    def test_round_trip(self, tmp_path):
        spec = _spec()
        lat = Lattice(16, np.array([1, 7, 5]))
        rng = np.random.default_rng(31)
        itp = build(spec, lat, rng.standard_normal(16))
        path = tmp_path / "itp.txt"
        save_interpolant(path, itp)
        back = load_interpolant(path, spec)
        np.testing.assert_array_equal(back.coeffs, itp.coeffs)
        assert back.lat.n == 16
        y = rng.random(3)
        assert evaluate(back, y) == evaluate(itp, y)

    def test_mismatched_spec_rejected(self, tmp_path):
        spec = _spec()
        lat = Lattice(8, np.array([1, 3, 5]))
        itp = build(spec, lat, np.zeros(8))
        path = tmp_path / "itp.txt"
        save_interpolant(path, itp)
        other = _spec(alpha=4)
        with pytest.raises(ValueError):
            load_interpolant(path, other)
