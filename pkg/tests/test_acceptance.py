"""Acceptance suite: thirteen end-to-end checks, one test per criterion.

Each test states its tolerance and runtime budget inline.  Oracles that
exist only here (Fourier inversion of the resolvent symbol, the Riesz
composition convolution) are built from quadrature, independent of the
library routines they audit.
"""

import time
from fractions import Fraction

import mpmath as mp
import numpy as np
from conftest import random_hermitian
from scipy import integrate

from diracshift.clifford import build_clifford, check_relations, diagonalizer, dirac_symbol
from diracshift.discretize import assemble_weighted_resolvent, build_grid, schatten_norm
from diracshift.green import green0, green0_limit0, odd_dim_coeffs, riesz_gamma
from diracshift import specfun
from diracshift.regdet import product_residual, trace_xk, xk_words
from diracshift.resolvalg import bs_residuals, feshbach_invert, jn_invert, riesz_projection
from diracshift.ssf import (
    MatrixPair,
    abel_transform,
    abel_zero_limit,
    g_correction,
    g_deriv_paper,
    ssf_boundary,
    ssf_count_oracle,
    trace_formula_residual,
    witten_index,
)


def test_ac01_clifford_relations_and_diagonalization(reps):
    # relations exact for n = 2..8; symbol diagonalization residual <= 1e-12
    # over 100 random unit directions for n <= 5; under 10 s
    start = time.perf_counter()
    for n in range(2, 9):
        audit = check_relations(reps[n])
        assert audit["size_ok"]
        assert audit["hermiticity_residual"] == 0.0
        assert audit["anticommutation_residual"] == 0.0
    rng = np.random.default_rng(101)
    block = {}
    for n in range(2, 6):
        rep = reps[n]
        half = rep.N // 2
        block[n] = np.diag(np.concatenate([-np.ones(half), np.ones(half)]))
        worst = 0.0
        for _ in range(100):
            omega = rng.standard_normal(rep.n)
            omega /= np.linalg.norm(omega)
            t = diagonalizer(rep, omega)
            got = t.conj().T @ dirac_symbol(rep, omega) @ t
            worst = max(worst, np.abs(got - block[n]).max())
        assert worst <= 1e-12
    assert time.perf_counter() - start < 10.0


def test_ac02_hankel_cross_regime():
    # half-integer closed forms vs series <= 1e-10 relative for |zeta| <= 10;
    # series vs asymptotics <= 1e-6 relative on 20 <= |zeta| <= 40; under 10 s
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_closed = 0.0
    for nu in (0.5, 1.5, 2.5, 3.5):
        for _ in range(25):
            r = rng.uniform(0.05, 10.0)
            phi = rng.uniform(0.0, np.pi * 0.95)
            z = r * np.exp(1j * phi)
            closed = specfun.hankel1_halfint(nu, z)
            series = specfun.hankel1_series(nu, z, dps=40)
            worst_closed = max(worst_closed, abs(closed - series) / abs(series))
    assert worst_closed <= 1e-10

    worst_asym = 0.0
    orders = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
    for i in range(200):
        nu = orders[i % len(orders)]
        r = rng.uniform(20.0, 40.0)
        phi = rng.uniform(0.0, np.pi * 0.9)
        z = r * np.exp(1j * phi)
        asym, _ = specfun.hankel1_asymptotic(nu, z, 28)
        series = specfun.hankel1_series(nu, z, dps=80)
        worst_asym = max(worst_asym, abs(asym - series) / abs(series))
    assert worst_asym <= 1e-6
    assert time.perf_counter() - start < 10.0


def _fourier_kernel_2d(rep, w):
    # (2pi)^-2 int e^{ip.w} (a.p + z)/(|p|^2 - z^2) dp at z = 2i, reduced to
    # two radial oscillatory integrals handled by quadosc
    s = float(np.linalg.norm(w))
    c0 = mp.quadosc(
        lambda p: mp.besselj(0, p * s) * p / (p * p + 4), [0, mp.inf],
        period=2 * mp.pi / s,
    )
    c1 = mp.quadosc(
        lambda p: mp.besselj(1, p * s) * p * p / (p * p + 4), [0, mp.inf],
        period=2 * mp.pi / s,
    )
    unit = (rep.alphas[0] * w[0] + rep.alphas[1] * w[1]) / s
    return (2j * float(c0) * np.eye(2) + 1j * float(c1) * unit) / (2 * np.pi)


def test_ac03_green_kernel_routes_and_limits(reps):
    # closed vs generic route <= 1e-10 relative (n=3, 100 draws); zero-energy
    # approach slope >= 0.9 for n = 2, 3; Fourier-inversion oracle at z = 2i
    # matches to 1e-4 entrywise for n = 2; under 5 min
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    rep3 = reps[3]
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-2, 2, 3)
        y = rng.uniform(-2, 2, 3)
        if np.linalg.norm(x - y) < 0.1:
            y = x + np.array([0.5, 0.0, 0.0])
        z = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
        closed = green0(rep3, z, x, y, route="closed")
        generic = green0(rep3, z, x, y, route="generic")
        worst = max(worst, np.abs(closed - generic).max() / np.abs(closed).max())
    assert worst <= 1e-10

    x = np.array([0.9, -0.4, 0.3])
    for n in (2, 3):
        rep = reps[n]
        xs, ys = x[: n], np.zeros(n)
        limit = green0_limit0(rep, xs, ys)
        eps = np.array([1e-6, 1e-7, 1e-8, 1e-9])
        errs = [
            np.abs(green0(rep, 1j * e, xs, ys) - limit).max() for e in eps
        ]
        slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
        assert slope >= 0.9

    rep2 = reps[2]
    for w in ([1.0, 0.0], [0.4, -0.7], [-1.3, 0.6]):
        w = np.asarray(w)
        got = green0(rep2, 2j, w, np.zeros(2))
        want = _fourier_kernel_2d(rep2, w)
        assert np.abs(got - want).max() <= 1e-4
    assert time.perf_counter() - start < 300.0


def test_ac04_odd_dimension_coefficients_exact():
    # d_j = 0 for odd j <= n-4 and d'_j = 0 for odd j <= n-2, in exact
    # rational arithmetic, for n = 5, 7, 9; under 1 s
    start = time.perf_counter()
    for n in (5, 7, 9):
        coeffs = odd_dim_coeffs(n)
        for j in range(1, n - 3, 2):
            assert isinstance(coeffs.d[j], Fraction)
            assert coeffs.d[j] == 0
        for j in range(1, n - 1, 2):
            assert isinstance(coeffs.dprime[j], Fraction)
            assert coeffs.dprime[j] == 0
    assert time.perf_counter() - start < 1.0


def _contraction(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m /= np.sqrt(2.0 * dim)
    radius = np.abs(np.linalg.eigvals(m)).max()
    if radius > 0.9:
        m *= 0.9 / radius
    return m


def test_ac05_determinant_product_formula():
    # product identity residual <= 1e-10 over 100 random 6x6 pairs per
    # k = 1..4; closed-form trace vs combinatorial words <= 1e-12; under 30 s
    start = time.perf_counter()
    rng = np.random.default_rng(505)
    for k in range(1, 5):
        worst = 0.0
        for _ in range(100):
            worst = max(
                worst, product_residual(k, _contraction(rng, 6), _contraction(rng, 6))
            )
        assert worst <= 1e-10
    for k in range(2, 5):
        for _ in range(20):
            a, b = _contraction(rng, 6), _contraction(rng, 6)
            closed = trace_xk(k, a, b)
            words = np.trace(xk_words(k).evaluate(a, b))
            assert abs(closed - words) <= 1e-12
    assert time.perf_counter() - start < 30.0


def test_ac06_ssf_routes_round_to_counting_oracle():
    # krein and eq_main (m = 1, 2) round to the counting oracle at every
    # grid point at least 0.05 from the joint spectrum, 50 random 8x8 pairs;
    # Krein trace formula residual <= 1e-8 with Gaussian test functions;
    # under 2 min
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    for _ in range(50):
        pair = MatrixPair(
            s0=random_hermitian(rng, 8), v=random_hermitian(rng, 8, scale=0.6)
        )
        eig0 = np.linalg.eigvalsh(pair.s0)
        eig1 = np.linalg.eigvalsh(pair.s)
        eig = np.sort(np.concatenate([eig0, eig1]))
        grid = np.linspace(eig[0] - 1.0, eig[-1] + 1.0, 8)
        safe = [np.abs(eig - lam).min() >= 0.05 for lam in grid]
        tables = [
            ssf_boundary(pair, grid, eps_schedule=(2e-2, 1e-2), method="krein"),
            ssf_boundary(pair, grid, eps_schedule=(2e-2, 1e-2), method="eq_main", m=1),
            ssf_boundary(pair, grid, eps_schedule=(2e-2, 1e-2), method="eq_main", m=2),
        ]
        for j, ok in enumerate(safe):
            if not ok:
                continue
            want = ssf_count_oracle(pair, grid[j])
            for table in tables:
                assert int(round(table.xi[j])) == want

        # Gaussian test function: tr(f(S) - f(S0)) vs the counting-oracle
        # spectral shift integrated exactly over the eigenvalue partition
        center, width = float(rng.uniform(-1, 1)), float(rng.uniform(0.7, 1.5))
        f = lambda t: np.exp(-((t - center) ** 2) / (2 * width**2))
        lhs = f(eig1).sum() - f(eig0).sum()
        rhs = 0.0
        for a, b in zip(eig[:-1], eig[1:]):
            if b - a < 4e-12:
                continue
            rhs += ssf_count_oracle(pair, (a + b) / 2) * (f(b) - f(a))
        assert abs(lhs - rhs) <= 1e-8
    assert time.perf_counter() - start < 120.0


def test_ac07_higher_order_trace_formula():
    # residual <= 1e-6 for m = 1..3 over 20 random 4x4 pairs on a fixed
    # off-real z set; under 30 s
    start = time.perf_counter()
    rng = np.random.default_rng(707)
    zs = (1 + 1j, -2 + 0.5j, 0.3 - 1.2j, 2j)
    worst = 0.0
    for _ in range(20):
        pair = MatrixPair(
            s0=random_hermitian(rng, 4), v=random_hermitian(rng, 4, scale=0.8)
        )
        for m in (1, 2, 3):
            for z in zs:
                worst = max(worst, trace_formula_residual(m, pair, z))
    assert worst <= 1e-6
    assert time.perf_counter() - start < 30.0


def _fd_of_g(m, z, pair, h):
    g = lambda w: g_correction(m, w, pair)
    if m == 1:
        return (g(z + h) - g(z - h)) / (2 * h)
    if m == 2:
        return (g(z + h) - 2 * g(z) + g(z - h)) / h**2
    return (g(z + 2 * h) - 2 * g(z + h) + 2 * g(z - h) - g(z - 2 * h)) / (2 * h**3)


def test_ac08_g_derivative_identity():
    # symbolic derivative vs finite differences of the trace correction,
    # relative error <= 1e-4 for m = 1..3; under 30 s
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    steps = {1: 1e-5, 2: 1e-4, 3: 1e-3}
    for m in (1, 2, 3):
        for _ in range(5):
            pair = MatrixPair(
                s0=random_hermitian(rng, 4), v=random_hermitian(rng, 4, scale=0.7)
            )
            z = complex(rng.uniform(-1, 1), rng.uniform(0.8, 1.6))
            sym = g_deriv_paper(m, z, pair)
            fd = _fd_of_g(m, z, pair, steps[m])
            assert abs(sym - fd) / abs(sym) <= 1e-4
    assert time.perf_counter() - start < 30.0


def test_ac09_abel_transform_closed_forms():
    # indicator profiles match arcsine values to 1e-8; the zero-radius limit
    # averages step data to 1e-6; under 5 s
    start = time.perf_counter()

    def clip_asin(t):
        return np.arcsin(min(1.0, max(-1.0, t)))

    for a, b, lam in [(0.0, 0.3, 1.0), (-0.5, 0.2, 0.49), (0.1, 5.0, 2.0),
                      (-3.0, -0.2, 1.7), (-1.0, 1.0, 0.81)]:
        xi = lambda t: 1.0 if a <= t <= b else 0.0
        root = np.sqrt(lam)
        want = (clip_asin(b / root) - clip_asin(a / root)) / np.pi
        assert abs(abel_transform(xi, lam) - want) <= 1e-8

    assert abs(abel_zero_limit(lambda t: 0.5 if t < 0 else 3.5) - 2.0) <= 1e-6
    assert abs(abel_zero_limit(lambda t: 0.0 if t < 0 else 1.0) - 0.5) <= 1e-6
    assert time.perf_counter() - start < 5.0


def test_ac10_witten_index_extrapolation():
    # full-rank r x c matrices give index c - r to 1e-8 for k = 1, 2,
    # including 8x5 -> -3; trace variance over the schedule <= 1e-18;
    # under 5 s
    start = time.perf_counter()
    rng = np.random.default_rng(1010)
    for rows, cols in [(8, 5), (3, 7), (6, 6), (5, 9)]:
        t = rng.standard_normal((rows, cols))
        assert np.linalg.svd(t, compute_uv=False)[-1] > 1e-6
        for k in (1, 2):
            out = witten_index(t, k=k)
            assert abs(out.extrapolated - (cols - rows)) <= 1e-8
            assert np.var(out.scaled_traces) <= 1e-18
    assert time.perf_counter() - start < 5.0


def test_ac11_resolvent_identity_reconstructions():
    # Birman-Schwinger residuals, projected-inversion rebuilds, and block
    # inverses each <= 1e-10 on 200 random instances; under 30 s
    start = time.perf_counter()
    rng = np.random.default_rng(1111)

    worst = 0.0
    for _ in range(200):
        pair = MatrixPair(
            s0=random_hermitian(rng, 6), v=random_hermitian(rng, 6, scale=0.7)
        )
        worst = max(worst, max(bs_residuals(pair, 0.3 + 1j).values()))
    assert worst <= 1e-10

    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 8))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a += 0.5 * np.eye(d)
        lam = np.linalg.eigvals(a)
        lam0 = lam[int(rng.integers(d))]
        gaps = np.abs(lam - lam0)
        gaps = gaps[gaps > 1e-9]
        proj = riesz_projection(a, lam0, 0.45 * gaps.min() if gaps.size else 0.5)
        _, inverse = jn_invert(a, proj)
        worst = max(worst, np.abs(inverse - np.linalg.inv(a)).max())
    assert worst <= 1e-10

    worst = 0.0
    for _ in range(200):
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        out = feshbach_invert(b[:2, :2], b[:2, 2:], b[2:, :2], b[2:, 2:])
        assert out is not None
        worst = max(worst, np.abs(out - np.linalg.inv(b)).max())
    assert worst <= 1e-10
    assert time.perf_counter() - start < 30.0


def test_ac12_weighted_resolvent_grid_stability():
    # Schatten-3 norm of the weighted resolvent on [-1/2, 1/2]^2 changes at
    # most 5% from 16 to 32 points per axis, at z = 0 and z = i, with
    # delta = 1.1; under 10 min
    start = time.perf_counter()
    rep = build_clifford(2)
    norms = {}
    for m in (16, 32):
        grid = build_grid(2, 0.5, m)
        for z in (0.0, 1j):
            op = assemble_weighted_resolvent(rep, grid, z, 1.1)
            norms[(m, z)] = schatten_norm(op, 3)
    for z in (0.0, 1j):
        change = abs(norms[(32, z)] - norms[(16, z)]) / norms[(16, z)]
        assert change <= 0.05
    assert time.perf_counter() - start < 600.0


ALPHA = BETA = 0.8


def _riesz_convolution(d):
    # int |y|^(a-2) |y - d e1|^(b-2) dy over the plane: one disc around each
    # singular point in local polar coordinates, then the punctured exterior
    # with an inverted-radius substitution for the slowly decaying tail
    a, b = ALPHA, BETA

    def disc(around_second):
        shift = d if not around_second else -d
        p, q = (a, b) if not around_second else (b, a)

        def f(theta, r):
            other = np.hypot(r * np.cos(theta) - shift, r * np.sin(theta))
            return r ** (p - 1.0) * other ** (q - 2.0)

        val, _ = integrate.dblquad(f, 0, d / 2, 0, 2 * np.pi, epsabs=1e-10)
        return val

    def ring(r):
        c = (r * r + 0.75 * d * d) / (2.0 * r * d)
        theta0 = 0.0 if c >= 1.0 else float(np.arccos(c))

        def g(theta):
            other = np.hypot(r * np.cos(theta) - d, r * np.sin(theta))
            return r ** (a - 1.0) * other ** (b - 2.0)

        val, _ = integrate.quad(g, theta0, 2 * np.pi - theta0, epsabs=1e-11)
        return val

    near, _ = integrate.quad(ring, d / 2, 20 * d, epsabs=1e-9, limit=200)
    far, _ = integrate.quad(
        lambda u: ring(1.0 / u) / (u * u), 1e-9, 1.0 / (20 * d),
        epsabs=1e-9, limit=200,
    )
    return disc(False) + disc(True) + near + far


def test_ac13_riesz_composition_formula():
    # numeric convolution of |x|^(alpha-n) kernels vs the gamma-factor
    # closed form within 1e-2 relative at five separations; under 5 min
    start = time.perf_counter()
    ratio = (
        riesz_gamma(ALPHA, 2) * riesz_gamma(BETA, 2) / riesz_gamma(ALPHA + BETA, 2)
    )
    for d in (0.5, 0.8, 1.0, 1.6, 2.5):
        numeric = _riesz_convolution(d)
        closed = ratio * d ** (ALPHA + BETA - 2.0)
        assert abs(numeric - closed) / abs(closed) <= 1e-2
    assert time.perf_counter() - start < 300.0
