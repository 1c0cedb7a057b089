import itertools
import math

import numpy as np
import pytest

import conestab as cs
from conestab.weights import WeightSpec, weight_partials

SPECS = [cs.FROBENIUS, cs.SIGNED4, cs.MAX_EIGENVALUE]


def test_eval_weight_examples():
    assert cs.eval_weight(cs.SIGNED4, [1.0, -1.0]) == pytest.approx(math.sqrt(5))
    assert cs.eval_weight(cs.FROBENIUS, [0.0, 1.0, -1.0]) == pytest.approx(math.sqrt(2))
    for spec in SPECS:
        assert cs.eval_weight(spec, [0.0, 0.0, 0.0]) == 0.0


def test_parse_labels():
    assert WeightSpec.parse("frobenius") == cs.FROBENIUS
    assert WeightSpec.parse("signed:4") == cs.SIGNED4
    assert WeightSpec.parse("signed:7/2").a == cs.signed("7/2").a
    assert WeightSpec.parse("max") == cs.MAX_EIGENVALUE
    with pytest.raises(cs.UsageError):
        WeightSpec.parse("gauss")
    with pytest.raises(cs.UsageError):
        WeightSpec.parse("signed:-1")


def test_permutation_symmetry_exact(rng):
    lam = rng.normal(size=5)
    for spec in SPECS:
        ref = cs.eval_weight(spec, lam)
        for perm in itertools.permutations(range(5)):
            assert cs.eval_weight(spec, lam[list(perm)]) == ref


def test_homogeneity(rng):
    for spec in SPECS:
        for _ in range(200):
            lam = rng.normal(size=4)
            c = float(rng.uniform(1e-3, 1e3))
            f = cs.eval_weight(spec, lam)
            fc = cs.eval_weight(spec, c * lam)
            assert abs(fc - c * f) <= 1e-12 * c * max(f, 1e-12)


def test_convexity_midpoint(rng):
    for spec in SPECS:
        a = rng.normal(size=(10_000, 4))
        b = rng.normal(size=(10_000, 4))
        for x, y in zip(a[:10_000], b):
            fx = cs.eval_weight(spec, x)
            fy = cs.eval_weight(spec, y)
            fm = cs.eval_weight(spec, 0.5 * (x + y))
            assert fm <= 0.5 * (fx + fy) + 1e-12 * (abs(fx) + abs(fy) + 1)


def test_nonnegative_on_trace_free(rng):
    for spec in SPECS:
        for _ in range(500):
            lam = rng.normal(size=5)
            lam -= lam.mean()
            assert cs.eval_weight(spec, lam) >= 0.0


def _random_symmetric_third(rng, n):
    t = rng.normal(size=(n, n, n))
    t = t + t.transpose(1, 0, 2) + t.transpose(2, 1, 0)
    t = t + t.transpose(0, 2, 1)
    return t


def test_gradient_frobenius_chain_rule(rng):
    lam = np.array([1.5, 0.7, -0.9, -1.3])
    third = _random_symmetric_third(rng, 4)
    w = cs.eval_weight(cs.FROBENIUS, lam)
    got = cs.weight_gradient(cs.FROBENIUS, lam, third)
    expect = np.array([(lam / w) @ np.diagonal(third[:, :, k]) for k in range(4)])
    np.testing.assert_allclose(got, expect, rtol=1e-14)


def test_gradient_guard_zero_crossing():
    lam = np.array([1.0, 1e-7, -1.0])
    third = np.zeros((3, 3, 3))
    with pytest.raises(cs.NonSmoothPoint):
        cs.weight_gradient(cs.SIGNED4, lam, third)
    # frobenius has no sign guard at the same point
    cs.weight_gradient(cs.FROBENIUS, lam, third)


def test_max_weight_guard_collision():
    lam = np.array([1.0, 1.0 + 1e-7, -2.0])
    with pytest.raises(cs.NonSmoothPoint):
        cs.weight_gradient(cs.MAX_EIGENVALUE, lam, np.zeros((3, 3, 3)))


def test_laplacian_guard_zero_hessian():
    with pytest.raises(cs.NonSmoothPoint):
        cs.weight_laplacian(cs.FROBENIUS, np.zeros(3), np.zeros((3, 3, 3)))


def test_laplacian_n2_equality_case():
    """u = x^3 - 3x y^2 gives w*lap(w) = |grad w|^2 = 72 at any point."""
    p = cs.poly_from_coeffs(2, 3, {(3, 0): 1, (1, 2): -3})
    pts = np.array([[0.4, 0.2], [-0.3, 0.8], [0.9, -0.1]])
    hess = p.hessian_batch(pts)
    lam, Q = np.linalg.eigh(hess)
    third = np.einsum("pai,pbj,pck,pabc->pijk", Q, Q, Q, p.third_batch(pts))
    for i, x in enumerate(pts):
        r = np.linalg.norm(x)
        w = cs.eval_weight(cs.FROBENIUS, lam[i])
        grad = cs.weight_gradient(cs.FROBENIUS, lam[i], third[i])
        lap = cs.weight_laplacian(cs.FROBENIUS, lam[i], third[i])
        assert w == pytest.approx(6 * math.sqrt(2) * r, rel=1e-12)
        assert lap == pytest.approx(6 * math.sqrt(2) / r, rel=1e-10)
        assert w * lap == pytest.approx(np.sum(grad**2), rel=1e-10)
        assert w * lap == pytest.approx(72.0, rel=1e-10)


def _fd_weight_maps(poly, spec, x, h):
    def g(pt):
        lam = np.linalg.eigvalsh(poly.hessian_batch(pt[None, :])[0])
        return cs.eval_weight(spec, lam)

    n = len(x)
    grad = np.array([(g(x + h * e) - g(x - h * e)) / (2 * h) for e in np.eye(n)])
    lap = sum((g(x + h * e) - 2 * g(x) + g(x - h * e)) / h**2 for e in np.eye(n))
    return grad, lap


def test_gradient_and_laplacian_match_finite_differences(rng):
    """Analytic eigenbasis calculus vs Richardson-refined central differences."""
    poly = cs.random_harmonic_poly(4, 4, seed=11)
    pts = cs.sample_points(4, 40, seed=4)
    hess = poly.hessian_batch(pts)
    lam, Q = np.linalg.eigh(hess)
    third = np.einsum("pai,pbj,pck,pabc->pijk", Q, Q, Q, poly.third_batch(pts))
    checked = 0
    for i in range(len(pts)):
        lam_i = lam[i]
        rho = np.max(np.abs(lam_i))
        if np.min(np.abs(lam_i)) < 1e-3 * rho or np.min(np.diff(np.sort(lam_i))) < 1e-3 * rho:
            continue
        grad = cs.weight_gradient(cs.SIGNED4, lam_i, third[i])
        lap = cs.weight_laplacian(cs.SIGNED4, lam_i, third[i])
        g1, _ = _fd_weight_maps(poly, cs.SIGNED4, pts[i], 1e-5)
        g2, _ = _fd_weight_maps(poly, cs.SIGNED4, pts[i], 5e-6)
        _, l1 = _fd_weight_maps(poly, cs.SIGNED4, pts[i], 3e-4)
        _, l2 = _fd_weight_maps(poly, cs.SIGNED4, pts[i], 1.5e-4)
        g_fd = np.linalg.norm(g2 + (g2 - g1) / 3)
        l_fd = l2 + (l2 - l1) / 3
        w = cs.eval_weight(cs.SIGNED4, lam_i)
        assert abs(np.linalg.norm(grad) - g_fd) <= 1e-6 * max(g_fd, w)
        assert abs(lap - l_fd) <= 1e-5 * max(abs(l_fd), w)
        checked += 1
        if checked >= 8:
            break
    assert checked >= 4


def test_identity_nf_examples():
    res = cs.identity_nf(cs.FROBENIUS, [1.0, -1.0, 0.0])
    assert res.f == pytest.approx(math.sqrt(2), rel=1e-15)
    assert res.residual <= 1e-14
    assert res.nf == pytest.approx(3 * math.sqrt(2), rel=1e-15)

    for scale in (1.0, 1e-3, 37.5):
        res = cs.identity_nf(cs.FROBENIUS, np.array([1.0, 1.0, -2.0]) * scale)
        assert res.residual <= 1e-12 * res.f

    with pytest.raises(cs.UsageError):
        cs.identity_nf(cs.FROBENIUS, [1.0, 1.0, 1.0])


def test_identity_nf_randomized_per_k_bound(rng):
    """Pairing identity and the per-k partial-sum bound on random spectra."""
    tested = 0
    while tested < 10_000:
        lam = rng.normal(size=5)
        lam -= lam.mean()
        rho = np.max(np.abs(lam))
        if rho == 0 or np.min(np.abs(lam)) < 2e-4 * rho:
            continue
        for spec in (cs.FROBENIUS, cs.SIGNED4):
            res = cs.identity_nf(spec, lam)
            assert res.residual <= 1e-9 * max(res.f, 1e-12)
            assert np.max(res.per_k_sums) <= res.nf + 1e-9 * max(res.f, 1e-12)
        tested += 1


def test_monotone_pairing(rng):
    """(f_i - f_j)(l_i - l_j) >= 0 for every weight at guarded points."""
    tested = 0
    while tested < 2_000:
        lam = rng.normal(size=4)
        rho = np.max(np.abs(lam))
        if rho == 0 or np.min(np.abs(lam)) < 1e-3 * rho:
            continue
        gaps = np.diff(np.sort(lam))
        if np.min(gaps) < 1e-3 * rho:
            continue
        for spec in SPECS:
            f, grad, _ = weight_partials(spec, lam)
            pair = (grad[:, None] - grad[None, :]) * (lam[:, None] - lam[None, :])
            assert pair.min() >= -1e-12 * max(f * f, 1e-12)
        tested += 1


def test_pair_coefficient_limit_rule_continuity():
    """The divided difference passes continuously through the guard band."""
    from conestab.weights import _batch_pair_matrix, _batch_partials

    for spec in (cs.FROBENIUS, cs.SIGNED4):
        rows = []
        for gap in (1e-3, 1e-5):
            lam = np.array([[2.0, 1.0 + gap, 1.0, -4.0 - gap]])
            f, grad, hess = _batch_partials(spec, lam)
            rows.append(_batch_pair_matrix(spec, lam, f, grad, hess)[0])
        np.testing.assert_allclose(rows[0], rows[1], atol=2e-3)


def test_spectrum_container():
    s = cs.Spectrum(((1.0, 2), (-2.0, 1), (0.0, 1)))
    assert s.n == 4
    assert s.values[0] == (1.0, 2)
    np.testing.assert_allclose(s.expand(), [1.0, 1.0, 0.0, -2.0])
    assert s.is_trace_free()
    assert s.spectral_radius == 2.0
    with pytest.raises(cs.UsageError):
        cs.Spectrum(((1.0, 0),))
