import json
import math

import numpy as np
import pytest

import conestab as cs
from conestab.cones import fd_derivatives
from goldens import GOLDEN


def test_half_space_profile(cache):
    """(1, n-1) reproduces theta* = pi/2 and phi = cos t for n = 3..8."""
    for n in range(3, 9):
        c = cache.cone(1, n - 1)
        assert abs(c.theta_star - math.pi / 2) <= 1e-8
        assert np.max(np.abs(c.phis - np.cos(c.ts))) <= 1e-8
        assert abs(c.dphis[-1] + 1.0) <= 1e-10


def test_usage_errors():
    with pytest.raises(cs.UsageError):
        cs.solve_cross_section(0, 4)
    with pytest.raises(cs.UsageError):
        cs.solve_cross_section(3, 0)
    with pytest.raises(cs.UsageError):
        cs.solve_cross_section(1, 1)


def test_theta_star_goldens(cache):
    for (k, h), (theta, H, _) in GOLDEN.items():
        c = cache.cone(k, h)
        assert c.theta_star == pytest.approx(theta, abs=1e-10)


def test_theta_21_transcendental_oracle(cache):
    """For C(2,1), sin(theta*) solves x*artanh(x) = 1 (Legendre closed form)."""
    c = cache.cone(2, 1)
    x = math.sin(c.theta_star)
    assert abs(x * math.atanh(x) - 1.0) <= 1e-11
    # whole profile: phi proportional to 1 - sin(t) artanh(sin(t))
    s = np.sin(c.ts[1:])
    exact = 1 - s * np.arctanh(s)
    assert np.max(np.abs(c.phis[1:] / c.normalization - exact)) <= 1e-12


def test_theta_3h_tan_square_oracle(cache):
    """The C(3,h) family closes at tan^2(theta*) = h."""
    for h in range(1, 6):
        c = cache.cone(3, h)
        assert math.tan(c.theta_star) ** 2 == pytest.approx(h, abs=1e-10)


def test_grid_convergence_of_theta():
    """theta*(steps) converges at 4th order: successive gaps shrink >= 8x."""
    thetas = [
        cs.solve_cross_section(2, 2, grid=256, hunt_steps=N).theta_star
        for N in (128, 256, 512, 1024, 2048)
    ]
    gaps = [abs(a - b) for a, b in zip(thetas, thetas[1:])]
    for g0, g1 in zip(gaps, gaps[1:]):
        assert g0 >= 8 * g1


def test_profile_ode_residual(cache):
    """4th-order FD of phi' against the ODE right side, all samples."""
    for k, h in [(2, 2), (2, 5), (5, 1), (3, 3)]:
        c = cache.cone(k, h)
        n = k + h
        dt = c.ts[1] - c.ts[0]
        dd_fd, _ = fd_derivatives(c.dphis, dt)
        coef = np.zeros_like(c.ts)
        if h > 1:
            coef[1:] += (h - 1) / np.tan(c.ts[1:])
        if k > 1:
            coef -= (k - 1) * np.tan(c.ts)
        resid = dd_fd[1:] + coef[1:] * c.dphis[1:] + (n - 1) * c.phis[1:]
        assert np.max(np.abs(resid)) <= 1e-8 * np.max(np.abs(dd_fd))


def test_normalization_field(cache):
    c = cache.cone(2, 3)
    assert abs(c.normalization * (-1.0 / c.normalization) * -1 - 1) < 1e-15
    assert c.dphis[-1] == pytest.approx(-1.0, abs=1e-12)
    assert abs(c.phis[-1]) <= 1e-10
    assert np.all(c.phis[:-1] > 0)


def test_boundary_data_half_space(cache):
    bd = cs.boundary_data(cache.cone(1, 3))
    assert bd.H == 0.0
    assert all(v == 0.0 for v, _ in bd.kappas.values)
    assert bd.hessian_spectrum.values == ((0.0, 4),)


def test_boundary_data_axisymmetric(cache):
    for n in (4, 6):
        c = cache.cone(n - 1, 1)
        bd = cs.boundary_data(c)
        t = math.tan(c.theta_star)
        assert bd.kappas.values == ((t, n - 2),)
        assert bd.H == pytest.approx((n - 2) * t, rel=1e-14)
        exact = bd.normalized_exact()
        assert exact is not None
        spec, H = exact
        assert H == n - 2 and spec.n == n


def test_boundary_data_22(cache):
    c = cache.cone(2, 2)
    bd = cs.boundary_data(c)
    t = math.tan(c.theta_star)
    assert bd.H == pytest.approx(t - 1 / t, rel=1e-14)
    assert bd.H > 0 and t * t > 1
    assert bd.hessian_spectrum.is_trace_free(1e-12)
    assert bd.normalized_exact() is None


def test_hessian_field_half_space(cache):
    c = cache.cone(1, 4)
    for t in (0.3, 0.9, 1.4):
        spec = cs.hessian_field(c, t)
        assert spec.spectral_radius <= 1e-10


def test_hessian_field_trace_free(cache, rng):
    for k, h in [(2, 2), (3, 4), (6, 1), (2, 5)]:
        c = cache.cone(k, h)
        ts = rng.uniform(0.01 * c.theta_star, 0.99 * c.theta_star, size=1000)
        for t in ts[:1000]:
            spec = cs.hessian_field(c, float(t))
            assert spec.n == k + h
            assert abs(spec.trace) <= 1e-12 * max(spec.spectral_radius, 1e-300)


def test_hessian_field_boundary_limit(cache):
    """t -> theta* reproduces the curvature spectrum of boundary_data."""
    for k, h in [(2, 2), (4, 3), (5, 1)]:
        c = cache.cone(k, h)
        bd = cs.boundary_data(c)
        spec = cs.hessian_field(c, c.theta_star * (1 - 1e-9))
        got = np.sort(spec.expand())
        want = np.sort(bd.hessian_spectrum.expand())
        assert np.max(np.abs(got - want)) <= 1e-6


def test_hessian_field_domain(cache):
    c = cache.cone(2, 2)
    for t in (-0.1, 0.0, c.theta_star, c.theta_star + 0.1):
        with pytest.raises(cs.OutOfDomain):
            cs.hessian_field(c, t)


def test_fd_derivative_stencils_exact_on_quartic():
    ts = np.linspace(0.0, 1.0, 40)
    y = 2 + ts - 3 * ts**2 + 0.5 * ts**3 + 0.25 * ts**4
    d1, d2 = fd_derivatives(y, ts[1] - ts[0])
    np.testing.assert_allclose(d1, 1 - 6 * ts + 1.5 * ts**2 + ts**3, atol=1e-11)
    np.testing.assert_allclose(d2, -6 + 3 * ts + 3 * ts**2, atol=1e-9)


def test_interior_inequality_margins(cache):
    for k, h in [(2, 2), (5, 1), (2, 5)]:
        c = cache.cone(k, h)
        for spec in (cs.FROBENIUS, cs.SIGNED4):
            m = cs.interior_inequality_check(c, spec, 2048)
            assert m.min_margin >= -1e-6 * m.scale
            assert m.guarded < m.grid_n


def test_interior_inequality_half_space(cache):
    with pytest.raises(cs.AllPointsGuarded):
        cs.interior_inequality_check(cache.cone(1, 3), cs.FROBENIUS)


def test_normal_derivative_identity(cache):
    """One-sided FD of w along the interior normal equals -H*B(a)."""
    for k, h in [(2, 2), (3, 4), (5, 1), (2, 4)]:
        c = cache.cone(k, h)
        bd = cs.boundary_data(c)
        for spec, a in ((cs.FROBENIUS, 1), (cs.SIGNED4, 4)):
            res = cs.boundary_B(bd.hessian_spectrum, bd.H, a)
            target = bd.H * float(res.B)
            got = cs.weight_boundary_ratio(c, spec)
            assert abs(got + target) <= 1e-4 * abs(target)


def test_hermite_interpolation_accuracy(cache):
    from conestab import _kernels as K
    from conestab.cones import _series_start

    c = cache.cone(2, 3)
    q = -(c.n - 1.0)
    t0, f0, g0 = _series_start(2, 3, q)
    probe = np.array([0.37 * c.theta_star, 0.731 * c.theta_star])
    f_ref, g_ref = K.angular_dense(2, 3, q, t0, f0, g0, probe, 4096)
    f_ref, g_ref = f_ref * c.normalization, g_ref * c.normalization
    assert np.max(np.abs(c.phi(probe) - f_ref)) <= 1e-10
    assert np.max(np.abs(c.dphi(probe) - g_ref)) <= 1e-8


def test_cone_json_roundtrip(cache, tmp_path):
    c = cache.cone(2, 2)
    path = tmp_path / "c22.cone.json"
    c.write(path)
    data = json.loads(path.read_text())
    assert set(data) == {"k", "h", "theta_star", "normalization", "samples"}
    assert len(data["samples"]) == len(c.ts)
    back = cs.ConeSolution.from_json(data)
    assert back.theta_star == c.theta_star
    np.testing.assert_array_equal(back.phis, c.phis)
    assert back.phi(0.7) == pytest.approx(float(c.phi(0.7)), rel=1e-15)
