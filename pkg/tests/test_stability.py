import math

import numpy as np
import pytest

import conestab as cs
from conestab.stability import MARGINAL_TOL, _quadrature_Q
from conftest import cone_matrix
from goldens import GOLDEN


def test_half_space_lambda_zero(cache):
    for method in ("fd", "shooting"):
        r = cache.spectral(1, 3, method)
        assert abs(r.Lambda) <= 1e-6
        assert np.max(r.psi) - np.min(r.psi) <= 1e-6


def test_lambda_goldens_both_methods(cache):
    for (k, h), (_, _, lam) in GOLDEN.items():
        sh = cache.spectral(k, h, "shooting")
        fd = cache.spectral(k, h, "fd")
        assert sh.Lambda == pytest.approx(lam, abs=5e-9 * max(1, lam))
        assert abs(fd.Lambda - sh.Lambda) <= 1e-6 * max(1.0, sh.Lambda)


def test_lambda_positive_when_curved(cache):
    for k, h in cone_matrix():
        if k == 1:
            continue
        r = cache.spectral(k, h, "shooting")
        assert r.Lambda > 0
        assert r.H > 0


def test_ground_state_positive_normalized(cache):
    for k, h in [(2, 2), (5, 1), (3, 4)]:
        for method in ("fd", "shooting"):
            r = cache.spectral(k, h, method)
            assert np.min(r.psi) > 0
            assert np.max(np.abs(r.psi)) == pytest.approx(1.0, abs=1e-12)


def test_rayleigh_usage():
    with pytest.raises(cs.UsageError):
        cs.rayleigh_lambda(cs.solve_cross_section(2, 2), "fd", grid_n=32)
    with pytest.raises(cs.UsageError):
        cs.rayleigh_lambda(cs.solve_cross_section(2, 2), "secant")


def test_verdicts_low_dimensions(cache):
    assert cache.verdict(1, 3).verdict == "stable"
    for k, h in [(2, 1), (2, 2), (3, 1), (2, 3), (4, 1), (5, 1)]:
        rep = cache.verdict(k, h)
        assert rep.verdict == "unstable"
        assert rep.consistent, rep.flags


def test_report_consistency_full_matrix(cache):
    for k, h in cone_matrix():
        rep = cache.verdict(k, h)
        assert rep.consistent, (k, h, rep.flags)
        assert rep.threshold == (k + h - 2) ** 2 / 4


def test_axisymmetric_chain(cache):
    """criterion (37) strict for n=3..5; n=6 closes the window at 4/5, strict."""
    from fractions import Fraction

    for n in (3, 4, 5):
        rep = cache.verdict(n - 1, 1)
        assert rep.criterion37_fired
        assert rep.verdict == "unstable"
    rep6 = cache.verdict(5, 1)
    assert not rep6.criterion37_fired
    win = rep6.windows["frobenius"]
    assert win.alpha_min == win.alpha_max == Fraction(4, 5)
    assert win.strict and rep6.verdict == "unstable"


def test_subsolution_implies_spectral(cache):
    """Any strict nonempty window forces Lambda > threshold (checked at 1e-8)."""
    for k, h in cone_matrix():
        if k == 1:
            continue
        rep = cache.verdict(k, h)
        fired = rep.criterion37_fired or any(
            w.nonempty and w.strict for w in rep.windows.values()
        )
        if fired:
            assert rep.Lambda > rep.threshold + 1e-8


def test_positive_solution_half_space(cache):
    sol = cs.positive_solution(cache.cone(1, 3), cache.spectral(1, 3, "shooting"))
    assert sol.decay_exponent == pytest.approx(0.0, abs=1e-7)
    assert sol.residual <= 1e-9
    assert np.max(sol.psi) - np.min(sol.psi) <= 1e-6


def test_positive_solution_stable_n7(cache):
    sol = cs.positive_solution(cache.cone(3, 4), cache.spectral(3, 4, "shooting"))
    n = 7
    lam = cache.spectral(3, 4, "shooting").Lambda
    want = -(n - 2) / 2 + math.sqrt((n - 2) ** 2 / 4 - lam)
    assert sol.decay_exponent == pytest.approx(want, rel=1e-12)
    assert sol.residual <= 1e-6
    assert np.min(sol.psi) > 0


def test_positive_solution_rejects_unstable(cache):
    with pytest.raises(cs.UnstableCone):
        cs.positive_solution(cache.cone(2, 2), cache.spectral(2, 2, "shooting"))


def test_euler_zeros_closed_form():
    n = 5
    r = cs.euler_zeros(n - 1, (n - 2) ** 2 / 4.0)
    assert not r.oscillates and r.spacing is None
    r = cs.euler_zeros(3.0, 2.0)
    assert r.oscillates
    assert r.spacing == pytest.approx(math.pi, rel=1e-15)


def test_euler_zeros_numeric_matches():
    from conestab.stability import euler_zero_spacing_numeric

    for alpha, beta in ((3.0, 2.0), (6.0, 6.26), (2.0, 5.0)):
        want = cs.euler_zeros(alpha, beta).spacing
        got = euler_zero_spacing_numeric(alpha, beta)
        assert abs(got - want) <= 1e-8


def test_certificate_22(cache):
    cone = cache.cone(2, 2)
    sp = cache.spectral(2, 2, "shooting")
    cert = cs.instability_certificate(cone, quad_n=64, spectral=sp)
    lam = sp.Lambda
    assert cert.beta == pytest.approx((lam + 1.0) / 2, rel=1e-12)
    assert cert.omega == pytest.approx(math.sqrt(cert.beta - 1.0), rel=1e-12)
    assert cert.Q_value < 0
    assert abs(cert.Q_value) >= cert.floor
    assert cert.r2 / cert.r1 == pytest.approx(math.exp(math.pi / cert.omega), rel=1e-12)
    (q1, Q1), (q2, Q2) = cert.refinement_history
    assert q2 == 2 * q1 and Q1 < 0 and Q2 < 0
    assert abs(Q2 - Q1) <= 0.01 * abs(Q2)


def test_certificate_rejects_stable(cache):
    with pytest.raises(cs.StableCone):
        cs.instability_certificate(cache.cone(1, 3), spectral=cache.spectral(1, 3, "shooting"))
    with pytest.raises(cs.StableCone):
        cs.instability_certificate(cache.cone(3, 4), spectral=cache.spectral(3, 4, "shooting"))


def test_certificate_quadrature_matches_closed_form(cache):
    """Integration by parts collapses Q to (beta - Lambda) * int v^2/r^2;
    the tensor quadrature must reproduce that value independently."""
    for k, h in [(2, 1), (2, 2), (5, 1)]:
        sp = cache.spectral(k, h, "shooting")
        thr = cs.stability_threshold(k + h)
        beta = 0.5 * (sp.Lambda + thr)
        omega = math.sqrt(beta - thr)
        Q, denom = _quadrature_Q(cache.cone(k, h), sp, beta, omega, 64, 256)
        closed = (beta - sp.Lambda) * denom
        assert Q == pytest.approx(closed, rel=1e-9)


def test_certificate_quadratic_scaling(cache):
    """Q scales by c^2 when the perturbation profile scales by c (sign exact)."""
    from dataclasses import replace

    cone = cache.cone(2, 2)
    sp = cache.spectral(2, 2, "shooting")
    beta = 0.5 * (sp.Lambda + 1.0)
    omega = math.sqrt(beta - 1.0)
    Q1, d1 = _quadrature_Q(cone, sp, beta, omega, 32, 128)
    sp2 = replace(sp, psi=2.0 * sp.psi, dpsi=2.0 * sp.dpsi)
    Q4, d4 = _quadrature_Q(cone, sp2, beta, omega, 32, 128)
    assert Q4 == pytest.approx(4.0 * Q1, rel=1e-13)
    assert d4 == pytest.approx(4.0 * d1, rel=1e-13)
    assert (Q1 < 0) == (Q4 < 0)


def test_boundary_functional_goldens(cache):
    """Frozen L and B(4) for the benchmark cone C(2,2)."""
    rep = cache.verdict(2, 2)
    assert float(rep.L) == pytest.approx(2.3786535176676367, abs=1e-11)
    assert float(rep.B_a4) == pytest.approx(2.470235648426005, abs=1e-11)


def test_lstar_deterministic():
    a = cs.lstar_optimize(4)
    b = cs.lstar_optimize(4)
    assert a.sup == b.sup and a.witness == b.witness


def test_translation_zero_mode_in_first_sector(cache):
    """Differentiating u along an ambient axis solves the linearized problem,
    so the first angular sector of the Robin pencil has a zero eigenvalue.
    This pins H, J and the boundary condition against each other."""
    from conestab import _kernels as kernels
    from conestab.stability import _fem_tridiag

    for k, h in [(2, 2), (3, 4), (2, 5)]:
        cone = cache.cone(k, h)
        vals = []
        for N in (2048, 4096):
            ts, diag, off, mass = _fem_tridiag(cone, N)
            # sector-1 potential (k-1)/cos^2 t from the first y-sphere harmonic
            pot = (k - 1) / np.cos(ts) ** 2
            dd = diag + mass * pot
            s = 1.0 / np.sqrt(mass)
            vals.append(kernels.tridiag_smallest_eig(dd * s * s, off * s[:-1] * s[1:]))
        nu = vals[1] + (vals[1] - vals[0]) / 3.0
        assert abs(nu) <= 1e-6, (k, h, nu)
        # the zero mode itself is the radial-derivative profile of u
        from conestab.cones import fd_derivatives

        g = cone.phis * np.cos(cone.ts) - cone.dphis * np.sin(cone.ts)
        assert np.min(g) > 0
        dg, _ = fd_derivatives(g, cone.ts[1] - cone.ts[0])
        H = cache.spectral(k, h, "shooting").H
        assert abs(dg[-1] - H * g[-1]) <= 1e-6 * abs(H * g[-1])


def test_certificate_refuses_overflow_margin(cache):
    """Barely-supercritical Lambda cannot be certified at double precision."""
    from dataclasses import replace

    sp = cache.spectral(2, 2, "shooting")
    thr = cs.stability_threshold(4)
    near = replace(sp, Lambda=thr + 5e-7)
    with pytest.raises(cs.MarginTooSmall):
        cs.instability_certificate(cache.cone(2, 2), spectral=near)


def test_window_json_handles_unbounded_endpoint():
    """B <= 0 leaves the exponent unconstrained; JSON must stay valid."""
    import json
    from fractions import Fraction

    from conestab.boundary import BoundaryFunctionalResult

    bd = BoundaryFunctionalResult(
        L=Fraction(-1), B=Fraction(-1), H=Fraction(1), a=Fraction(1),
        n=5, case=1, equality_case=False,
    )
    win = cs.subsolution_window(bd, 5)
    assert win.nonempty and win.alpha_max == math.inf
    payload = json.loads(json.dumps(win.to_json()))
    assert payload["alpha_max"] == "inf"


def test_dichotomy_matrix(cache):
    """Exactly one of certificate/positive-solution succeeds per cone."""
    for k, h in cone_matrix():
        cone = cache.cone(k, h)
        sp = cache.spectral(k, h, "shooting")
        thr = cs.stability_threshold(k + h)
        if abs(sp.Lambda - thr) <= MARGINAL_TOL:
            continue
        cert_ok = sol_ok = False
        try:
            cs.instability_certificate(cone, quad_n=32, spectral=sp)
            cert_ok = True
        except cs.StableCone:
            pass
        try:
            cs.positive_solution(cone, sp)
            sol_ok = True
        except cs.UnstableCone:
            pass
        assert cert_ok != sol_ok, (k, h, sp.Lambda, thr)
