"""Stability of a cone via the Robin eigenvalue of its cross-section.

The quadratic form (int |grad psi|^2 - int_bdry H psi^2) / int psi^2 on the
cross-section reduces, for symmetric psi = psi(t), to a weighted problem on
[0, theta*] with density J(t) = cos^(k-1)t sin^(h-1)t:

    (J psi')' = Lambda J psi,   psi'(0) = 0,   psi'(theta*) = H psi(theta*),

where -Lambda is the infimum of the quotient.  A cone is unstable exactly
when Lambda exceeds (n-2)^2/4: the radial Euler equation
f'' + (n-1) f'/r + beta f/r^2 = 0 then admits oscillating solutions for some
beta < Lambda, and v = f(r) psi(t) on an annulus between consecutive zeros
of f makes the stability form negative.  Below the threshold, r^gamma psi
with gamma = -(n-2)/2 + sqrt((n-2)^2/4 - Lambda) is a positive solution of
the linearized problem, and no certificate exists.

Two independent eigenvalue routes are kept: a P1 finite-element tridiagonal
discretization (Sturm bisection for the lowest eigenvalue, Richardson
extrapolated) and shooting on the Robin mismatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .boundary import boundary_B, criterion37, subsolution_window
from .cones import ConeSolution, _hermite, _series_start, boundary_data, density, fd_derivatives
from .errors import MarginTooSmall, NoConvergence, StableCone, UnstableCone, UsageError

MARGINAL_TOL = 1e-7


def stability_threshold(n: int) -> float:
    return (n - 2) ** 2 / 4.0


def mean_curvature(cone: ConeSolution) -> float:
    if cone.is_half_space:
        return 0.0
    return (cone.k - 1) * math.tan(cone.theta_star) - (cone.h - 1) / math.tan(
        cone.theta_star
    )


@dataclass(frozen=True)
class SpectralResult:
    """Lowest Robin eigenvalue (negated) with the ground-state profile."""

    Lambda: float
    ts: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray | None
    method: str
    grid_n: int
    convergence_estimate: float
    H: float
    k: int
    h: int

    @property
    def n(self) -> int:
        return self.k + self.h


def _fem_tridiag(cone: ConeSolution, N: int):
    k, h = cone.k, cone.h
    theta = cone.theta_star
    H = mean_curvature(cone)
    dt = theta / N
    ts = np.linspace(0.0, theta, N + 1)
    Jm = density(k, h, ts[:-1] + 0.5 * dt)
    diag = np.empty(N + 1)
    diag[1:-1] = (Jm[:-1] + Jm[1:]) / dt
    diag[0] = Jm[0] / dt
    diag[-1] = Jm[-1] / dt - H * density(k, h, theta)
    off = -Jm / dt
    mass = np.empty(N + 1)
    mass[1:-1] = 0.5 * dt * (Jm[:-1] + Jm[1:])
    mass[0] = 0.5 * dt * Jm[0]
    mass[-1] = 0.5 * dt * Jm[-1]
    return ts, diag, off, mass


def _fd_eigenpair(cone: ConeSolution, N: int):
    from scipy.linalg import solve_banded

    ts, diag, off, mass = _fem_tridiag(cone, N)
    s = 1.0 / np.sqrt(mass)
    dd = diag * s * s
    ee = off * s[:-1] * s[1:]
    nu = kernels.tridiag_smallest_eig(dd, ee)

    # inverse iteration; the shift sits strictly below nu but far from nu_2,
    # so the ill-conditioned solves amplify exactly the wanted eigendirection
    norm_t = float(np.max(np.abs(dd)) + 2.0 * np.max(np.abs(ee)))
    shift = nu - (1e-6 * max(1.0, abs(nu)) + 1e-12 * norm_t)
    ab = np.zeros((3, N + 1))
    ab[0, 1:] = ee
    ab[1, :] = dd - shift
    ab[2, :-1] = ee
    v = np.ones(N + 1)
    for _ in range(4):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    psi = s * v
    if psi.sum() < 0:
        psi = -psi
    psi /= np.max(np.abs(psi))
    return -nu, ts, psi


def _shoot_mismatch(cone: ConeSolution, mu: float, steps: int, H: float) -> float:
    t0, f0, g0 = _series_start(cone.k, cone.h, mu)
    f, g = kernels.angular_integrate(cone.k, cone.h, mu, t0, f0, g0, cone.theta_star, steps)
    return g / f - H


def rayleigh_lambda(cone: ConeSolution, method: str = "fd", grid_n: int = 4096) -> SpectralResult:
    """Compute Lambda by finite differences or shooting.

    The finite-difference route assembles the P1 tridiagonal pencil at
    grid_n/2 and grid_n and Richardson-extrapolates; shooting brackets the
    Robin mismatch psi'/psi - H in the separation constant and solves it
    with Brent's method.
    """
    if grid_n < 64:
        raise UsageError("grid_n must be at least 64")
    H = mean_curvature(cone)
    if method == "fd":
        lam_c, _, _ = _fd_eigenpair(cone, grid_n // 2)
        lam_f, ts, psi = _fd_eigenpair(cone, grid_n)
        lam = lam_f + (lam_f - lam_c) / 3.0
        conv = abs(lam_f - lam_c) / 3.0 + 1e-14
        return SpectralResult(
            Lambda=lam, ts=ts, psi=psi, dpsi=None, method="finite-difference",
            grid_n=grid_n, convergence_estimate=conv, H=H, k=cone.k, h=cone.h,
        )
    if method != "shooting":
        raise UsageError(f"unknown method {method!r}")

    steps = max(256, grid_n // 4)
    ts = np.linspace(0.0, cone.theta_star, grid_n)
    if H <= 1e-13:
        psi = np.ones(grid_n)
        return SpectralResult(
            Lambda=0.0, ts=ts, psi=psi, dpsi=np.zeros(grid_n), method="shooting",
            grid_n=grid_n, convergence_estimate=0.0, H=H, k=cone.k, h=cone.h,
        )

    from scipy.optimize import brentq

    lo = 0.0  # mismatch at 0 is exactly -H < 0
    hi = max(1.0, stability_threshold(cone.n))
    fhi = _shoot_mismatch(cone, hi, steps, H)
    while fhi <= 0.0:
        hi *= 2.0
        if hi > 1e8:
            raise NoConvergence(f"no Robin-mismatch bracket for C({cone.k},{cone.h})")
        fhi = _shoot_mismatch(cone, hi, steps, H)
    lam = brentq(lambda mu: _shoot_mismatch(cone, mu, steps, H), lo, hi,
                 xtol=1e-13, rtol=8.9e-16)
    lam_coarse = brentq(lambda mu: _shoot_mismatch(cone, mu, steps // 2, H), lo, hi,
                        xtol=1e-13, rtol=8.9e-16)
    conv = abs(lam - lam_coarse) + 1e-13

    t0, f0, g0 = _series_start(cone.k, cone.h, lam)
    if cone.h == 1:
        psi, dpsi = kernels.angular_dense(cone.k, cone.h, lam, t0, f0, g0, ts, 2)
    else:
        psi = np.empty(grid_n)
        dpsi = np.empty(grid_n)
        psi[0], dpsi[0] = 1.0, 0.0
        psi[1:], dpsi[1:] = kernels.angular_dense(cone.k, cone.h, lam, t0, f0, g0, ts[1:], 2)
    scale = np.max(np.abs(psi))
    psi = psi / scale
    dpsi = dpsi / scale
    return SpectralResult(
        Lambda=lam, ts=ts, psi=psi, dpsi=dpsi, method="shooting",
        grid_n=grid_n, convergence_estimate=conv, H=H, k=cone.k, h=cone.h,
    )


@dataclass(frozen=True)
class PositiveSolution:
    """Positive linearized solution r^gamma psi(t) for a stable cone."""

    decay_exponent: float
    ts: np.ndarray
    psi: np.ndarray
    residual: float
    Lambda: float


def positive_solution(
    cone: ConeSolution, spectral: SpectralResult | None = None, grid_n: int = 4096
) -> PositiveSolution:
    """Construct the positive solution; raises UnstableCone above threshold.

    The residual reported is the larger of the interior defect
    |(J psi')' - Lambda J psi| (independent finite differences on the stored
    samples) and the Robin mismatch, both relative to the problem scale.
    """
    if spectral is None:
        spectral = rayleigh_lambda(cone, "shooting", grid_n)
    n = cone.n
    thr = stability_threshold(n)
    lam = spectral.Lambda
    if lam > thr + MARGINAL_TOL:
        raise UnstableCone(
            f"C({cone.k},{cone.h}) has Lambda = {lam:.9g} > {thr} + tol; no positive solution"
        )
    gamma = -(n - 2) / 2.0 + math.sqrt(max(thr - lam, 0.0))

    ts, psi, H = spectral.ts, spectral.psi, spectral.H
    dt = ts[1] - ts[0]
    d1, d2 = fd_derivatives(psi, dt)
    coef = np.zeros_like(ts)
    if cone.h > 1:
        coef[1:] += (cone.h - 1) / np.tan(ts[1:])
    if cone.k > 1:
        coef -= (cone.k - 1) * np.tan(ts)
    J = density(cone.k, cone.h, ts)
    defect = J[1:-1] * (d2[1:-1] + coef[1:-1] * d1[1:-1] - lam * psi[1:-1])
    scale = max(1.0, lam) * float(np.max(J))
    robin = abs(d1[-1] - H * psi[-1]) / max(1.0, H)
    residual = max(float(np.max(np.abs(defect))) / scale, robin)
    return PositiveSolution(
        decay_exponent=gamma, ts=ts, psi=psi, residual=residual, Lambda=lam
    )


@dataclass(frozen=True)
class EulerZeros:
    oscillates: bool
    spacing: float | None


def euler_zeros(alpha: float, beta: float) -> EulerZeros:
    """Oscillation test for f'' + alpha f'/r + beta f/r^2 = 0.

    Solutions oscillate around zero iff 4 beta > (alpha-1)^2, with zeros
    equally spaced by pi/sqrt(beta - (alpha-1)^2/4) in log r.
    """
    disc = 4.0 * beta - (alpha - 1.0) ** 2
    if disc <= 0.0:
        return EulerZeros(oscillates=False, spacing=None)
    return EulerZeros(oscillates=True, spacing=math.pi / math.sqrt(disc / 4.0))


def euler_zero_spacing_numeric(alpha: float, beta: float, step: float = 1e-4) -> float:
    """Measured log-r spacing of consecutive zeros of the radial factor.

    Integrates the constant-coefficient form g'' + (alpha-1) g' + beta g = 0
    (s = log r) with RK4 and bisects each sign change.
    """
    a1 = alpha - 1.0
    zeros = []
    s, g, dg = 0.0, 1.0, 0.0

    def rk4(s, g, dg, dt):
        def f(gv, dgv):
            return dgv, -a1 * dgv - beta * gv

        k1g, k1d = f(g, dg)
        k2g, k2d = f(g + 0.5 * dt * k1g, dg + 0.5 * dt * k1d)
        k3g, k3d = f(g + 0.5 * dt * k2g, dg + 0.5 * dt * k2d)
        k4g, k4d = f(g + dt * k3g, dg + dt * k3d)
        return (
            g + dt * (k1g + 2 * k2g + 2 * k3g + k4g) / 6.0,
            dg + dt * (k1d + 2 * k2d + 2 * k3d + k4d) / 6.0,
        )

    max_s = 200.0
    while s < max_s and len(zeros) < 2:
        g1, dg1 = rk4(s, g, dg, step)
        if (g > 0.0) != (g1 > 0.0):
            anchor = (s, g, dg)
            lo, hi = s, s + step
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                gm, _ = rk4(anchor[0], anchor[1], anchor[2], mid - anchor[0])
                if (g > 0.0) != (gm > 0.0):
                    hi = mid
                else:
                    lo = mid
            zeros.append(0.5 * (lo + hi))
        s, g, dg = s + step, g1, dg1
    if len(zeros) < 2:
        raise NoConvergence("radial factor produced fewer than two zeros")
    return zeros[1] - zeros[0]


@dataclass(frozen=True)
class Certificate:
    """Explicit destabilizing perturbation v = f(r) psi(t) on an annulus."""

    k: int
    h: int
    beta: float
    omega: float
    r1: float
    r2: float
    Q_value: float
    floor: float
    refinement_history: tuple
    Lambda: float

    @property
    def n(self) -> int:
        return self.k + self.h

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "h": self.h,
            "n": self.n,
            "Lambda": self.Lambda,
            "beta": self.beta,
            "omega": self.omega,
            "annulus": [self.r1, self.r2],
            "Q_value": self.Q_value,
            "floor": self.floor,
            "refinement_history": [[int(q), float(v)] for q, v in self.refinement_history],
        }


def _gauss_panels(a: float, b: float, panels: int, order: int = 8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * x[None, :]).ravel()
    weights = np.tile(half * w, panels)
    return nodes, weights


def _quadrature_Q(cone, spectral, beta, omega, quad_n, t_panels):
    n = cone.n
    m = n - 2
    H = spectral.H
    theta = cone.theta_star

    tq, tw = _gauss_panels(0.0, theta, t_panels, 8)
    psi = _hermite(spectral.ts, spectral.psi, spectral.dpsi, tq)
    # psi'' from the ODE lets the stored (psi, psi') pair interpolate psi'
    coef = np.zeros_like(spectral.ts)
    if cone.h > 1:
        coef[1:] += (cone.h - 1) / np.tan(spectral.ts[1:])
    if cone.k > 1:
        coef -= (cone.k - 1) * np.tan(spectral.ts)
    ddpsi = spectral.Lambda * spectral.psi - coef * spectral.dpsi
    if cone.h > 1:
        ddpsi[0] = spectral.Lambda * spectral.psi[0] / cone.h
    dpsi = _hermite(spectral.ts, spectral.dpsi, ddpsi, tq)
    J = density(cone.k, cone.h, tq)
    It1 = float(np.sum(tw * psi * psi * J))
    It2 = float(np.sum(tw * dpsi * dpsi * J))
    bnd = H * density(cone.k, cone.h, theta) * float(spectral.psi[-1]) ** 2

    s_half = math.pi / (2.0 * omega)
    sq, sw = _gauss_panels(-s_half, s_half, quad_n, 8)
    ems = np.exp(m * sq)
    g = np.exp(-0.5 * m * sq) * np.cos(omega * sq)
    gp = np.exp(-0.5 * m * sq) * (-0.5 * m * np.cos(omega * sq) - omega * np.sin(omega * sq))
    Is1 = float(np.sum(sw * gp * gp * ems))
    Is2 = float(np.sum(sw * g * g * ems))

    Q = It1 * Is1 + (It2 - bnd) * Is2
    denom = It1 * Is2
    return Q, denom


def instability_certificate(
    cone: ConeSolution,
    quad_n: int = 64,
    spectral: SpectralResult | None = None,
    grid_n: int = 4096,
) -> Certificate:
    """Verified negative stability form for an unstable cone.

    beta is the midpoint of (threshold, Lambda); the annulus spans one
    oscillation of r^{-(n-2)/2} cos(omega log r), so r2/r1 = exp(pi/omega).
    Requires Q < 0 with margin at least half the separation (Lambda-beta)
    times the quadrature of v^2/r^2, and a sign stable under refinement.
    """
    if spectral is None or spectral.dpsi is None:
        spectral = rayleigh_lambda(cone, "shooting", grid_n)
    n = cone.n
    thr = stability_threshold(n)
    lam = spectral.Lambda
    if lam <= thr + MARGINAL_TOL:
        raise StableCone(
            f"C({cone.k},{cone.h}) has Lambda = {lam:.9g} <= {thr} + tol; nothing to certify"
        )
    beta = 0.5 * (lam + thr)
    omega = math.sqrt(beta - thr)
    s_half = math.pi / (2.0 * omega)
    if s_half * max(1, n - 2) > 600.0:
        raise MarginTooSmall(
            f"Lambda - threshold = {lam - thr:.3g}: the one-period annulus "
            "exceeds double-precision range"
        )
    r1, r2 = math.exp(-s_half), math.exp(s_half)

    Q1, _ = _quadrature_Q(cone, spectral, beta, omega, quad_n, 256)
    Q2, denom2 = _quadrature_Q(cone, spectral, beta, omega, 2 * quad_n, 512)
    floor = 0.5 * (lam - beta) * denom2
    if not (Q1 < 0.0 and Q2 < 0.0):
        raise MarginTooSmall(f"stability form not negative: {Q1}, {Q2}")
    if abs(Q2 - Q1) > 0.01 * abs(Q2) or abs(Q2) < floor:
        raise MarginTooSmall(
            f"certificate margin unstable under refinement: {Q1} -> {Q2}, floor {floor}"
        )
    return Certificate(
        k=cone.k, h=cone.h, beta=beta, omega=omega, r1=r1, r2=r2,
        Q_value=Q2, floor=floor, refinement_history=((quad_n, Q1), (2 * quad_n, Q2)),
        Lambda=lam,
    )


@dataclass(frozen=True)
class StabilityReport:
    """Full spectral + subsolution stability analysis of one cone."""

    k: int
    h: int
    n: int
    theta_star: float
    H: float
    Lambda: float
    threshold: float
    verdict: str
    L: object
    B_a4: object
    windows: dict
    criterion37_fired: bool
    convergence_estimate: float
    lambda_fd: float
    lambda_shooting: float
    flags: dict
    consistent: bool

    def to_json(self) -> dict:
        from .boundary import _num_json

        return {
            "k": self.k,
            "h": self.h,
            "n": self.n,
            "theta_star": self.theta_star,
            "H": self.H,
            "Lambda": self.Lambda,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "L": _num_json(self.L),
            "B_a4": _num_json(self.B_a4),
            "windows": {name: w.to_json() for name, w in self.windows.items()},
            "criterion37": self.criterion37_fired,
            "convergence_estimate": self.convergence_estimate,
            "lambda_fd": self.lambda_fd,
            "lambda_shooting": self.lambda_shooting,
            "flags": self.flags,
            "consistent": self.consistent,
        }


def stability_verdict(
    cone: ConeSolution,
    tol: float = MARGINAL_TOL,
    grid_n: int = 4096,
    fd: SpectralResult | None = None,
    shooting: SpectralResult | None = None,
    signed_weights: tuple = (1, 4),
) -> StabilityReport:
    """Spectral verdict cross-checked against the subsolution criteria.

    verdict is 'unstable' when Lambda > (n-2)^2/4 + tol, 'stable' below the
    band, 'marginal' inside it.  Consistency requires that the dimensional
    window criterion or a strict nonempty exponent window implies the
    spectral verdict 'unstable'.  Precomputed spectral results may be
    passed in.
    """
    n = cone.n
    thr = stability_threshold(n)
    fd = fd or rayleigh_lambda(cone, "fd", grid_n)
    sh = shooting or rayleigh_lambda(cone, "shooting", grid_n)
    lam = sh.Lambda

    if lam > thr + tol:
        verdict = "unstable"
    elif lam < thr - tol:
        verdict = "stable"
    else:
        verdict = "marginal"

    windows: dict = {}
    Lval = None
    B4val = None
    crit = False
    if not cone.is_half_space:
        bd = boundary_data(cone)
        exact = bd.normalized_exact()
        spec_in, H_in = exact if exact is not None else (bd.hessian_spectrum, bd.H)
        weights = dict.fromkeys((1, 4))
        weights.update(dict.fromkeys(signed_weights))
        for a in weights:
            res = boundary_B(spec_in, H_in, a)
            name = "frobenius" if a == 1 else f"signed:{a}"
            windows[name] = subsolution_window(res, n)
            if a == 1:
                Lval = res.L
            if a == 4:
                B4val = res.B
        crit = criterion37(n, Lval)

    flags = {
        "methods_agree": abs(fd.Lambda - sh.Lambda) <= 1e-6 * max(1.0, lam),
        "lambda_positive": (lam > 0) if sh.H > 1e-13 else abs(lam) <= 1e-6,
        "subsolution_implies_spectral": True,
    }
    subsolution_fired = crit or any(w.nonempty and w.strict for w in windows.values())
    if subsolution_fired and verdict != "unstable":
        flags["subsolution_implies_spectral"] = False

    return StabilityReport(
        k=cone.k, h=cone.h, n=n, theta_star=cone.theta_star, H=sh.H,
        Lambda=lam, threshold=thr, verdict=verdict, L=Lval, B_a4=B4val,
        windows=windows, criterion37_fired=crit,
        convergence_estimate=max(fd.convergence_estimate, sh.convergence_estimate),
        lambda_fd=fd.Lambda, lambda_shooting=sh.Lambda,
        flags=flags, consistent=all(flags.values()),
    )
