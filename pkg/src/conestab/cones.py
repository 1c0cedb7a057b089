"""Cone cross-section profiles and their Hessian eigenvalue fields.

A degree-one homogeneous harmonic u = r*phi(t) on the cone
C(k,h) = {arctan(|z|/|y|) < theta}, y in R^k, z in R^h, reduces to

    phi'' + ((h-1)cot t - (k-1)tan t) phi' + (n-1) phi = 0,  phi'(0) = 0,

with the free-boundary angle theta* at the first zero of phi and the
gradient normalization |phi'(theta*)| = 1.  Integration starts from the
two-term series phi = 1 - ((n-1)/(2h)) t^2 at t = 1e-4 (the cot term
forbids starting at 0 when h >= 2); the first zero is bracketed on the
dense RK4 output and refined by bisection.

Profiles are stored as 4096 uniform (t, phi, phi') samples with cubic
Hermite interpolation, so downstream consumers get C^1 access at the
integrator's accuracy order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as kernels
from .errors import AllPointsGuarded, DegenerateBoundary, NoZeroFound, OutOfDomain, UsageError
from .weights import DELTA_SMOOTH, Spectrum, WeightSpec

SERIES_T0 = 1e-4
PROFILE_SAMPLES = 4096
HALF_PI = math.pi / 2.0


def _series_start(k: int, h: int, q: float):
    if h == 1:
        return 0.0, 1.0, 0.0
    c = q / (2.0 * h)
    t0 = SERIES_T0
    return t0, 1.0 + c * t0 * t0, 2.0 * c * t0


def density(k: int, h: int, t):
    """Cross-section volume density J(t) = cos^(k-1) t * sin^(h-1) t."""
    t = np.asarray(t, dtype=float)
    return np.cos(t) ** (k - 1) * np.sin(t) ** (h - 1)


def _hermite(ts, ys, dys, t):
    dt = ts[1] - ts[0]
    x = np.clip(np.asarray(t, dtype=float), ts[0], ts[-1])
    i = np.minimum(((x - ts[0]) / dt).astype(int), len(ts) - 2)
    s = (x - ts[i]) / dt
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * ys[i] + h10 * dt * dys[i] + h01 * ys[i + 1] + h11 * dt * dys[i + 1]


@dataclass(frozen=True)
class ConeSolution:
    """Normalized cross-section profile of C(k,h)."""

    k: int
    h: int
    theta_star: float
    ts: np.ndarray
    phis: np.ndarray
    dphis: np.ndarray
    normalization: float

    @property
    def n(self) -> int:
        return self.k + self.h

    @property
    def is_half_space(self) -> bool:
        return self.k == 1

    def _ddphis(self) -> np.ndarray:
        # phi'' from the ODE; the t=0 limit uses phi''(0) = -(n-1) phi(0)/h
        k, h, n = self.k, self.h, self.n
        t = self.ts
        c = np.zeros_like(t)
        if h > 1:
            c[1:] += (h - 1) / np.tan(t[1:])
        if k > 1:
            c -= (k - 1) * np.tan(t)
        dd = -(n - 1) * self.phis - c * self.dphis
        dd[0] = -(n - 1) * self.phis[0] / (h if h > 1 else 1) - (
            0.0 if h > 1 else c[0] * self.dphis[0]
        )
        return dd

    def phi(self, t):
        return _hermite(self.ts, self.phis, self.dphis, t)

    def dphi(self, t):
        return _hermite(self.ts, self.dphis, self._ddphis(), t)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "h": self.h,
            "theta_star": self.theta_star,
            "normalization": self.normalization,
            "samples": [
                [float(t), float(p), float(dp)]
                for t, p, dp in zip(self.ts, self.phis, self.dphis)
            ],
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, data: dict) -> "ConeSolution":
        samples = np.asarray(data["samples"], dtype=float)
        return cls(
            k=int(data["k"]),
            h=int(data["h"]),
            theta_star=float(data["theta_star"]),
            ts=samples[:, 0],
            phis=samples[:, 1],
            dphis=samples[:, 2],
            normalization=float(data["normalization"]),
        )


def solve_cross_section(
    k: int, h: int, tol: float = 1e-10, grid: int = PROFILE_SAMPLES, hunt_steps: int = 4096
) -> ConeSolution:
    """Shoot the profile ODE, locate theta*, and return the normalized profile."""
    if k < 1 or h < 1 or k + h < 3:
        raise UsageError(f"need k >= 1, h >= 1, k+h >= 3, got ({k}, {h})")
    if grid < 16:
        raise UsageError("grid too small")
    n = k + h
    q = -(n - 1.0)
    t0, f0, g0 = _series_start(k, h, q)
    t_max = HALF_PI + 0.2 if k == 1 else HALF_PI - 1e-3

    bracket = kernels.angular_hunt(k, h, q, t0, f0, g0, t_max, hunt_steps)
    if bracket is None:
        raise NoZeroFound(
            f"profile of C({k},{h}) did not cross zero before t = {t_max:.6f}"
        )
    t_lo, f_lo, g_lo, t_hi, f_hi, g_hi = bracket

    width_target = max(1e-15, min(tol, 1e-12))
    anchor = (t_lo, f_lo, g_lo)
    while t_hi - t_lo > width_target:
        tm = 0.5 * (t_lo + t_hi)
        fm, gm = kernels.angular_integrate(k, h, q, anchor[0], anchor[1], anchor[2], tm, 1)
        if (f_lo > 0.0) != (fm > 0.0):
            t_hi = tm
        else:
            t_lo, f_lo = tm, fm
    theta = 0.5 * (t_lo + t_hi)

    ts = np.linspace(0.0, theta, grid)
    if h == 1:
        phis, dphis = kernels.angular_dense(k, h, q, t0, f0, g0, ts, 2)
    else:
        phis = np.empty(grid)
        dphis = np.empty(grid)
        phis[0], dphis[0] = 1.0, 0.0
        phis[1:], dphis[1:] = kernels.angular_dense(k, h, q, t0, f0, g0, ts[1:], 2)

    slope = dphis[-1]
    if not slope < 0:
        raise NoZeroFound(f"profile of C({k},{h}) has nonnegative slope at theta*")
    c = 1.0 / abs(slope)
    phis = phis * c
    dphis = dphis * c
    phis.setflags(write=False)
    dphis.setflags(write=False)
    ts.setflags(write=False)
    return ConeSolution(
        k=k, h=h, theta_star=theta, ts=ts, phis=phis, dphis=dphis, normalization=c
    )


@dataclass(frozen=True)
class BoundaryData:
    """Curvatures and boundary Hessian spectrum at r = 1.

    Curvatures are taken with respect to the outer normal (pointing out of
    the cone); a nontrivial cone has positive mean curvature H in this
    orientation, and the boundary Hessian of the solution is
    (0, kappas, -H).
    """

    theta: float
    kappas: Spectrum
    H: float
    hessian_spectrum: Spectrum
    k: int
    h: int

    @property
    def n(self) -> int:
        return self.k + self.h

    def normalized_exact(self):
        """Scale-invariant exact boundary data, when the family admits one.

        For h == 1 every tangential curvature equals tan(theta*), so dividing
        by it gives the exact spectrum (0, 1 x (n-2), -(n-2)) with H = n-2.
        """
        if self.h == 1:
            m = self.k - 1
            spec = Spectrum(((Fraction(0), 1), (Fraction(1), m), (Fraction(-m), 1)))
            return spec, Fraction(m)
        return None


def boundary_data(cone: ConeSolution) -> BoundaryData:
    k, h, n = cone.k, cone.h, cone.n
    theta = cone.theta_star
    if cone.is_half_space:
        return BoundaryData(
            theta=theta,
            kappas=Spectrum(((0.0, n - 2),)),
            H=0.0,
            hessian_spectrum=Spectrum(((0.0, n),)),
            k=k,
            h=h,
        )
    ky = math.tan(theta)
    kz = -1.0 / math.tan(theta)
    H = (k - 1) * ky + (h - 1) * kz
    if H < 0:
        raise DegenerateBoundary(f"C({k},{h}) has negative mean curvature {H}")
    kap = [(ky, k - 1)]
    if h > 1:
        kap.append((kz, h - 1))
    hess = [(0.0, 1)] + kap + [(-H, 1)]
    return BoundaryData(
        theta=theta,
        kappas=Spectrum(tuple(kap)),
        H=H,
        hessian_spectrum=Spectrum(tuple(hess)),
        k=k,
        h=h,
    )


def _eigen_families(cone: ConeSolution, ts):
    """(lam_y, lam_z, lam_p) eigenvalue branches of D^2 u at r = 1."""
    ts = np.asarray(ts, dtype=float)
    phi = cone.phi(ts)
    dphi = cone.dphi(ts)
    lam_y = phi - dphi * np.tan(ts)
    lam_z = phi + dphi / np.tan(ts)
    lam_p = -(cone.k - 1) * lam_y - (cone.h - 1) * lam_z
    return lam_y, lam_z, lam_p


def hessian_field(cone: ConeSolution, t: float) -> Spectrum:
    """Hessian spectrum of u at radius 1 and angle t in (0, theta*)."""
    if not 0.0 < t < cone.theta_star:
        raise OutOfDomain(f"t = {t} outside (0, {cone.theta_star})")
    lam_y, lam_z, lam_p = (float(v) for v in _eigen_families(cone, t))
    entries: dict = {}

    def put(value, mult):
        if mult > 0:
            entries[value] = entries.get(value, 0) + mult

    put(lam_y, cone.k - 1)
    put(lam_z, cone.h - 1)
    put(0.0, 1)
    put(lam_p, 1)
    return Spectrum(tuple(entries.items()))


def fd_derivatives(y: np.ndarray, dx: float):
    """4th-order first and second derivatives on a uniform grid.

    Central 5-point stencils inside, one-sided stencils (exact through
    degree-4 polynomials) at the two points next to each edge.
    """
    y = np.asarray(y, dtype=float)
    m = len(y)
    if m < 6:
        raise UsageError("need at least 6 samples for 4th-order stencils")
    d1 = np.empty(m)
    d2 = np.empty(m)
    d1[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dx)
    d2[2:-2] = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (
        12 * dx * dx
    )
    c1_edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    c1_next = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    c2_edge = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
    c2_next = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0
    d1[0] = c1_edge @ y[:5] / dx
    d1[1] = c1_next @ y[:5] / dx
    d1[-1] = -(c1_edge @ y[-1:-6:-1]) / dx
    d1[-2] = -(c1_next @ y[-1:-6:-1]) / dx
    d2[0] = c2_edge @ y[:6] / (dx * dx)
    d2[1] = c2_next @ y[:6] / (dx * dx)
    d2[-1] = c2_edge @ y[-1:-7:-1] / (dx * dx)
    d2[-2] = c2_next @ y[-1:-7:-1] / (dx * dx)
    return d1, d2


def _family_stack(cone: ConeSolution, ts):
    lam_y, lam_z, lam_p = _eigen_families(cone, ts)
    fams = []
    mults = []
    if cone.k > 1:
        fams.append(lam_y)
        mults.append(cone.k - 1)
    if cone.h > 1:
        fams.append(lam_z)
        mults.append(cone.h - 1)
    fams.append(lam_p)
    mults.append(1)
    return np.stack(fams), mults


def _weight_profile(cone: ConeSolution, spec: WeightSpec, ts):
    fams, mults = _family_stack(cone, ts)
    if spec.kind == "max":
        w = np.maximum(fams.max(axis=0), 0.0)
        return w, fams, mults
    if spec.kind == "frobenius":
        coef = np.ones_like(fams)
    else:
        coef = np.where(fams > 0, 1.0, float(spec.a))
    w = np.sqrt(np.sum(coef * np.asarray(mults)[:, None] * fams * fams, axis=0))
    return w, fams, mults


def _guard_mask(spec: WeightSpec, fams: np.ndarray, reach: int) -> np.ndarray:
    """Cells whose stencil window meets an eigenvalue sign change or collision."""
    rho = np.max(np.abs(fams), axis=0)
    band = DELTA_SMOOTH * rho
    bad = np.any(np.abs(fams) < band[None, :], axis=0)
    if spec.kind == "max":
        tops = np.sort(np.vstack([fams, np.zeros(fams.shape[1])]), axis=0)[-2:]
        bad |= (tops[1] - tops[0]) < band
    mask = bad.copy()
    for r in range(1, reach + 1):
        mask[r:] |= bad[:-r]
        mask[:-r] |= bad[r:]
    return mask


@dataclass(frozen=True)
class InteriorMargin:
    """Pointwise margin of the interior differential inequality on a grid."""

    min_margin: float
    argmin_t: float
    scale: float
    guarded: int
    grid_n: int


def interior_inequality_check(
    cone: ConeSolution, spec: WeightSpec, grid_n: int = 2048
) -> InteriorMargin:
    """Margin of w*Lap(w) >= (2/(n-1))|grad w|^2 + 2((n-2)/(n-1)) w^2/|x|^2.

    Evaluated on the cross-section at r = 1 through the degree-0 profile
    w_hat(t): the margin is w_hat*(Lap_S w_hat - (n-3) w_hat)
    - (2/(n-1))(w_hat^2 + w_hat'^2) - 2((n-2)/(n-1)) w_hat^2, with 4th-order
    finite differences in t.  Cells meeting an eigenvalue sign change are
    excluded per the smoothness guard.
    """
    if cone.is_half_space:
        raise AllPointsGuarded("half-space profile has w identically zero")
    n = cone.n
    k, h = cone.k, cone.h
    dt = cone.theta_star / grid_n
    ts = (np.arange(grid_n) + 0.5) * dt
    w, fams, _ = _weight_profile(cone, spec, ts)
    mask = _guard_mask(spec, fams, reach=3)
    if mask.all():
        raise AllPointsGuarded("smoothness guard excluded every grid cell")
    dw, d2w = fd_derivatives(w, dt)
    coef = np.zeros_like(ts)
    if h > 1:
        coef += (h - 1) / np.tan(ts)
    if k > 1:
        coef -= (k - 1) * np.tan(ts)
    lap_s = d2w + coef * dw
    margin = (
        w * (lap_s - (n - 3) * w)
        - (2.0 / (n - 1)) * (w * w + dw * dw)
        - (2.0 * (n - 2) / (n - 1)) * w * w
    )
    good = ~mask
    i = int(np.argmin(np.where(good, margin, np.inf)))
    scale = float(np.max(w * w + dw * dw))
    return InteriorMargin(
        min_margin=float(margin[i]),
        argmin_t=float(ts[i]),
        scale=scale,
        guarded=int(mask.sum()),
        grid_n=grid_n,
    )


def weight_boundary_ratio(cone: ConeSolution, spec: WeightSpec, grid_n: int = 4096) -> float:
    """One-sided interior-normal log-derivative of w_hat at theta*.

    Returns D_{-t} w_hat / w_hat evaluated at theta*, which equals -H*B for
    the matching signed weight.
    """
    if cone.is_half_space:
        raise AllPointsGuarded("half-space profile has w identically zero")
    dt = cone.theta_star / grid_n
    ts = cone.theta_star - dt * np.arange(5)[::-1]
    w, _, _ = _weight_profile(cone, spec, ts)
    c1_edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    dw = -(c1_edge @ w[::-1]) / dt
    return float(-dw / w[-1])
