"""Randomized verification of the weight differential inequalities.

For exactly harmonic random polynomials u, checks at sampled points that

    w * lap(w) >= (2/n) |grad w|^2,        w = f(eigenvalues of D^2 u),

with grad w and lap w computed analytically through the eigenbasis calculus
and cross-checked against central finite differences of x -> f(lam(D^2u(x))).
For the plain Frobenius weight the sharper identity
w*lap(w) + |grad w|^2 = sum u_ijk^2 is tested as an exact residual.

Sampling is seeded and counter-based (Philox); points failing the
smoothness guard are rejected and counted, never tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import interior_inequality_check
from .errors import AllPointsGuarded
from .harmonic import HarmonicPoly
from .weights import DELTA_SMOOTH, WeightSpec, weight_calculus_batch

R_INNER = 0.1
R_OUTER = 1.0


def sample_points(n: int, count: int, seed: int) -> np.ndarray:
    """Uniform samples in the annulus R_INNER <= |x| <= R_OUTER."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    u = rng.uniform(size=(count, 1))
    radius = (R_INNER**n + u * (R_OUTER**n - R_INNER**n)) ** (1.0 / n)
    return dirs * radius


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of one randomized inequality run."""

    weight: str
    samples_tested: int
    samples_guarded: int
    worst_margin: float
    worst_point: tuple
    fd_disagreements: int
    tol_fd: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tol_fd and self.fd_disagreements == 0

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "samples_tested": self.samples_tested,
            "samples_guarded": self.samples_guarded,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point),
            "fd_disagreements": self.fd_disagreements,
            "tol_fd": self.tol_fd,
            "seed": self.seed,
            "passed": self.passed,
        }


def _point_calculus(poly: HarmonicPoly, spec: WeightSpec, pts: np.ndarray):
    hess = poly.hessian_batch(pts)
    lam, Q = np.linalg.eigh(hess)
    third = poly.third_batch(pts)
    t_rot = np.einsum("pai,pbj,pck,pabc->pijk", Q, Q, Q, third)
    w, grad, lap, ok = weight_calculus_batch(spec, lam, t_rot)
    return w, grad, lap, ok, lam, Q, third


def _weight_of_points(poly: HarmonicPoly, spec: WeightSpec, pts: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(poly.hessian_batch(pts))
    if spec.kind == "frobenius":
        return np.sqrt(np.sum(lam * lam, axis=1))
    if spec.kind == "signed":
        a = float(spec.a)
        return np.sqrt(np.sum(np.where(lam > 0, 1.0, a) * lam * lam, axis=1))
    return lam[:, -1]


def _fd_cross_check(poly, spec, pts, grad_analytic, lap_analytic, w):
    """Central-difference oracle for |grad w| and lap w with Richardson bounds.

    Returns (disagreements, certified relative fd error bound).
    """
    if len(pts) == 0:
        return 0, 1e-12
    n = poly.n
    disagree = 0
    tol_fd = 1e-12
    grad_norm = np.linalg.norm(grad_analytic, axis=1)
    eye = np.eye(n)

    def fd_at(h):
        plus = pts[:, None, :] + h * eye[None, :, :]
        minus = pts[:, None, :] - h * eye[None, :, :]
        flat = np.concatenate([plus.reshape(-1, n), minus.reshape(-1, n)])
        vals = _weight_of_points(poly, spec, flat)
        wp = vals[: len(pts) * n].reshape(len(pts), n)
        wm = vals[len(pts) * n :].reshape(len(pts), n)
        g = (wp - wm) / (2 * h)
        lap = np.sum(wp + wm - 2 * w[:, None], axis=1) / (h * h)
        return np.linalg.norm(g, axis=1), lap

    g1, _ = fd_at(1e-5)
    g2, _ = fd_at(5e-6)
    _, l1 = fd_at(3e-4)
    _, l2 = fd_at(1.5e-4)
    g_best = g2 + (g2 - g1) / 3.0
    l_best = l2 + (l2 - l1) / 3.0
    g_err = np.abs(g2 - g1) / 3.0
    l_err = np.abs(l2 - l1) / 3.0

    g_scale = np.maximum(grad_norm, np.maximum(w, 1e-30))
    l_scale = np.maximum(np.abs(lap_analytic), np.maximum(w, 1e-30))
    rel_g = np.abs(g_best - grad_norm) / g_scale
    rel_l = np.abs(l_best - lap_analytic) / l_scale
    disagree += int(np.sum(rel_g > 1e-6)) + int(np.sum(rel_l > 1e-5))
    tol_fd = max(
        tol_fd, float(np.max(g_err / g_scale)), float(np.max(l_err / l_scale))
    )
    return disagree, tol_fd


def verify_general_inequality(
    poly: HarmonicPoly,
    spec: WeightSpec,
    samples: int,
    seed: int,
    fd_checks: int = 8,
) -> ViolationReport:
    """Margin report for w*lap(w) - (2/n)|grad w|^2 >= 0 at sampled points."""
    pts = sample_points(poly.n, samples, seed)
    w, grad, lap, ok, lam, _, _ = _point_calculus(poly, spec, pts)
    guarded = int(np.sum(~ok))
    if not ok.any():
        raise AllPointsGuarded("every sampled point fell in the guard band")
    idx = np.flatnonzero(ok)
    margin = w * lap - (2.0 / poly.n) * np.sum(grad * grad, axis=1)
    scale = np.abs(w * lap) + np.sum(grad * grad, axis=1) + 1e-30
    rel = margin[idx] / scale[idx]
    worst = int(np.argmin(rel))

    # cross-check only points comfortably clear of the guard band
    wide = _batch_guard_ok_wide(spec, lam, 10.0 * DELTA_SMOOTH)
    fd_idx = np.flatnonzero(ok & wide)[:fd_checks]
    disagree, tol_fd = _fd_cross_check(
        poly, spec, pts[fd_idx], grad[fd_idx], lap[fd_idx], w[fd_idx]
    )
    return ViolationReport(
        weight=spec.label,
        samples_tested=int(ok.sum()),
        samples_guarded=guarded,
        worst_margin=float(rel[worst]),
        worst_point=tuple(float(x) for x in pts[idx[worst]]),
        fd_disagreements=disagree,
        tol_fd=max(tol_fd, 1e-9),
        seed=seed,
    )


def _batch_guard_ok_wide(spec, lam, band_factor):
    rho = np.max(np.abs(lam), axis=1)
    ok = rho > 0
    band = band_factor * rho
    if spec.kind == "signed":
        ok &= np.min(np.abs(lam), axis=1) >= band
    elif spec.kind == "max":
        top2 = np.sort(lam, axis=1)[:, -2:]
        ok &= (top2[:, 1] - top2[:, 0]) >= band
    gaps = np.diff(np.sort(lam, axis=1), axis=1)
    ok &= np.min(gaps, axis=1) >= band * 0.1
    return ok


def frobenius_identity(poly: HarmonicPoly, samples: int, seed: int) -> float:
    """Max relative residual of w*lap(w) + |grad w|^2 = sum u_ijk^2."""
    from .weights import FROBENIUS

    pts = sample_points(poly.n, samples, seed)
    w, grad, lap, ok, _, _, third = _point_calculus(poly, FROBENIUS, pts)
    if not ok.any():
        raise AllPointsGuarded("every sampled point fell in the guard band")
    total = np.sum(third * third, axis=(1, 2, 3))
    lhs = w * lap + np.sum(grad * grad, axis=1)
    idx = np.flatnonzero(ok & (total > 0))
    if len(idx) == 0:
        return 0.0
    return float(np.max(np.abs(lhs[idx] - total[idx]) / total[idx]))


def homogeneous_improved_check(cone, spec: WeightSpec, grid_n: int = 2048):
    """Improved interior inequality for degree-1 homogeneous solutions.

    Delegates to the cone-profile margin evaluation; the only degree-1
    homogeneous harmonics with nonvanishing Hessian are the cone solutions,
    so there is no polynomial test surface for this case.
    """
    return interior_inequality_check(cone, spec, grid_n)
