"""Symmetric convex 1-homogeneous functions of Hessian eigenvalues.

Three built-in kinds:

  frobenius       f = sqrt(sum l_i^2)
  signed(a)       f = sqrt(sum_{l>0} l_i^2 + a * sum_{l<0} l_i^2)
  max-eigenvalue  f = max_i l_i

plus their first/second derivative calculus in the eigenbasis.  The signed
weight is C^{1,1} but not C^2 where an eigenvalue changes sign, and the
divided-difference coefficient

  F_ij = (f_i - f_j) / (l_i - l_j)        (i != j)

degenerates numerically at eigenvalue collisions.  Derivative operations
therefore enforce a relative guard band DELTA_SMOOTH: sign margins (signed
weight) and the top gap (max weight) must clear DELTA_SMOOTH times the
spectral radius, and near-coincident pairs switch F_ij to its smooth limit
f_ii - f_ij.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonSmoothPoint, UsageError

DELTA_SMOOTH = 1e-4

_KINDS = ("frobenius", "signed", "max")


@dataclass(frozen=True)
class WeightSpec:
    """One of the built-in eigenvalue weights; `a` only for kind='signed'."""

    kind: str
    a: float | Fraction | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown weight kind {self.kind!r}")
        if self.kind == "signed":
            if self.a is None or not self.a > 0:
                raise UsageError("signed weight needs a > 0")
        elif self.a is not None:
            raise UsageError(f"weight kind {self.kind!r} takes no parameter")

    @property
    def label(self) -> str:
        if self.kind == "signed":
            a = self.a
            text = str(a) if isinstance(a, (int, Fraction)) else repr(float(a))
            return f"signed:{text}"
        return self.kind

    @staticmethod
    def parse(text: str) -> "WeightSpec":
        """Parse a CLI weight flag: 'frobenius', 'signed:4', 'signed:7/2', 'max'."""
        text = text.strip()
        if text == "frobenius":
            return FROBENIUS
        if text in ("max", "max-eigenvalue"):
            return MAX_EIGENVALUE
        if text.startswith("signed:"):
            try:
                a = Fraction(text.split(":", 1)[1])
            except (ValueError, ZeroDivisionError) as exc:
                raise UsageError(f"bad weight parameter in {text!r}") from exc
            return WeightSpec("signed", a)
        raise UsageError(f"unknown weight {text!r}")


FROBENIUS = WeightSpec("frobenius")
MAX_EIGENVALUE = WeightSpec("max")


def signed(a) -> WeightSpec:
    return WeightSpec("signed", Fraction(a) if isinstance(a, (int, str)) else a)


SIGNED4 = signed(4)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicities, stored descending by value."""

    values: tuple

    def __post_init__(self):
        vals = []
        for lam, mult in self.values:
            if mult < 1 or mult != int(mult):
                raise UsageError("multiplicities must be positive integers")
            vals.append((lam, int(mult)))
        vals.sort(key=lambda p: p[0], reverse=True)
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def from_eigenvalues(cls, lams) -> "Spectrum":
        return cls(tuple((lam, 1) for lam in lams))

    @property
    def n(self) -> int:
        return sum(m for _, m in self.values)

    def expand(self) -> np.ndarray:
        out = []
        for lam, mult in self.values:
            out.extend([float(lam)] * mult)
        return np.array(out)

    @property
    def trace(self):
        return sum(lam * mult for lam, mult in self.values)

    @property
    def spectral_radius(self) -> float:
        return max(abs(float(lam)) for lam, _ in self.values)

    def is_trace_free(self, rel_tol: float = 1e-12) -> bool:
        rho = self.spectral_radius
        return abs(float(self.trace)) <= rel_tol * max(rho, 1e-300)


def _as_array(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return spectrum.expand()
    return np.asarray(spectrum, dtype=float)


def eval_weight(spec: WeightSpec, spectrum) -> float:
    """f(lambda); a total function, no guards.

    Squared terms are summed in sorted order so permuting the spectrum
    reproduces the value bit for bit.
    """
    lam = _as_array(spectrum)
    if lam.size < 1:
        raise UsageError("empty spectrum")
    if spec.kind == "frobenius":
        return float(np.sqrt(np.sum(np.sort(lam * lam))))
    if spec.kind == "signed":
        a = float(spec.a)
        return float(np.sqrt(np.sum(np.sort(np.where(lam > 0, 1.0, a) * lam * lam))))
    return float(np.max(lam))


def _batch_partials(spec: WeightSpec, lam: np.ndarray):
    """f, grad f, hess f for lam of shape (P, n). No guard handling here."""
    P, n = lam.shape
    if spec.kind == "max":
        f = lam.max(axis=1)
        grad = np.zeros_like(lam)
        grad[np.arange(P), lam.argmax(axis=1)] = 1.0
        hess = np.zeros((P, n, n))
        return f, grad, hess
    if spec.kind == "frobenius":
        c = np.ones_like(lam)
    else:
        c = np.where(lam > 0, 1.0, float(spec.a))
    f = np.sqrt(np.sum(c * lam * lam, axis=1))
    fs = np.where(f > 0, f, 1.0)
    grad = c * lam / fs[:, None]
    clam = c * lam
    hess = (np.eye(n)[None, :, :] * c[:, None, :]) / fs[:, None, None] - (
        clam[:, :, None] * clam[:, None, :]
    ) / (fs**3)[:, None, None]
    return f, grad, hess


def _batch_guard_ok(spec: WeightSpec, lam: np.ndarray) -> np.ndarray:
    """Boolean mask of points clearing the smoothness guard."""
    rho = np.max(np.abs(lam), axis=1)
    ok = rho > 0
    band = DELTA_SMOOTH * rho
    if spec.kind == "signed":
        ok &= np.min(np.abs(lam), axis=1) >= band
    elif spec.kind == "max":
        top2 = np.sort(lam, axis=1)[:, -2:]
        ok &= (top2[:, 1] - top2[:, 0]) >= band
    return ok


def _batch_pair_matrix(spec, lam, f, grad, hess):
    """F_ij matrix (i != j): divided difference with the smooth-limit rule.

    Near-coincident pairs (gap below the guard band but sign-clear) take the
    limit value f_ii - f_ij of the divided difference.
    """
    P, n = lam.shape
    dl = lam[:, :, None] - lam[:, None, :]
    dg = grad[:, :, None] - grad[:, None, :]
    rho = np.max(np.abs(lam), axis=1)
    tight = np.abs(dl) <= (DELTA_SMOOTH * rho)[:, None, None]
    safe = np.where(tight, 1.0, dl)
    F = np.where(tight, 0.0, dg / safe)
    limit = hess[:, np.arange(n), np.arange(n)][:, :, None] - hess
    F = np.where(tight, limit, F)
    idx = np.arange(n)
    F[:, idx, idx] = 0.0
    return F


def weight_calculus_batch(spec: WeightSpec, lams: np.ndarray, thirds: np.ndarray):
    """Batched (w, grad w, laplacian w, guard mask) in the eigenbasis.

    lams: (P, n) eigenvalues, thirds: (P, n, n, n) third derivatives u_ijk
    rotated into the eigenbasis.  grad w components come out in the same
    basis; |grad w| and laplacian w are basis-invariant.
    """
    lams = np.asarray(lams, dtype=float)
    thirds = np.asarray(thirds, dtype=float)
    ok = _batch_guard_ok(spec, lams)
    f, grad, hess = _batch_partials(spec, lams)
    diagT = np.einsum("piik->pik", thirds)
    wgrad = np.einsum("pi,pik->pk", grad, diagT)
    F = _batch_pair_matrix(spec, lams, f, grad, hess)
    lap = np.einsum("pik,pij,pjk->p", diagT, hess, diagT) + np.einsum(
        "pij,pijk->p", F, thirds**2
    )
    return f, wgrad, lap, ok


def _single_point(spec, spectrum, third):
    lam = _as_array(spectrum)
    n = lam.size
    third = np.asarray(third, dtype=float)
    if third.shape != (n, n, n):
        raise UsageError(f"third-derivative tensor must have shape {(n, n, n)}")
    if not np.allclose(third, np.swapaxes(third, 0, 1)) or not np.allclose(
        third, np.swapaxes(third, 1, 2)
    ):
        raise UsageError("third-derivative tensor must be symmetric")
    return lam, third


def require_smooth(spec: WeightSpec, spectrum) -> None:
    """Raise NonSmoothPoint if the spectrum violates this weight's guard."""
    lam = _as_array(spectrum)
    if not _batch_guard_ok(spec, lam[None, :])[0]:
        raise NonSmoothPoint(
            f"{spec.label} weight is not C^2 within the guard band at {lam.tolist()}"
        )


def weight_gradient(spec: WeightSpec, spectrum, third) -> np.ndarray:
    """(w_1, ..., w_n) = sum_i f_i u_iik in the eigenbasis, at a guarded point."""
    lam, third = _single_point(spec, spectrum, third)
    require_smooth(spec, lam)
    _, wgrad, _, _ = weight_calculus_batch(spec, lam[None, :], third[None, :])
    return wgrad[0]


def weight_laplacian(spec: WeightSpec, spectrum, third) -> float:
    """Laplacian of w for harmonic u (the f_i u_iikk sum vanishes)."""
    lam, third = _single_point(spec, spectrum, third)
    require_smooth(spec, lam)
    _, _, lap, _ = weight_calculus_batch(spec, lam[None, :], third[None, :])
    return float(lap[0])


@dataclass(frozen=True)
class IdentityNF:
    """Pairing-identity evaluation on a trace-free spectrum."""

    residual: float
    per_k_sums: np.ndarray
    f: float
    nf: float


def identity_nf(spec: WeightSpec, spectrum) -> IdentityNF:
    """Residual of sum_{i<j} (l_i - l_j)(f_i - f_j) = n*f on trace-free input.

    Also exposes the per-k partial sums sum_{i != k} (l_i - l_k)(f_i - f_k),
    each of which is bounded by n*f.
    """
    lam = _as_array(spectrum)
    rho = float(np.max(np.abs(lam))) if lam.size else 0.0
    if abs(lam.sum()) > 1e-9 * max(rho, 1e-300):
        raise UsageError("identity_nf requires a trace-free spectrum")
    require_smooth(spec, lam)
    f, grad, _ = _batch_partials(spec, lam[None, :])
    f = float(f[0])
    g = grad[0]
    dl = lam[:, None] - lam[None, :]
    dg = g[:, None] - g[None, :]
    pair = dl * dg
    total = 0.5 * float(pair.sum())
    per_k = pair.sum(axis=0)
    return IdentityNF(
        residual=abs(total - lam.size * f), per_k_sums=per_k, f=f, nf=lam.size * f
    )


def weight_partials(spec: WeightSpec, spectrum):
    """(f, grad f, hess f) at a single point; no guard (oracle/testing hook)."""
    lam = _as_array(spectrum)
    f, grad, hess = _batch_partials(spec, lam[None, :])
    return float(f[0]), grad[0], hess[0]
