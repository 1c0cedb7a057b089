"""Boundary functionals of a cone's Hessian spectrum and exponent windows.

A boundary Hessian spectrum has the structure (0, kappa_2, ..., kappa_{n-1},
-H): one zero radial eigenvalue, the n-2 tangential curvatures, and -H in
the normal direction, with sum(kappa) = H > 0.  On such spectra

  L      = 2 + sum(l^3) / (H * sum(l^2))
  B(a)   = 1 + (sum_{l>0} l^3 + a sum_{l<0} l^3 + a H sum(l^2)) / (H * w_a^2)

with w_a^2 the signed weight; B(1) == L.  An exponent alpha with

  (n-2)^2/(4(n-1)) <= alpha <= 1/B

makes w^alpha a subsolution of the linearized problem, which certifies
instability; the window endpoints are kept as exact rationals whenever the
inputs are exact.

All arithmetic switches to fractions.Fraction when every input is an int or
Fraction, so paper constants like L = 2, 1/8, 4/5, 7/2 come out exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateBoundary, IdentityViolated, UsageError
from .weights import Spectrum

_STRUCT_TOL = 1e-9


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _expand_values(spectrum: Spectrum):
    out = []
    for lam, mult in spectrum.values:
        out.extend([lam] * mult)
    return out


def _split_boundary(spectrum: Spectrum, H):
    """Validate the (0, tangentials, -H) structure; return the tangentials."""
    if not H > 0:
        raise DegenerateBoundary(f"mean curvature must be positive, got {H}")
    lams = _expand_values(spectrum)
    if len(lams) < 3:
        raise UsageError("boundary spectrum needs n >= 3 entries")
    exact = _is_exact(H) and all(_is_exact(v) for v in lams)
    scale = max(max(abs(v) for v in lams), H)
    tol = 0 if exact else _STRUCT_TOL * float(scale)

    def _pop(target):
        for i, v in enumerate(lams):
            if abs(v - target) <= tol:
                return lams.pop(i)
        raise UsageError(f"boundary spectrum lacks the {target} entry")

    _pop(0 * H)
    _pop(-H)
    if abs(sum(lams) - H) > (0 if exact else _STRUCT_TOL * float(scale)):
        raise UsageError("tangential curvatures do not sum to H")
    return lams, exact


@dataclass(frozen=True)
class BoundaryFunctionalResult:
    """L and B values of one boundary spectrum, with the n=4 case tags."""

    L: object
    B: object
    H: object
    a: object
    n: int
    case: int | None
    equality_case: bool

    def to_json(self) -> dict:
        return {
            "L": _num_json(self.L),
            "B": _num_json(self.B),
            "H": _num_json(self.H),
            "a": _num_json(self.a),
            "n": self.n,
            "case": self.case,
            "equality_case": self.equality_case,
        }


def _num_json(x):
    if isinstance(x, Fraction):
        return str(x)
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf"
    return x


def boundary_L(spectrum: Spectrum, H):
    """L = 2 + sum(l^3)/(H sum(l^2)); exact for exact inputs."""
    _split_boundary(spectrum, H)
    lams = _expand_values(spectrum)
    s3 = sum(v**3 for v in lams)
    s2 = sum(v**2 for v in lams)
    two = Fraction(2) if _is_exact(H) and all(_is_exact(v) for v in lams) else 2.0
    return two + s3 / (H * s2)


def boundary_B(spectrum: Spectrum, H, a=Fraction(4)) -> BoundaryFunctionalResult:
    """B = -w_nu/(H w) for the signed(a) weight, with case classification.

    Case 2 means every tangential curvature is positive; case 1 otherwise.
    equality_case flags the n=4, a=4 configuration (0, 2H, -H, -H) where
    B attains its bound 3.
    """
    tang, exact = _split_boundary(spectrum, H)
    if not a > 0:
        raise UsageError("weight parameter a must be positive")
    exact = exact and _is_exact(a)
    lams = _expand_values(spectrum)
    n = len(lams)
    L = boundary_L(spectrum, H)
    if a == 1:
        B = L
    else:
        s3p = sum(v**3 for v in lams if v > 0)
        s3n = sum(v**3 for v in lams if v < 0)
        s2 = sum(v**2 for v in lams)
        w2a = sum(v**2 for v in lams if v > 0) + a * sum(v**2 for v in lams if v < 0)
        one = Fraction(1) if exact else 1.0
        B = one + (s3p + a * s3n + a * H * s2) / (H * w2a)
    case = 2 if all(v > 0 for v in tang) else 1
    if exact:
        equality = n == 4 and a == 4 and B == 3
    else:
        equality = n == 4 and float(a) == 4.0 and abs(float(B) - 3.0) <= 1e-12
    return BoundaryFunctionalResult(
        L=L, B=B, H=H, a=a, n=n, case=case, equality_case=equality
    )


@dataclass(frozen=True)
class SubsolutionWindow:
    """Admissible exponent window [alpha_min, alpha_max] for w^alpha."""

    alpha_min: object
    alpha_max: object
    nonempty: bool
    strict: bool
    gamma: object
    alpha: object

    def to_json(self) -> dict:
        return {
            "alpha_min": _num_json(self.alpha_min),
            "alpha_max": _num_json(self.alpha_max),
            "nonempty": self.nonempty,
            "strict": self.strict,
            "gamma": _num_json(self.gamma),
            "alpha": _num_json(self.alpha),
        }


def alpha_lower_bound(n: int) -> Fraction:
    return Fraction((n - 2) ** 2, 4 * (n - 1))


def subsolution_window(bd: BoundaryFunctionalResult, n: int, a=None) -> SubsolutionWindow:
    """Exponent window from one boundary functional evaluation.

    alpha_max = 1/B (B > 0), or +inf when B <= 0 (the boundary constraint is
    vacuous).  At a touching window the strictness flag is set either by the
    sign of w_nu (needs alpha > 1 - 2/(n-1)) or, for the signed(4) weight in
    n = 4, by the equality configuration forcing unequal tangential
    eigenvalues.
    """
    if a is not None and a != bd.a:
        raise UsageError("weight parameter does not match the boundary result")
    if n != bd.n:
        raise UsageError("dimension does not match the boundary result")
    a_min = alpha_lower_bound(n)
    Bw = bd.B
    if Bw > 0:
        one = Fraction(1) if isinstance(Bw, (int, Fraction)) else 1.0
        a_max = one / Bw
    else:
        a_max = math.inf
    nonempty = a_min <= a_max
    if a_max != math.inf:
        alpha = a_max
    else:
        alpha = max(a_min, Fraction(1))
    gamma = alpha * (alpha + 1)
    if not nonempty:
        strict = False
    elif a_min < a_max:
        strict = True
    else:
        strict = a_min > Fraction(n - 3, n - 1) or (
            n == 4 and bd.a == 4 and bd.equality_case
        )
    return SubsolutionWindow(
        alpha_min=a_min,
        alpha_max=a_max,
        nonempty=nonempty,
        strict=strict,
        gamma=gamma,
        alpha=alpha,
    )


def criterion37(n: int, L) -> bool:
    """Strict window nonemptiness (n-2)^2/(4(n-1)) < 1/L for the plain weight."""
    if L <= 0:
        return True
    return alpha_lower_bound(n) * L < 1


# -- supremum of the slice functional ---------------------------------------


@dataclass(frozen=True)
class LStarResult:
    sup: float
    attained: bool
    witness: tuple

    def to_json(self) -> dict:
        return {
            "sup": "inf" if math.isinf(self.sup) else self.sup,
            "attained": self.attained,
            "witness": [float(x) for x in self.witness],
        }


def _slice_value(mu: np.ndarray) -> np.ndarray:
    # extended precision: sum(mu^3) cancels catastrophically for large |mu|
    mu = np.atleast_2d(mu).astype(np.longdouble)
    s3 = np.sum(mu**3, axis=1)
    s2 = np.sum(mu**2, axis=1)
    return (2.0 + (s3 - 1.0) / (1.0 + s2)).astype(float)


def _helmert_basis(m: int) -> np.ndarray:
    """Orthonormal basis of the sum-zero subspace of R^m, shape (m, m-1)."""
    V = np.zeros((m, m - 1))
    for j in range(1, m):
        V[:j, j - 1] = 1.0
        V[j, j - 1] = -j
        V[:, j - 1] /= math.sqrt(j * (j + 1))
    return V


def lstar_optimize(
    n: int,
    radius_max: float = 2.0**20,
    threshold: float = 1e4,
    seed: int = 0,
) -> LStarResult:
    """Supremum of 2 + (sum mu^3 - 1)/(1 + sum mu^2) over sum(mu) = 1.

    mu has n-2 components.  Maximizes over balls of doubling radius around
    the barycenter; an incumbent exceeding `threshold` is reported as +inf
    (the functional diverges along explicit rays once n >= 5).  `attained`
    is set when the maximizer stays interior and the incumbent has stopped
    improving across the last doubling.

    The growth rate along the best ray in the sum-one slice is
    (m-2)/sqrt(m(m-1)) < 1 per unit radius (m = n-2 variables), so any
    threshold between the bounded suprema (<= 7/2) and the slope times the
    radius cap separates the two outcomes; 1e4 sits safely inside that gap
    for every dimension this library targets.
    """
    if n < 3:
        raise UsageError("need n >= 3")
    m = n - 2
    if m == 1:
        return LStarResult(sup=2.0, attained=True, witness=(1.0,))

    from scipy.optimize import minimize

    dims = m - 1
    center = np.full(m, 1.0 / m)
    V = _helmert_basis(m)
    rng = np.random.Generator(np.random.Philox(key=seed))

    def value_xi(xi: np.ndarray) -> float:
        return float(_slice_value(center + V @ xi)[0])

    best_val = value_xi(np.zeros(dims))
    best_xi = np.zeros(dims)
    prev_val = -math.inf

    radius = 1.0
    while radius <= radius_max:
        cands = [np.zeros(dims), best_xi * min(1.0, radius / max(np.linalg.norm(best_xi), 1e-30))]
        for s in (-1.0, 1.0):
            for j in range(dims):
                e = np.zeros(dims)
                e[j] = s * radius
                cands.append(e)
        dirs = rng.normal(size=(128, dims))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        cands.extend(dirs * radius)
        cands.extend(dirs[:64] * (radius * rng.uniform(0.05, 1.0, size=(64, 1))))
        cands = np.array(cands)
        vals = _slice_value(center[None, :] + cands @ V.T)
        order = np.argsort(vals)[::-1]

        def neg(xi, _r=radius):
            r = np.linalg.norm(xi)
            if r > _r:
                return 1e9 * (1.0 + r / _r)
            return -value_xi(xi)

        for idx in order[:8]:
            res = minimize(neg, cands[idx], method="Nelder-Mead",
                           options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14})
            if -res.fun > best_val:
                best_val = -res.fun
                best_xi = res.x
        imax = int(np.argmax(vals))
        if vals[imax] > best_val:
            best_val = float(vals[imax])
            best_xi = cands[imax]
        if best_val > threshold:
            witness = center + V @ best_xi
            return LStarResult(sup=math.inf, attained=False, witness=tuple(witness))
        if radius == radius_max:
            break
        prev_val = best_val
        radius *= 2.0

    witness = center + V @ best_xi
    attained = bool(
        np.linalg.norm(best_xi) <= 0.5 * radius_max
        and abs(best_val - prev_val) <= 1e-9 * max(1.0, abs(best_val))
    )
    return LStarResult(sup=float(best_val), attained=attained, witness=tuple(float(x) for x in witness))


# -- exact algebra for the two boundary cases --------------------------------


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, ci in enumerate(p):
        for j, cj in enumerate(q):
            out[i + j] += ci * cj
    return _ptrim(out)


def _padd(p, q):
    out = [Fraction(0)] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return _ptrim(out)


def _pscale(p, c):
    return _ptrim([Fraction(c) * x for x in p])


def _ptrim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def _F(*coeffs):
    return tuple(Fraction(c) for c in coeffs)


@dataclass(frozen=True)
class CaseIdentityRecord:
    identity: str
    lhs_coeffs: tuple
    rhs_coeffs: tuple
    verdict: str

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "lhs_coeffs": [str(c) for c in self.lhs_coeffs],
            "rhs_coeffs": [str(c) for c in self.rhs_coeffs],
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class CaseIdentityCheck:
    records: tuple
    case2_max: Fraction
    case2_argmax: tuple
    fraction_bound: Fraction
    verdict: str

    def to_json(self) -> dict:
        return {
            "records": [r.to_json() for r in self.records],
            "case2_max": str(self.case2_max),
            "case2_argmax": [str(x) for x in self.case2_argmax],
            "fraction_bound": str(self.fraction_bound),
            "verdict": self.verdict,
        }


def case_identity_check() -> CaseIdentityCheck:
    """Exact-coefficient verification of the two boundary-case bounds (a=4).

    Case 1: (mu-1) * (4(mu^2+mu-1) - (mu+1)^2) == (mu-1)^2 (3mu+5), both
    expanding to 3mu^3 - mu^2 - 7mu + 5 (nonnegative for mu >= 0).

    Case 2: the numerator mu^3 + (1-mu)^3 + 4(mu^2 + (1-mu)^2) collapses to
    the quadratic 5 - 11 mu(1-mu), so its maximum on [0,1] is exactly 5 at
    the endpoints, and with denominator >= 4 the fraction is at most 5/4.
    """
    mu = _F(0, 1)
    one_minus = _F(1, -1)
    mu_m1 = _F(-1, 1)

    inner = _padd(_pscale(_padd(_pmul(mu, mu), _F(-1, 1)), 4), _pscale(_pmul(_F(1, 1), _F(1, 1)), -1))
    lhs1 = _pmul(mu_m1, inner)
    rhs1 = _pmul(_pmul(mu_m1, mu_m1), _F(5, 3))
    expected1 = _F(5, -7, -1, 3)
    if not (lhs1 == rhs1 == expected1):
        raise IdentityViolated(f"case-1 expansion mismatch: {lhs1} vs {rhs1}")
    rec1 = CaseIdentityRecord(
        identity="(mu-1)*(4*(mu^2+mu-1)-(mu+1)^2) == (mu-1)^2*(3*mu+5)",
        lhs_coeffs=lhs1,
        rhs_coeffs=rhs1,
        verdict="equal",
    )

    cube = _pmul(_pmul(one_minus, one_minus), one_minus)
    numer = _padd(
        _padd(_pmul(_pmul(mu, mu), mu), cube),
        _pscale(_padd(_pmul(mu, mu), _pmul(one_minus, one_minus)), 4),
    )
    collapsed = _padd(_F(5), _pscale(_pmul(mu, one_minus), -11))
    if numer != collapsed or numer != _F(5, -11, 11):
        raise IdentityViolated(f"case-2 numerator mismatch: {numer}")
    rec2 = CaseIdentityRecord(
        identity="mu^3+(1-mu)^3+4*(mu^2+(1-mu)^2) == 5 - 11*mu*(1-mu)",
        lhs_coeffs=numer,
        rhs_coeffs=collapsed,
        verdict="equal",
    )

    # mu(1-mu) >= 0 on [0,1] with zeros exactly at the endpoints, so the
    # numerator maximum is 5; the denominator mu^2+(1-mu)^2+4 is >= 4.
    case2_max = Fraction(5)
    for probe in (Fraction(0), Fraction(1, 2), Fraction(1)):
        val = sum(c * probe**i for i, c in enumerate(numer))
        if val > case2_max:
            raise IdentityViolated(f"case-2 numerator exceeds 5 at {probe}")
    return CaseIdentityCheck(
        records=(rec1, rec2),
        case2_max=case2_max,
        case2_argmax=(Fraction(0), Fraction(1)),
        fraction_bound=Fraction(5, 4),
        verdict="ok",
    )
