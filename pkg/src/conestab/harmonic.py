"""Exactly harmonic homogeneous polynomials with rational coefficients.

Coefficient vectors are sampled from a bounded rational box and projected
onto the kernel of the Laplacian, treated as an exact linear map between
homogeneous coefficient spaces.  All projector arithmetic runs in
fractions.Fraction, so generated polynomials are harmonic exactly, not to
roundoff; the kernel dimension is C(n+d-1, d) - C(n+d-3, d-2).

Point evaluation of the polynomial and of its derivative tables is batched
in float for the randomized test suites.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import UsageError


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> tuple:
    """Exponent tuples of the degree-d monomials in n variables, lex order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort()
    return tuple(out)


def harmonic_dimension(n: int, d: int) -> int:
    if d < 2:
        return comb(n + d - 1, d)
    return comb(n + d - 1, d) - comb(n + d - 3, d - 2)


def _laplacian_rows(n: int, d: int):
    """Integer matrix of the Laplacian from degree d to degree d-2 coefficients."""
    src = monomials(n, d)
    dst = monomials(n, d - 2)
    index = {e: i for i, e in enumerate(dst)}
    rows = [[0] * len(src) for _ in dst]
    for j, e in enumerate(src):
        for i in range(n):
            if e[i] >= 2:
                low = list(e)
                low[i] -= 2
                rows[index[tuple(low)]][j] += e[i] * (e[i] - 1)
    return rows


def _solve_exact(M, B):
    """Gauss-Jordan solve M X = B over Fractions; M square nonsingular."""
    m = len(M)
    cols = len(B[0])
    A = [[Fraction(M[i][j]) for j in range(m)] + [Fraction(x) for x in B[i]] for i in range(m)]
    for col in range(m):
        piv = next(r for r in range(col, m) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(m):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[m : m + cols] for row in A]


@lru_cache(maxsize=None)
def harmonic_projector(n: int, d: int) -> tuple:
    """Exact orthogonal projector onto ker(Laplacian) in coefficient space."""
    L = _laplacian_rows(n, d)
    m, N = len(L), len(L[0])
    # M = L L^T is positive definite because the Laplacian map is onto
    M = [[sum(L[i][k] * L[j][k] for k in range(N)) for j in range(m)] for i in range(m)]
    X = _solve_exact(M, L)
    P = [
        [
            (Fraction(1) if i == j else Fraction(0))
            - sum(Fraction(L[r][i]) * X[r][j] for r in range(m))
            for j in range(N)
        ]
        for i in range(N)
    ]
    return tuple(tuple(row) for row in P)


@dataclass(frozen=True)
class HarmonicPoly:
    """Homogeneous polynomial with exact rational coefficients."""

    n: int
    d: int
    coeffs: tuple  # ((exponent tuple, Fraction), ...)

    def coeff_map(self) -> dict:
        return dict(self.coeffs)

    def laplacian_coeffs(self) -> dict:
        """Exact coefficient map of the Laplacian (empty when harmonic)."""
        out: dict = {}
        for e, c in self.coeffs:
            for i in range(self.n):
                if e[i] >= 2:
                    low = list(e)
                    low[i] -= 2
                    key = tuple(low)
                    out[key] = out.get(key, Fraction(0)) + c * e[i] * (e[i] - 1)
        return {k: v for k, v in out.items() if v != 0}

    def derivative(self, axes) -> dict:
        """Exact coefficient map of a repeated partial derivative."""
        cur = self.coeff_map()
        for ax in axes:
            nxt: dict = {}
            for e, c in cur.items():
                if e[ax] >= 1:
                    low = list(e)
                    low[ax] -= 1
                    nxt[tuple(low)] = nxt.get(tuple(low), Fraction(0)) + c * e[ax]
            cur = nxt
        return cur

    def _table(self, coeff_map: dict):
        if not coeff_map:
            return np.zeros((0, self.n), dtype=int), np.zeros(0)
        E = np.array(sorted(coeff_map), dtype=int).reshape(-1, self.n)
        c = np.array([float(coeff_map[tuple(e)]) for e in E])
        return E, c

    def _eval_table(self, table, pts: np.ndarray) -> np.ndarray:
        E, c = table
        if len(c) == 0:
            return np.zeros(len(pts))
        return np.prod(pts[:, None, :] ** E[None, :, :], axis=2) @ c

    def eval(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self._eval_table(self._table(self.coeff_map()), pts)

    def hessian_batch(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        P = len(pts)
        out = np.empty((P, self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                v = self._eval_table(self._table(self.derivative((i, j))), pts)
                out[:, i, j] = v
                out[:, j, i] = v
        return out

    def third_batch(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        P = len(pts)
        out = np.empty((P, self.n, self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                for k in range(j, self.n):
                    v = self._eval_table(self._table(self.derivative((i, j, k))), pts)
                    for perm in set(itertools.permutations((i, j, k))):
                        out[:, perm[0], perm[1], perm[2]] = v
        return out


def random_harmonic_poly(n: int, d: int, seed: int) -> HarmonicPoly:
    """Random rational coefficients projected exactly onto the harmonic kernel.

    Sampled coefficients live in [-10, 10] with denominators up to 64; the
    projection is exact, so laplacian_coeffs() of the output is empty.
    """
    if n < 2:
        raise UsageError("need n >= 2")
    if not 2 <= d <= 6:
        raise UsageError("degree must be between 2 and 6")
    P = harmonic_projector(n, d)
    mons = monomials(n, d)
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(8):
        nums = rng.integers(-640, 641, size=len(mons))
        dens = rng.integers(1, 65, size=len(mons))
        c = [Fraction(int(a), int(b)) for a, b in zip(nums, dens)]
        proj = [sum(P[i][j] * c[j] for j in range(len(c))) for i in range(len(c))]
        if any(x != 0 for x in proj):
            coeffs = tuple((mons[i], proj[i]) for i in range(len(proj)) if proj[i] != 0)
            return HarmonicPoly(n=n, d=d, coeffs=coeffs)
    raise UsageError("projection produced the zero polynomial repeatedly")


def poly_from_coeffs(n: int, d: int, entries) -> HarmonicPoly:
    """Build a polynomial from {exponent tuple: coefficient} (exact)."""
    coeffs = []
    for e, c in dict(entries).items():
        if len(e) != n or sum(e) != d:
            raise UsageError(f"exponent {e} is not degree {d} in {n} variables")
        fc = Fraction(c)
        if fc != 0:
            coeffs.append((tuple(e), fc))
    return HarmonicPoly(n=n, d=d, coeffs=tuple(sorted(coeffs)))
