import numpy as np
import pytest

import conestab as cs


class ConeCache:
    """Lazy shared cache of solved cones and their spectral results."""

    def __init__(self):
        self._cones = {}
        self._spectral = {}

    def cone(self, k, h):
        if (k, h) not in self._cones:
            self._cones[(k, h)] = cs.solve_cross_section(k, h)
        return self._cones[(k, h)]

    def spectral(self, k, h, method="shooting", grid_n=4096):
        key = (k, h, method, grid_n)
        if key not in self._spectral:
            self._spectral[key] = cs.rayleigh_lambda(self.cone(k, h), method, grid_n)
        return self._spectral[key]

    def verdict(self, k, h, grid_n=4096):
        return cs.stability_verdict(
            self.cone(k, h),
            grid_n=grid_n,
            fd=self.spectral(k, h, "fd", grid_n),
            shooting=self.spectral(k, h, "shooting", grid_n),
        )


@pytest.fixture(scope="session")
def cache():
    return ConeCache()


def cone_matrix(n_min=3, n_max=8):
    return [(k, n - k) for n in range(n_min, n_max + 1) for k in range(1, n)]


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.Philox(key=20260808))
