"""Matern covariance, jittered Cholesky factorization and Gaussian field draws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .grid import Grid1D

JITTER_START = 1e-10
JITTER_MAX = 1e-4


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky failed even after escalating the diagonal jitter."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


@dataclass(frozen=True)
class MaternParams:
    """Matern kernel hyperparameters.

    ``sigma2`` is the marginal variance of the log-intensity, ``zeta`` the
    smoothness and ``beta`` the spatial range in meters.  The inverse length
    scale ``kappa = sqrt(8 zeta) / beta`` is always derived.
    """

    sigma2: float
    zeta: float = 1.5
    beta: float = 150.0

    def __post_init__(self):
        for name in ("sigma2", "zeta", "beta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    @property
    def kappa(self) -> float:
        return math.sqrt(8.0 * self.zeta) / self.beta

    def to_dict(self) -> dict:
        return {"sigma2": self.sigma2, "zeta": self.zeta, "beta_m": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "MaternParams":
        return cls(sigma2=d["sigma2"], zeta=d.get("zeta", 1.5), beta=d["beta_m"])


@dataclass(frozen=True, eq=False)
class GaussianFieldPosterior:
    """Gaussian field on a grid: ``f ~ N(mean, L L^T)``.

    Used both for the prior and for the Laplace posterior of the log-intensity.
    """

    mean: np.ndarray
    cov_factor: np.ndarray
    grid: Grid1D
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        L = np.asarray(self.cov_factor, dtype=float)
        n = self.grid.n_cells
        if mean.shape != (n,) or L.shape != (n, n):
            raise ValueError(
                f"dimension mismatch: grid has {n} cells, mean {mean.shape}, factor {L.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov_factor", L)

    @property
    def cov(self) -> np.ndarray:
        return self.cov_factor @ self.cov_factor.T

    @property
    def marginal_var(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.cov_factor, self.cov_factor)


def matern_cov(params: MaternParams, r):
    """Matern covariance at distance(s) ``r``.

    Uses the closed form ``sigma2 (1 + kappa r) exp(-kappa r)`` when
    ``zeta == 1.5`` and the Bessel form otherwise.  Accepts scalars or arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise ValueError("distance must be non-negative")
    x = params.kappa * r_arr
    if params.zeta == 1.5:
        out = params.sigma2 * (1.0 + x) * np.exp(-x)
    else:
        nu = params.zeta
        with np.errstate(invalid="ignore", over="ignore"):
            out = (params.sigma2 * 2.0 ** (1.0 - nu) / special.gamma(nu)
                   * x ** nu * special.kv(nu, x))
        # kv overflows at 0 and underflows to 0 for large x
        out = np.where(x == 0, params.sigma2, out)
        out = np.where(np.isfinite(out), out, 0.0)
    if np.ndim(r) == 0:
        return float(out)
    return out


def cholesky_jittered(K: np.ndarray, scale: float, jitter: float = 0.0):
    """Lower Cholesky factor of ``K + jitter I``, escalating jitter on failure.

    Escalation starts at ``max(10 * jitter, JITTER_START * scale)`` and grows by
    10x up to ``JITTER_MAX * scale``.  Returns ``(L, jitter_used)``.
    """
    n = K.shape[0]
    eye = np.eye(n)
    tried = jitter
    try:
        return linalg.cholesky(K + jitter * eye, lower=True), jitter
    except linalg.LinAlgError:
        pass
    j = max(10.0 * jitter, JITTER_START * scale)
    while j <= JITTER_MAX * scale * (1 + 1e-12):
        tried = j
        try:
            return linalg.cholesky(K + j * eye, lower=True), j
        except linalg.LinAlgError:
            j *= 10.0
    raise FactorizationError(f"Cholesky failed; last jitter tried {tried:.3g}", tried)


def build_cov_matrix(grid: Grid1D, params: MaternParams, jitter: float = 0.0):
    """Covariance of the field at cell centers and its lower Cholesky factor.

    Returns ``(K, L, jitter_used)`` where ``K`` already includes the jitter
    that made the factorization succeed.
    """
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    c = grid.centers
    K = matern_cov(params, np.abs(c[:, None] - c[None, :]))
    K = np.atleast_2d(K)
    L, used = cholesky_jittered(K, params.sigma2, jitter)
    K = K + used * np.eye(grid.n_cells)
    return K, L, used


def prior_field(grid: Grid1D, params: MaternParams, prior_mean: float = 0.0,
                jitter: float = 0.0) -> GaussianFieldPosterior:
    _, L, used = build_cov_matrix(grid, params, jitter)
    return GaussianFieldPosterior(np.full(grid.n_cells, float(prior_mean)), L, grid,
                                  {"jitter": used})


def sample_field(posterior: GaussianFieldPosterior, seed) -> np.ndarray:
    """One draw ``mean + L z`` with ``z`` standard normal from ``seed``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(posterior.grid.n_cells)
    return posterior.mean + posterior.cov_factor @ z
