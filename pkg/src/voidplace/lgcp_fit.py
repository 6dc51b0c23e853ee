"""Laplace approximation to the posterior of a gridded log-Gaussian Cox process.

Counts in cell ``i`` are modelled as ``Poisson(exp(f_i) * ds)`` given the
log-intensity ``f`` (events per meter per collection window), with a Matern
Gaussian prior ``f ~ N(m0, K)``.  The posterior is approximated by a Gaussian
at its mode, found by damped Newton iterations.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special, stats

from .gp_prior import GaussianFieldPosterior, MaternParams, build_cov_matrix, cholesky_jittered
from .grid import Grid1D

logger = logging.getLogger(__name__)

MAX_ITER = 100
STEP_TOL = 1e-8
MAX_HALVINGS = 30


class ConvergenceError(RuntimeError):
    """Newton iterations did not reach the step tolerance."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True, eq=False)
class EventCounts:
    counts: np.ndarray
    collection_span: float
    grid: Grid1D
    n_excluded: int = 0

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (self.grid.n_cells,):
            raise ValueError(f"counts shape {c.shape} does not match {self.grid.n_cells} cells")
        if np.any(c < 0) or np.any(c != np.round(c)):
            raise ValueError("counts must be non-negative integers")
        if not self.collection_span > 0:
            raise ValueError("collection_span must be positive")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


class _Problem:
    """Log-posterior pieces shared by the fit and the evidence."""

    def __init__(self, counts: EventCounts, prior_mean: float, prior: MaternParams,
                 jitter: float = 0.0):
        self.grid = counts.grid
        self.y = counts.counts.astype(float)
        self.ds = self.grid.spacing
        self.m0 = np.full(self.grid.n_cells, float(prior_mean))
        self.K, self.Lp, self.jitter = build_cov_matrix(self.grid, prior, jitter)

    def prior_solve(self, v):
        return linalg.cho_solve((self.Lp, True), v)

    def loglik(self, f):
        y, ds = self.y, self.ds
        return float(np.sum(y * (f + np.log(ds)) - np.exp(f) * ds - special.gammaln(y + 1)))

    def log_post(self, f):
        d = f - self.m0
        return self.loglik(f) - 0.5 * float(d @ self.prior_solve(d))

    def gradient(self, f):
        return self.y - np.exp(f) * self.ds - self.prior_solve(f - self.m0)

    def b_factor(self, f):
        """Cholesky of ``B = I + S K S`` with ``S = sqrt(W)``."""
        s = np.sqrt(np.exp(f) * self.ds)
        B = np.eye(len(f)) + s[:, None] * self.K * s[None, :]
        return s, linalg.cholesky(B, lower=True)

    def newton_step(self, f):
        # (K^-1 + W)^-1 g = K g - K S B^-1 S K g
        g = self.gradient(f)
        s, LB = self.b_factor(f)
        Kg = self.K @ g
        return Kg - self.K @ (s * linalg.cho_solve((LB, True), s * Kg))


def _newton(prob: _Problem):
    f = prob.m0.copy()
    psi = prob.log_post(f)
    trace = [{"iter": 0, "log_post": psi, "step": None, "halvings": 0}]
    for it in range(1, MAX_ITER + 1):
        delta = prob.newton_step(f)
        t = 1.0
        halvings = 0
        tol = 1e-12 * max(1.0, abs(psi))
        while True:
            f_new = f + t * delta
            psi_new = prob.log_post(f_new)
            if np.isfinite(psi_new) and psi_new >= psi - tol:
                break
            if halvings == MAX_HALVINGS:
                raise ConvergenceError(
                    f"line search failed at iteration {it}", trace)
            t *= 0.5
            halvings += 1
        step = float(np.max(np.abs(t * delta)))
        f, psi = f_new, psi_new
        trace.append({"iter": it, "log_post": psi, "step": step, "halvings": halvings})
        logger.debug("newton iter %d: log_post=%.10g step=%.3g", it, psi, step)
        if step < STEP_TOL:
            return f, trace
    raise ConvergenceError(f"no convergence after {MAX_ITER} iterations", trace)


def laplace_fit(counts: EventCounts, prior_mean: float, prior: MaternParams,
                jitter: float = 0.0) -> GaussianFieldPosterior:
    """Gaussian approximation ``N(mode, (K^-1 + W)^-1)`` to ``p(f | counts)``.

    Raises ConvergenceError (carrying the iteration trace) when the Newton
    step does not drop below ``STEP_TOL`` within ``MAX_ITER`` iterations.
    """
    prob = _Problem(counts, prior_mean, prior, jitter)
    mode, trace = _newton(prob)
    s, LB = prob.b_factor(mode)
    V = linalg.solve_triangular(LB, s[:, None] * prob.K, lower=True)
    cov = prob.K - V.T @ V
    cov = 0.5 * (cov + cov.T)
    L, post_jitter = cholesky_jittered(cov, float(np.max(np.diag(cov))), 0.0)
    grad = prob.gradient(mode)
    diagnostics = {
        "converged": True,
        "iterations": trace[-1]["iter"],
        "trace": trace,
        "grad_max_norm": float(np.max(np.abs(grad))),
        "prior_jitter": prob.jitter,
        "posterior_jitter": post_jitter,
        "log_post": trace[-1]["log_post"],
    }
    return GaussianFieldPosterior(mode, L, counts.grid, diagnostics)


def log_posterior_gradient(counts: EventCounts, prior_mean: float, prior: MaternParams,
                           f, jitter: float = 0.0) -> np.ndarray:
    """Gradient of the unnormalized log-posterior at ``f``."""
    return _Problem(counts, prior_mean, prior, jitter).gradient(np.asarray(f, dtype=float))


def log_marginal_likelihood(counts: EventCounts, prior_mean: float, prior: MaternParams,
                            jitter: float = 0.0) -> float:
    """Laplace estimate of ``log p(counts)`` under the given prior.

    Equal to the log-likelihood plus the quadratic prior term at the mode,
    plus ``0.5 log det(post cov) - 0.5 log det(prior cov)``.
    """
    prob = _Problem(counts, prior_mean, prior, jitter)
    mode, _ = _newton(prob)
    _, LB = prob.b_factor(mode)
    # 0.5 log det(post) - 0.5 log det(prior) = -0.5 log det(B)
    return prob.log_post(mode) - float(np.sum(np.log(np.diag(LB))))


def posterior_quantiles(posterior: GaussianFieldPosterior, q: float) -> np.ndarray:
    """Per-cell ``q``-quantile of ``exp(f)`` under the lognormal marginals."""
    if not 0 < q < 1:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    z = stats.norm.ppf(q)
    return np.exp(posterior.mean + z * np.sqrt(posterior.marginal_var))
