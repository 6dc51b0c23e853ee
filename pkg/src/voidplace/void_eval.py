"""Monte-Carlo void probability, its Jensen lower bound and gap certificate.

For a placement ``a`` the number of undetected targets over the horizon is
Poisson with mean ``Lt(a) = int (T/Tc) lam(s) pi(s, a) ds``, a random variable
through the uncertain intensity.  The void probability is ``E[exp(-Lt)]``;
Jensen gives ``exp(-E[Lt]) <= E[exp(-Lt)]``, and the gap is bounded by
``var(Lt) * (1 - exp(-mu) - mu exp(-mu)) / mu**2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .gp_prior import GaussianFieldPosterior
from .grid import Grid1D
from .placement import MeanIntensityField, _check_candidates
from .sensor_model import Placement, SensorParams, detection_matrix, miss_prob_field

DEFAULT_N_SAMPLES = 10_000
BLOCK_SIZE = 512
_SERIES_CUTOFF = 1e-6
_MU_CUTOFF = 1e-8


@dataclass(frozen=True, eq=False)
class IntensitySampleSet:
    """Posterior draws of ``(T/Tc) * exp(f)``, one row per draw."""

    samples: np.ndarray
    seed: int
    grid: Grid1D

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] != self.grid.n_cells:
            raise ValueError(f"samples must have shape (W, {self.grid.n_cells}), got {s.shape}")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("intensity samples must be finite and non-negative")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class VoidEstimate:
    vp_mc: float
    vp_se: float
    lower_bound: float
    mu_u: float
    sigma2_u: float
    gap: float
    gap_bound: float

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in
                ("vp_mc", "vp_se", "lower_bound", "gap", "gap_bound", "mu_u", "sigma2_u")}


def _draw_block(posterior: GaussianFieldPosterior, horizon_ratio: float, seq, n: int):
    rng = np.random.default_rng(seq)
    z = rng.standard_normal((n, posterior.grid.n_cells))
    f = posterior.mean + z @ posterior.cov_factor.T
    with np.errstate(over="ignore"):
        return horizon_ratio * np.exp(f)


def draw_intensity_samples(posterior: GaussianFieldPosterior, horizon_ratio: float,
                           n_samples: int = DEFAULT_N_SAMPLES, seed: int = 0,
                           workers: int = 1) -> IntensitySampleSet:
    """Draw ``n_samples`` scaled-intensity fields from the posterior.

    Draws come in fixed blocks of ``BLOCK_SIZE`` whose seeds are spawned from
    ``seed``, so the output does not depend on ``workers``.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if not horizon_ratio > 0:
        raise ValueError("horizon_ratio must be positive")
    n_blocks = -(-n_samples // BLOCK_SIZE)
    seqs = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE) for b in range(n_blocks)]
    job = lambda b: _draw_block(posterior, horizon_ratio, seqs[b], sizes[b])  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(job, range(n_blocks)))
    else:
        blocks = [job(b) for b in range(n_blocks)]
    return IntensitySampleSet(np.vstack(blocks), int(seed), posterior.grid)


def lambda_tilde(sample, params: SensorParams, placement: Placement) -> float:
    """Expected number of undetected targets for one intensity draw."""
    grid = placement.grid
    return grid.integrate(np.asarray(sample, dtype=float) * miss_prob_field(params, grid, placement))


def lambda_tilde_all(samples: IntensitySampleSet, miss_field: np.ndarray) -> np.ndarray:
    """``Lt_j`` for every draw ``j`` given a precomputed miss field."""
    return samples.samples @ (miss_field * samples.grid.spacing)


def void_from_lambda_tilde(lt: np.ndarray) -> tuple:
    """``(vp_mc, vp_se, mu_u, sigma2_u)`` from undetected-count means ``lt``."""
    lt = np.asarray(lt, dtype=float)
    W = lt.size
    v = np.exp(-lt)
    vp = float(v.mean())
    # shifting by a data point keeps the spread of identical draws exactly 0
    se = float((v - v[0]).std(ddof=1) / math.sqrt(W)) if W > 1 else float("nan")
    mu = float(lt.mean())
    var = float((lt - lt[0]).var(ddof=1)) if W > 1 else 0.0
    return vp, se, mu, var


def mc_void_probability(samples: IntensitySampleSet, params: SensorParams,
                        placement: Placement, mean_field: MeanIntensityField | None = None
                        ) -> VoidEstimate:
    """Monte-Carlo void probability of ``placement`` with moment diagnostics.

    The Jensen lower bound is ``exp(-int lam_bar pi ds)`` from ``mean_field``
    when given, otherwise ``exp(-mu_u)`` from the sample mean.
    """
    pi = miss_prob_field(params, samples.grid, placement)
    return _estimate(samples, pi, mean_field)


def _estimate(samples, pi, mean_field):
    lt = lambda_tilde_all(samples, pi)
    vp, se, mu, var = void_from_lambda_tilde(lt)
    if mean_field is None:
        lb = math.exp(-mu)
    else:
        lb = math.exp(-mean_field.grid.integrate(mean_field.lambda_bar * pi))
    return VoidEstimate(vp, se, lb, mu, var, vp - lb, jensen_gap_upper_bound(mu, var))


def evaluate_prefixes(samples: IntensitySampleSet, params: SensorParams, placement: Placement,
                      mean_field: MeanIntensityField | None = None, m_max: int | None = None):
    """Void estimates for the first ``M`` sensors, ``M = 0 .. m_max``.

    One sample set is shared by every prefix.
    """
    grid = samples.grid
    m_max = len(placement) if m_max is None else min(m_max, len(placement))
    G = detection_matrix(params, grid, placement.cells) if placement.cells else None
    pi = np.ones(grid.n_cells)
    out = [_estimate(samples, pi, mean_field)]
    for m in range(m_max):
        pi = pi * (1.0 - G[m])
        out.append(_estimate(samples, pi, mean_field))
    return out


def jensen_lower_bound(field: MeanIntensityField, params: SensorParams,
                       placement: Placement) -> float:
    pi = miss_prob_field(params, field.grid, placement)
    return math.exp(-field.grid.integrate(field.lambda_bar * pi))


def jensen_gap_upper_bound(mu_u: float, sigma2_u: float) -> float:
    """Closed-form Jensen-gap bound ``sigma2 (1 - e^-mu - mu e^-mu) / mu^2``."""
    if mu_u < 0 or sigma2_u < 0:
        raise ValueError("mu_u and sigma2_u must be non-negative")
    if mu_u < _MU_CUTOFF:
        return 0.5 * sigma2_u
    # -expm1(-mu) keeps precision for small mu
    num = -math.expm1(-mu_u) - mu_u * math.exp(-mu_u)
    return sigma2_u * num / (mu_u * mu_u)


def gap_expression(mu_u: float, sigma2_u: float, lt):
    """Bracketed Jensen-gap expression at ``Lt`` (vectorized), times ``sigma2_u``.

    Rewritten as ``sigma2 e^-mu h(Lt - mu)`` so the removable singularity at
    ``Lt = mu`` evaluates to ``sigma2 e^-mu / 2``.
    """
    y = np.asarray(lt, dtype=float) - mu_u
    return sigma2_u * math.exp(-mu_u) * h_function(y)


def jensen_gap_sup_numeric(mu_u: float, sigma2_u: float, lt_grid) -> float:
    """Maximum of :func:`gap_expression` over a grid of ``Lt`` values."""
    return float(np.max(gap_expression(mu_u, sigma2_u, lt_grid)))


def h_function(y):
    """``(e^-y - 1 + y) / y^2`` with a series branch near zero."""
    y_arr = np.asarray(y, dtype=float)
    small = np.abs(y_arr) < _SERIES_CUTOFF
    # extended precision limits cancellation in expm1(-y) + y near the cutoff
    ys = np.where(small, 1.0, y_arr).astype(np.longdouble)
    with np.errstate(over="ignore"):
        direct = ((np.expm1(-ys) + ys) / (ys * ys)).astype(float)
    series = 0.5 - y_arr / 6.0 + y_arr * y_arr / 24.0
    out = np.where(small, series, direct)
    return float(out) if np.ndim(y) == 0 else out


def arrival_count_pmf(big_lambda: float, horizon_multiplier: float, n: int) -> float:
    """Poisson probability of ``n`` arrivals when the mean is ``big_lambda * T``."""
    if big_lambda < 0 or not horizon_multiplier > 0 or n < 0:
        raise ValueError("invalid arguments")
    mean = big_lambda * horizon_multiplier
    if mean == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mean) - mean - special.gammaln(n + 1))


def greedy_place_mc(samples: IntensitySampleSet, params: SensorParams, candidates=None,
                    M: int = 1):
    """Greedy selection that scores candidates by Monte-Carlo void probability.

    The expensive baseline the surrogate replaces: every round evaluates the
    estimator for every remaining candidate.  Returns ``(placement, vp_values)``.
    """
    grid = samples.grid
    cand = _check_candidates(grid, candidates, M)
    Q = 1.0 - detection_matrix(params, grid, cand)
    S = samples.samples * grid.spacing
    pi = np.ones(grid.n_cells)
    alive = np.ones(cand.size, dtype=bool)
    chosen = Placement((), grid)
    values = []
    for _ in range(M):
        idx = np.flatnonzero(alive)
        lt = S @ (Q[idx] * pi).T
        vp = np.exp(-lt).mean(axis=0)
        j = int(np.argmax(vp))
        k = idx[j]
        alive[k] = False
        pi = pi * Q[k]
        chosen = chosen.add(cand[k])
        values.append(float(vp[j]))
    return chosen, values
