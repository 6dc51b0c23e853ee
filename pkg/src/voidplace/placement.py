"""Surrogate coverage objective and its greedy / exhaustive maximizers.

The objective of a placement ``a`` is

    F(a) = int lam_bar(s) ds - int lam_bar(s) pi(s, a) ds

where ``lam_bar`` is the posterior mean of the horizon-scaled intensity and
``pi`` the miss probability.  F is non-negative, monotone and submodular on
the candidate cells, so greedy selection is within ``1 - 1/e`` of optimal.
Maximizing F is the same as maximizing the Jensen lower bound
``exp(-int lam_bar pi ds)`` on the void probability.
"""
from __future__ import annotations

import heapq
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gp_prior import GaussianFieldPosterior
from .grid import Grid1D
from .sensor_model import Placement, SensorParams, detection_matrix, miss_prob_field

DEFAULT_ENUMERATION_CAP = 5_000_000
_CHUNK = 16384


class EnumerationCapError(ValueError):
    """Brute-force search would enumerate more subsets than allowed."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"brute force needs {required} subsets, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True, eq=False)
class MeanIntensityField:
    """Expected horizon-scaled intensity per cell (events per meter over T)."""

    lambda_bar: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        lb = np.asarray(self.lambda_bar, dtype=float)
        if lb.shape != (self.grid.n_cells,):
            raise ValueError("lambda_bar does not match grid")
        if not np.all(np.isfinite(lb)) or np.any(lb < 0):
            raise ValueError("lambda_bar must be finite and non-negative")
        object.__setattr__(self, "lambda_bar", lb)

    @property
    def total(self) -> float:
        return self.grid.integrate(self.lambda_bar)


@dataclass
class GreedyTrace:
    chosen: Placement
    gains: list = field(default_factory=list)
    objective_values: list = field(default_factory=list)


def mean_intensity(posterior: GaussianFieldPosterior, horizon_ratio: float) -> MeanIntensityField:
    """Lognormal mean ``ratio * exp(m + var / 2)`` of the scaled intensity."""
    if not horizon_ratio > 0:
        raise ValueError("horizon_ratio must be positive")
    expo = posterior.mean + 0.5 * posterior.marginal_var
    with np.errstate(over="ignore"):
        lam = horizon_ratio * np.exp(expo)
    bad = np.flatnonzero(~np.isfinite(lam))
    if bad.size:
        raise OverflowError(f"mean intensity overflows at cell {int(bad[0])}")
    return MeanIntensityField(lam, posterior.grid)


def objective_F(field: MeanIntensityField, params: SensorParams, placement: Placement) -> float:
    grid = field.grid
    pi = miss_prob_field(params, grid, placement)
    return field.total - grid.integrate(field.lambda_bar * pi)


def _check_candidates(grid: Grid1D, candidates, M: int) -> np.ndarray:
    cand = np.unique(np.asarray(list(range(grid.n_cells)) if candidates is None
                                else list(candidates), dtype=int))
    if cand.size and (cand[0] < 0 or cand[-1] >= grid.n_cells):
        raise ValueError("candidate cell outside the grid")
    if M < 0:
        raise ValueError("M must be non-negative")
    if M > cand.size:
        raise ValueError(f"cannot place {M} sensors on {cand.size} candidates")
    return cand


def _objective(total, lambda_bar, miss, spacing) -> float:
    # same arithmetic as objective_F / Grid1D.integrate, without the input checks
    return total - float((lambda_bar * miss).sum() * spacing)


def _gains(G_rows: np.ndarray, weighted_miss: np.ndarray) -> np.ndarray:
    # Shared by greedy and lazy greedy so their gains agree bit for bit.
    return (G_rows * weighted_miss).sum(axis=1)


def greedy_place(field: MeanIntensityField, params: SensorParams, candidates=None,
                 M: int = 1) -> GreedyTrace:
    """Add the candidate with the largest marginal gain, ``M`` times.

    Ties go to the lowest cell index.
    """
    grid = field.grid
    cand = _check_candidates(grid, candidates, M)
    G = detection_matrix(params, grid, cand)
    w = field.lambda_bar * grid.spacing
    miss = np.ones(grid.n_cells)
    alive = np.ones(cand.size, dtype=bool)
    total = field.total
    chosen, gains, values = [], [], []
    for _ in range(M):
        g = _gains(G, w * miss)
        g[~alive] = -np.inf
        k = int(np.argmax(g))
        alive[k] = False
        miss = miss * (1.0 - G[k])
        chosen.append(cand[k])
        gains.append(float(g[k]))
        values.append(_objective(total, field.lambda_bar, miss, grid.spacing))
    return GreedyTrace(Placement(tuple(chosen), grid), gains, values)


def lazy_greedy_place(field: MeanIntensityField, params: SensorParams, candidates=None,
                      M: int = 1) -> GreedyTrace:
    """Greedy selection with stale upper bounds kept in a heap.

    Produces the same placement and gains as :func:`greedy_place`.
    """
    grid = field.grid
    cand = _check_candidates(grid, candidates, M)
    G = detection_matrix(params, grid, cand)
    w = field.lambda_bar * grid.spacing
    miss = np.ones(grid.n_cells)
    total = field.total
    chosen, gains, values = [], [], []
    if M == 0:
        return GreedyTrace(Placement((), grid))
    g0 = _gains(G, w * miss)
    # (-bound, candidate position, round the bound was computed in)
    heap = [(-float(g), k, 0) for k, g in enumerate(g0)]
    heapq.heapify(heap)
    for step in range(M):
        while True:
            neg, k, rnd = heapq.heappop(heap)
            if rnd == step:
                break
            g = float(_gains(G[[k]], w * miss)[0])
            heapq.heappush(heap, (-g, k, step))
        miss = miss * (1.0 - G[k])
        chosen.append(cand[k])
        gains.append(-neg)
        values.append(_objective(total, field.lambda_bar, miss, grid.spacing))
    return GreedyTrace(Placement(tuple(chosen), grid), gains, values)


def _best_in_chunk(combos: np.ndarray, Q: np.ndarray, lam: np.ndarray):
    miss = Q[combos[:, 0]]
    for j in range(1, combos.shape[1]):
        miss = miss * Q[combos[:, j]]
    loss = miss @ lam
    k = int(np.argmin(loss))
    return float(loss[k]), combos[k]


def _combo_chunks(n: int, M: int):
    it = itertools.combinations(range(n), M)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, _CHUNK)),
                           dtype=np.int64)
        if flat.size == 0:
            return
        yield flat.reshape(-1, M)


def brute_force_place(field: MeanIntensityField, params: SensorParams, candidates=None,
                      M: int = 1, cap: int = DEFAULT_ENUMERATION_CAP,
                      workers: int = 1) -> Placement:
    """Exhaustive maximizer of F over ``M``-subsets of the candidates.

    Ties go to the lexicographically smallest index tuple.  The search is
    split into fixed-size chunks; ``workers`` only changes how the chunks are
    scheduled, never the result.
    """
    grid = field.grid
    cand = _check_candidates(grid, candidates, M)
    required = math.comb(cand.size, M)
    if required > cap:
        raise EnumerationCapError(required, cap)
    if M == 0:
        return Placement((), grid)
    Q = 1.0 - detection_matrix(params, grid, cand)
    lam = field.lambda_bar
    chunks = _combo_chunks(cand.size, M)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda c: _best_in_chunk(c, Q, lam), chunks))
    else:
        results = [_best_in_chunk(c, Q, lam) for c in chunks]
    best_loss, best = results[0]
    for loss, combo in results[1:]:
        if loss < best_loss:
            best_loss, best = loss, combo
    return Placement(tuple(int(cand[k]) for k in best), grid)
