"""
Greedy versus exhaustive placement
==================================

For 2 to 5 sensors the greedy placement is compared with the exhaustive
optimum of the surrogate objective (candidates on every other cell), both
scored by Monte-Carlo void probability on shared draws.  Also times greedy on
the surrogate against greedy driven directly by Monte-Carlo void probability.
"""
import time

from voidplace import (Grid1D, MaternParams, SensorParams, bimodal_log_field, brute_force_place,
                       draw_intensity_samples, greedy_place, laplace_fit, mc_void_probability,
                       mean_intensity, synth_generate)
from voidplace.void_eval import greedy_place_mc

grid = Grid1D(0.0, 50.0, 100)
counts = synth_generate(bimodal_log_field(grid, base=-5.5, scale=2.5), grid, seed=7)
post = laplace_fit(counts, -4.4, MaternParams(0.5, 1.5, 300.0))
sensor = SensorParams(0.95, 5000.0)
lam = mean_intensity(post, 0.05)
samples = draw_intensity_samples(post, 0.05, 10_000, seed=3)
candidates = range(0, 100, 2)

print(f"{'M':>2} {'greedy cells':>22} {'optimal cells':>22} {'VP ratio %':>10} {'t_opt (s)':>9}")
for M in (2, 3, 4, 5):
    g = greedy_place(lam, sensor, candidates, M).chosen
    t0 = time.perf_counter()
    opt = brute_force_place(lam, sensor, candidates, M)
    t_opt = time.perf_counter() - t0
    ratio = 100 * mc_void_probability(samples, sensor, g).vp_mc / mc_void_probability(
        samples, sensor, opt).vp_mc
    print(f"{M:2d} {str(sorted(g.cells)):>22} {str(sorted(opt.cells)):>22} {ratio:10.2f} {t_opt:9.2f}")

###############################################################################
# Surrogate-driven versus Monte-Carlo-driven greedy for 50 sensors.
t0 = time.perf_counter()
greedy_place(lam, sensor, None, 50)
t_sur = time.perf_counter() - t0
t0 = time.perf_counter()
greedy_place_mc(samples, sensor, None, 50)
t_mc = time.perf_counter() - t0
print(f"surrogate greedy {t_sur:.4f}s, Monte-Carlo greedy {t_mc:.2f}s ({t_mc / t_sur:.0f}x)")
