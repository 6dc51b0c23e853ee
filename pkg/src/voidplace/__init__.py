"""Sensor placement for detecting Poisson targets under an uncertain LGCP intensity."""
from .gp_prior import (FactorizationError, GaussianFieldPosterior, MaternParams, build_cov_matrix,
                       matern_cov, prior_field, sample_field)
from .grid import Grid1D, cell_center, integrate
from .ingest import (EventRecord, SegmentSpec, bimodal_log_field, bin_events, load_events,
                     synth_generate)
from .lgcp_fit import (ConvergenceError, EventCounts, laplace_fit, log_marginal_likelihood,
                       posterior_quantiles)
from .placement import (EnumerationCapError, GreedyTrace, MeanIntensityField, brute_force_place,
                        greedy_place, lazy_greedy_place, mean_intensity, objective_F)
from .sensor_model import Placement, SensorParams, detect_prob, miss_prob, miss_prob_field
from .void_eval import (IntensitySampleSet, VoidEstimate, arrival_count_pmf,
                        draw_intensity_samples, evaluate_prefixes, greedy_place_mc, h_function,
                        jensen_gap_sup_numeric, jensen_gap_upper_bound, jensen_lower_bound,
                        lambda_tilde, mc_void_probability)

__version__ = "0.1.0"
