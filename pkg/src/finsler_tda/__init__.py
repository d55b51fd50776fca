"""Topological data analysis over Finsler quasi-metric spaces."""
from .complexes import (FilteredComplex, PointCloud, build_cech, build_complex, build_delta,
                        build_rips, inclusion_suite, verify_inclusion)
from .errors import *  # noqa: F401,F403
from .geometry import FinslerBall, convexity_probe, enclosing_radius, solve_minimax
from .io import CircleSpec, circle_cloud, gen_circle
from .metrics import (MetricSpec, alpha_randers, burg, check_isometry, distance_matrix, euclidean,
                      figure4_randers, fisher, metric_from_config, validate_metric)
from .persistence import PersistenceDiagram, betti_at, bottleneck_distance, compute_persistence
from .stability import Correspondence, distortion, gromov_hausdorff_exact, stability_trial

__version__ = "0.1.0"
