"""Generalized Cramer-Rao, Stam and uncertainty inequalities with q-Gaussian extremals."""

from .deformed import DeformationIndex, entropy_power, escort, exp_q, info_generating, ln_q, shannon_entropy
from .density import AnalyticDensity, GridDensity, read_grid, write_grid
from .estimation import Scenario, run_scenario, scan
from .extremal import ExtremalConfig, extremal_search
from .inequalities import (beta_function_inequality, check_location_cr, check_lutwak_cr, check_main_cr,
                           check_moment_entropy, check_q_cr, check_q_location_cr, check_stam, lutwak_chain_reports)
from .info_measures import (ParametricFamily, bias_divergence, escort_family, i_fisher_q, location_family, moment,
                            parametric_fisher, phi_fisher)
from .norms import Lp, LinearMap, NormSpec, WeightedLp, conjugate_exponent, holder_check, parse_norm
from .qgaussian import QGaussianParams, as_density, baseline_measures
from .quadrature import DEFAULT, QuadratureConfig
from .report import InequalityReport
from .uncertainty import (WaveFunction, check_uncertainty_euclidean, check_uncertainty_general, fourier,
                          heisenberg_check)

__version__ = "0.1.0"
