"""Integral-uniform norms ``||f||_{m,inf} = E max_j |f(x_j)|`` and random polynomial bounds."""
from .norm_core import (DiscreteFunction, FormatError, NormEstimate, avg_top_quantile, indicator_norm,
                        lambda_value, m_norm_exact, m_norm_from_lambda, m_norm_mc, m_norm_of_values,
                        read_discrete_csv, set_average, theorem3_bound)
from .trig_poly import (NetVector, TrigPoly, analytic_derivative, discretization_gap, eval_poly, kernel,
                        net_m_norm, riesz_derivative, sample_on_net, uniform_norm_estimate)
from .random_ensemble import (BoundReport, EnsembleSpec, FunctionSystem, corollary2_rhs, expected_m_norm,
                              r_statistic, random_poly_net, salem_zygmund_ratio, sample_xi, theorem1_rhs,
                              theorem2_rhs)
from .sign_select import (Certificate18, LemmaInstance, dyadic_bound, problem18_lhs, search_signs,
                          sharpness_seminorm, sharpness_witness, verify_18)

__version__ = "0.1.0"
