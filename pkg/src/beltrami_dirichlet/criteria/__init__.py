"""Solvability criteria evaluated on grids or closed-form dilatations."""
from .oscillation import (bmo_norm_estimate, bmo_profile, default_disc_family, disc_stats,
                          fmo_annulus_bound_check, fmo_test, mean_oscillation)
from .phi import (CONDITIONS, PhiCondition, PhiTableError, condition_increments,
                  exponential_integrability, phi_condition_tests, phi_integral_budget,
                  phi_inverse, tangent_splice)
from .radial import (circle_mean, equicontinuity_bound, lehto_divergence_test, log_scale_tests,
                     modulus_bound, profile_from)
from .report import CRITERIA, criteria_report, default_sample_points, headline
from .verdicts import (DEFAULT_THRESHOLDS, INCONCLUSIVE, NOT_APPLICABLE, SATISFIED, VIOLATED,
                       CriteriaVerdict, Sampler, Thresholds, as_sampler, boundedness_verdict,
                       combine, divergence_verdict, ratio_verdict)
