"""Optimal monotone categorization of a quality interval.

A sender commits to pooling intervals of quality; a receiver with prior R
pays the conditional mean; the sender's payoff is weighted by S.  The
optimum follows from the lower convex envelope of H = S o R^-1.
"""
from .analysis import (DiagnosticsReport, FlipReport, check_alternation, check_fosd_on, check_full_pooling,
                       check_full_separation, check_lr_on, diagnose, flip_report)
from .errors import FlipUndefined, ModelError
from .priors import (QualitySupport, ReceiverCdf, SenderWeighting, SignedGridMeasure, as_weighting,
                     build_receiver, build_sender, transform_group_mixture, transform_peer_effects,
                     transform_quadratic, transform_retail, transform_state_dependent)
from .schooling import (LearningFunction, SchoolingConfig, SchoolSolution, build_learning, censorship_config,
                        censorship_threshold_sweep, check_school_full_pooling, induce_sender, solve_school,
                        verify_ic)
from .solver import (Categorization, PercentileCurve, Solution, compose_h, extract_categorization, flip_problem,
                     lower_convex_envelope, solve)
from .valuation import (dp_oracle, pool_means, posterior, posterior_mean, random_categorization, sender_value,
                        sender_values, weighting_psi)

__version__ = "0.1.0"
