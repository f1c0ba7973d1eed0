"""Growth/diffusion operator splitting for measures on closed plane curves."""

from .geometry import (DegenerateCurveError, EmbeddedCurve, build_circle, build_ellipse,
                       integrate, laplace_beltrami, tangential_trace, weighted_norm)
from .measure import SignalMeasure, cosine, from_density, uniform
from .flow import GrowthField, flow_points, named_field, polynomial_field, pullback, pushforward
from .heat import HeatStepConfig, heat_semigroup, heat_step
from .splitting import (SchemeOrder, SplitSchedule, bracket_by_definition, bracket_commutator,
                        epsilon_sweep, run_scheme)
from .bracket_analytic import bracket_density, bracket_weak, perturbation_operator, reference_s1
from .wasserstein import (DiscreteMeasure, circular_w2, circular_w2_lp, holder_certificate,
                          wasserstein_exact)

__version__ = "0.1.0"
