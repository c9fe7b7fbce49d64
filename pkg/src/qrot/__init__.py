"""Spherical warped-product spacetimes as rotation Lorentzian hypersurfaces
Q(r) of Minkowski space: embedding construction, extrinsic geometry and
classification, and numerical search for stationary spacelike submanifolds
through the characterization lap(psi) + q P = 0.
"""

from ._kernels import BACKEND as kernel_backend
from .errors import (AdmissibilityError, DegenerateStarError, NotSpacelikeError,
                     NumericalError, OutsideDomainError, QrotError,
                     ValidationError)
from .flow import (FlowConfig, FlowTrace, desitter_geodesic, product_geodesic,
                   refinement_study, slice_sphere, stationarize)
from .immersion import (DiscreteImmersion, SimplicialDomain, StationarityReport,
                        grad_time_sq, induced_gram, integral_identity,
                        laplace_beltrami, mean_curvature_ambient,
                        mean_curvature_in_Q, stationarity_report,
                        stationarity_terms, timelike_projection_check,
                        trace_diagnostics, vertex_frames)
from .minkowski import (CausalCharacter, causal_character, lorentz_inner,
                        spatial_radius)
from .profile import (ProfileFunction, QuadratureConfig, TabulatedFunction,
                      WarpingFunction, check_admissible, profile_from_expr,
                      profile_to_warp, warp_to_profile, warping_from_expr)
from .qsurface import RotationHypersurface, SurfaceClassification, ncc_check
from .scalarfn import differentiate, evaluate, parse_expr, to_string

__version__ = "0.1.0"
