"""Model isoperimetric profiles and Cheeger constants under CD(K,N) in dimension one."""

__version__ = "0.1.0"

from .errors import (BudgetExceededError, CdisoError, DegenerateModelError,  # noqa: E402
                     DomainTooLongError, GenerationFailedError, InvalidParametersError,
                     MalformedFixtureError, NonNormalizedError, RampOverlapError, ZeroMassError)
from .kernels import (CurvatureParams, TruncatedJacobian, c_delta, jacobian,  # noqa: E402
                      jacobian_support, s_delta, sigma, tau)
from .density1d import (Density1D, check_cd_density, constant_density,  # noqa: E402
                        make_model_density, quadrature, sample_synthetic_density,
                        tabulated_density)
from .sets1d import (IntervalUnion, complement, measure, minkowski_content,  # noqa: E402
                     perimeter, relaxation_perimeter_oracle)
from .profile import (ProfilePoint, ProfileTable, brute_force_profile,  # noqa: E402
                      density_cheeger, density_profile)
from .model import (ModelMinimizer, cap_radius, model_cheeger, model_profile,  # noqa: E402
                    model_profile_table, suspension_density, verify_main_theorem_1d)
from .localization import (Disintegration, Needle, aggregate_perimeter_bound,  # noqa: E402
                           build_suspension_fixture, validate_disintegration)
from .estimators import DensityProfileEstimator, ModelProfileEstimator  # noqa: E402
