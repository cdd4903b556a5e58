"""clawlab: a desk-scale laboratory for entropy solutions of scalar
conservation laws with space-dependent flux f(x, u)."""

from .errors import (BadWindow, BlowUp, CFLViolation, ClawError, ConfigError,
                     EmptyCone, GridMismatch, MissingTimeLevels, NonFiniteFlux,
                     QuadratureNonConvergent, SampleNearShock, SingularPoint,
                     SupportExceedsDomain, UnknownFlux)
from .flux import (FluxSpec, catalog_lookup, catalog_names, lipschitz_constant,
                   uniform_diffquot_deficit)
from .entropy import (EntropyPair, SmoothEntropy, default_k0_sweep,
                      kruzkov_div_deficit, kruzkov_limit_deficit, leibniz_check,
                      make_kruzkov_pair, make_smooth_pair, q_build_ibp,
                      q_build_quadrature, sqrt_entropy)
from .mollifiers import (ConeSpec, Mollifier, TestFunction, bump_test_function,
                         chi_epsilon, contraction_test_function, doubling_kernel,
                         kernel_cdf, kernel_cdf_quadrature, mollifier_constant,
                         omega_value)
from .grids import (GridField, InitialData, box_data, constant_data, file_data,
                    load_field, read_csv, read_slab, read_slabs, riemann_data,
                    sine_data, write_csv, write_slab, write_slabs)
from .solver import (SchemeConfig, discrete_entropy_max_violation,
                     exact_riemann_burgers, l1_distance_full,
                     l1_distance_on_ball, solve, solve_viscous)
from .verifier import (ResidualReport, cone_contraction_profile,
                       doubling_diagnostics, entropy_residual,
                       find_smooth_samples, global_contraction_check, kato_lhs,
                       uniqueness_experiment, write_profile_csv)

__version__ = "0.1.0"
