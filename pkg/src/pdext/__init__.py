"""Numerical toolkit for locally defined positive definite functions and their extensions."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .measure import (  # noqa: F401
    DiscreteMeasure,
    GriddedDensity,
    Measure,
    UniformGrid,
    cauchy_density,
    fourier_on_grid,
    fourier_transform,
    polya_density,
    total_mass,
)
from .kernel import (  # noqa: F401
    DomainSet,
    LocalKernel,
    Verdict,
    builtin_kernel,
    check_conditionally_negative,
    check_pd_integral,
    check_positive_definite,
    check_reflection_positive,
    gram_matrix,
    hermitian_symmetry_check,
)
from .rkhs import (  # noqa: F401
    AnchorSet,
    RkhsElement,
    def_space_dimension,
    interpolation_check,
    membership_functional,
    reproducing_defect,
    rkhs_evaluate,
    rkhs_inner,
    uniqueness_diagnostic,
)
from .operators import (  # noqa: F401
    BumpFunction,
    QuadratureSpec,
    conjugation_check,
    hermitian_defect,
    sjf_matrix,
    wf_evaluate,
    wf_inner,
)
from .extend import (  # noqa: F401
    ExtensionCandidate,
    compact_support_flag,
    convex_combination,
    from_measure,
    polya_extension,
    restriction_residual,
    zero_pad,
)
from .represent import (  # noqa: F401
    SpectralVector,
    embed_gamma,
    extension_via_representation,
    scattering_operator,
    v_translate,
)
from .gauss import (  # noqa: F401
    GpPaths,
    empirical_covariance,
    sample_stationary,
    sample_stationary_increment,
)
from .spectral import ExponentialFamily, exponential_gram, parseval_defect  # noqa: F401
