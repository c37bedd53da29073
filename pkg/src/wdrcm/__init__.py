"""Weight-dependent spatial random graphs on the line: samplers, cluster
observables, effective decay exponents, and renormalization diagnostics."""

__version__ = "0.1.0"

from .errors import (DomainError, FormatError, IndexRangeError, NumericError,
                     ParameterError, WdrcmError)
from .models import (KERNEL_VARIANTS, PROFILE_VARIANTS, KernelSpec,
                     ModelParams, ProfileSpec, connection_probability)
from .points import (MarkedConfiguration, PointProcessSpec,
                     sample_configuration)
from .sampler import (GraphSample, sample_crossing_edges, sample_edges_layered,
                      sample_edges_naive, sample_finite_graph)
from .theory import (classify_regime, delta_eff_closed_form,
                     delta_eff_estimate, edge_marginal, integral_I)

__all__ = [
    "DomainError", "FormatError", "IndexRangeError", "NumericError",
    "ParameterError", "WdrcmError",
    "KERNEL_VARIANTS", "PROFILE_VARIANTS", "KernelSpec", "ModelParams",
    "ProfileSpec", "connection_probability",
    "MarkedConfiguration", "PointProcessSpec", "sample_configuration",
    "GraphSample", "sample_crossing_edges", "sample_edges_layered",
    "sample_edges_naive", "sample_finite_graph",
    "classify_regime", "delta_eff_closed_form", "delta_eff_estimate",
    "edge_marginal", "integral_I",
    "__version__",
]
