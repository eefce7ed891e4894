"""Bond percolation on the oriented square lattice and max-linear models on the random DAGs it generates."""

from .lattice import (
    Direction,
    DomainError,
    LatticeEdge,
    LatticeNode,
    OutOfWindowError,
    StructuralError,
    Window,
    ancestors,
    ancestors_closed,
    children,
    delta,
    descendants,
    descendants_closed,
    parents,
)
from .percolation import (
    BondConfiguration,
    CriticalInterval,
    McEstimate,
    estimate_critical,
    estimate_oriented_theta,
    estimate_theta,
    estimate_two_point,
    joint_cluster,
    open_cluster,
    oriented_cluster,
    sample_configuration,
)
from .maxlinear import (
    CoefficientMatrix,
    MaxWeightedCheck,
    NoiseSpec,
    WeightedDag,
    ZeroPattern,
    coefficient_matrix,
    compare_zero_pattern,
    extend_max_weighted,
    grow_max_weighted,
    is_max_weighted,
    joint_cdf,
    realize,
    realize_many,
    scale_parameter,
)
from .dependence import (
    DependenceQuery,
    ExactPolynomial,
    SubDag,
    are_dependent,
    check_sigma_bound,
    common_ancestor_box_stats,
    common_ancestors,
    common_descendants,
    enlarge,
    enlargement_of,
    estimate_dependence_probability,
    estimate_enlargement_criticals,
    estimate_enlargement_probability,
    exact_event_probability,
    phase_sweep,
    sigma_event,
)

__version__ = "0.1.0"
