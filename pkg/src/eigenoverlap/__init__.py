"""Eigenvector-overlap correlation functions of the complex Ginibre ensemble.

The package evaluates limiting overlap correlation functions through the
permutation-lattice matrix and its eigenvector recursions, and verifies
every closed form against independent oracles: disc quadrature, exhaustive
combinatorics, and finite-N Monte Carlo simulation.
"""

from .analytic import (
    PointConfig,
    SeparationReport,
    disc_quadrature,
    frak_h,
    frak_n,
    frak_n_quadrature,
    h,
    h_quadrature,
    partial_fractions,
    rho2,
    separation,
    wirtinger_mixed_fd,
)
from .correlate import (
    CorrelationResult,
    PolynomialEval,
    coincidence_value,
    homogeneity_exponent,
    poly_L,
    poly_R,
    rho,
    rho4_closed,
    rho_factorized,
    vandermonde,
)
from .errors import (
    CoincidentPoints,
    DegenerateConfig,
    DegenerateSpectrum,
    EigenoverlapError,
    LatticeCapExceeded,
    NearDefective,
    NonConvergence,
    NotComparable,
    PoleCollision,
    ResolventPole,
    WindowOverlap,
)
from .ginibre import (
    EigenBasis,
    GinibreSample,
    MCAccumulator,
    MCConfig,
    diag_overlap_windows,
    eigenbasis,
    estimate_diag_overlap,
    estimate_rho_hat,
    mc_conditional_transfer,
    mc_F_N,
    mc_F_N_conditioned,
    overlap_trace,
    resolvent_product_trace,
    sample_ginibre,
    sample_triangular_fixed_diag,
    schur,
    substream,
)
from .permutations import (
    EMPTY,
    OrderedIndex,
    PartialPermutation,
    are_crossing,
    compose,
    cycles,
    downset,
    edge_set,
    enumerate_lattice,
    full_support_downset,
    hat_nonfixed,
    in_cyclic_order,
    interval_decomposition_oracle,
    invert,
    is_subloop,
    lattice_size,
    leq,
    leq_chain,
    leq_step,
    nonfixed,
    predecessors,
    restrict,
)
from .spectral import (
    DisintegratedMatrix,
    EigenSystem,
    NMatrix,
    TransferMatrix,
    build_M_nu,
    build_nmatrix,
    build_transfer_A,
    build_transfer_B,
    commutator_norm,
    conditional_F_product,
    eigen_residuals,
    exp_series,
    exp_spectral,
    solve_eigensystem,
    solve_left_eigenvectors,
    solve_right_eigenvectors,
)

__version__ = "0.1.0"
