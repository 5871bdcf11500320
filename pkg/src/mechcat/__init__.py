"""Dissipative generation of mechanical Schrodinger-cat states.

Simulator for a mechanical resonator coupled quadratically to a
bichromatically driven cavity: truncated-Fock linear algebra, Lindblad
master-equation integration, protocol parameter derivation, phase-space
and non-Gaussianity diagnostics, and a reproducible run driver with a
catalog of reference presets.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DimensionError, IntegrationError
from .fock import (
    DensityMatrix,
    HilbertSpace,
    Ket,
    Operator,
    annihilation,
    cat_even,
    coherent,
    creation,
    displacement,
    expect,
    matrix_exponential,
    number,
    parity,
    partial_trace,
    squeeze,
    tensor,
)
from .lindblad import (
    IntegratorConfig,
    LindbladModel,
    LindbladTerm,
    Trajectory,
    dissipator,
    evolve,
    liouvillian_matrix,
    rhs,
)
from .protocol import (
    DerivedParams,
    InitialStateKind,
    PhysicalParams,
    build_bipartite_model,
    build_reduced_model,
    derive_params,
    g2_from_geometry,
    initial_state,
    target_state,
    thermal_occupation,
)
from .analysis import (
    DecoherenceFit,
    GridSpec,
    WignerGrid,
    distance,
    fit_decoherence_rate,
    fit_exponential_decay,
    gamma_dec,
    hs_fidelity,
    ng_minimize,
    ng_witness,
    observables,
    rho_app,
    wigner,
    wigner_at_origin,
)
