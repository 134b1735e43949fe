"""Spatial entanglement of SPDC photon pairs pumped by twisted Gaussian Schell-model beams."""

from .estimator import SPDCEntanglementTransformer
from .exceptions import (
    ConvergenceFailure,
    InfeasibleWaist,
    InvalidCovarianceMatrix,
    InvalidParams,
    NotPositiveDefinite,
    OutOfRange,
    PairingDefect,
    TwistBoundViolation,
    WrongDimension,
)
from .gaussian import (
    SymplecticSpectrum,
    WilliamsonFactors,
    check_cov_matrix,
    is_physical,
    local_scale,
    log_negativity,
    partial_transpose,
    purity,
    symplectic_form,
    symplectic_spectrum,
    williamson,
)
from .pump import (
    MixtureModel,
    NormalizedPoint,
    TgsmParams,
    beta_squared,
    delta_from_beta,
    max_twist,
    mixture_model,
    params_from_normalized,
    pump_cm,
    pump_oam,
    sample_component_means,
)
from .spdc import (
    EntanglementReport,
    PhaseMatching,
    TwoPhotonState,
    closed_form_eigs,
    coordinate_transform,
    entanglement_report,
    mancini_products,
    phase_matching_cm,
    pt_spectrum_oracle,
    two_photon_purity,
    two_photon_state,
)

__version__ = "0.1.0"
