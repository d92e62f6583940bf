"""Frames of the form ``{D^lambda g}`` generated by a diagonal operator with a
Carleson spectrum: truncated frame bounds, subsequence certificates,
density estimates and the continuous-time family."""

__version__ = "0.1.0"

from .carleson import (
    CarlesonDeltaEstimate,
    CarlesonSpectrum,
    DiskPoint,
    FrameVector,
    NotCarlesonError,
    blaschke_product,
    canonical_vector,
    carleson_delta,
    make_geometric_real,
    make_sector,
    pseudo_hyperbolic,
    tail_defect,
)
from .frame_ops import (
    ExponentSet,
    FrameBoundEstimate,
    RankDeficientError,
    SynthesisMatrix,
    analysis_apply,
    arithmetic_frame_bounds,
    bounds_for,
    frame_bounds,
    frame_bounds_converged,
    reconstruct,
    synthesis_matrix,
)
from .exponents import gamma_const, log_block_density, ms_sum, theta, theta_sup_check
from .certify import (
    completeness_certificate,
    degenerate_check,
    degenerate_null_vector,
    extension_chain,
    extension_step,
    perturbation_J,
    verify_chps_chain,
    zero_set_guard,
)
from .continuous import (
    continuous_bounds,
    continuous_report,
    delta_frame_bound,
    discrete_sandwich_check,
    riemann_energy,
)
from .estimator import CarlesonFrame
