"""Renewal convergence rates for tilted inter-arrival laws and homogeneous pinning."""

__version__ = "0.1.0"

from .asympt import (
    CNWCheck,
    RateReport,
    XiRow,
    cnw_hypotheses,
    correlation_fn,
    correlation_length,
    decay_rate,
    grad_ratio,
    sharp_ratio,
    xi_scan,
)
from .errors import (
    ConvergenceError,
    DegenerateLawError,
    DomainError,
    InsufficientDataError,
    MismatchError,
    MultiplicityError,
    NormalizationError,
    OnContourError,
    PinrateError,
    PrecisionError,
    SingularityError,
)
from .laws import (
    InterArrivalLaw,
    TiltedLaw,
    free_energy,
    make_basic_law,
    make_geometric_law,
    make_logcorrected_law,
    make_shifted_law,
    make_table_law,
    make_two_point_law,
    mu_density,
    normalizer,
    tilt,
)
from .pinning import PartitionTable, contact_fraction, fe_estimate, partition
from .precision import PrecisionSpec, auto_bits
from .renewal import MCEstimate, RenewalSeries, delta_series, mass_renewal, mc_sample
from .spectral import (
    AnnulusCount,
    RootReport,
    count_zeros,
    critical_tilt,
    delta_transform,
    find_roots,
    khat,
    leading_poles,
    muhat_and_grubel_check,
    pole_asymptote,
    rouche_scan,
)
