"""Numerical laboratory for the long-range Maryland model.

Cosine-regularized window determinants, Green's function decay, subharmonic
deviation measurements, Denjoy-Koksma counting, resolvent paving, and
eigenfunction localization diagnostics.
"""

from .arithmetic import Frequency, continued_fraction, dc_constant, golden_frequency, torus_norm
from .determinant import CircleMatrixFamily, LogDet, det_identity_check, jensen_check, log_abs_det
from .ergodic import birkhoff_log_cos, energy_phase, near_resonance_count, singular_integral_check
from .greens import cramer_oracle, decay_fit, find_good_shift, greens_function, minor_bound_check
from .ldt import (
    deviation_profile,
    fejer_average,
    fejer_kernel_bound_check,
    fourier_decay_report,
    logdet_density,
    mean_estimate,
    measure_refinement_report,
    sample_logdet_density,
)
from .localize import eigensystem, orbit_hit_count, shnol_decay_test, spectral_distance
from .model import (
    LongRangeSymbol,
    ModelParams,
    OperatorWindow,
    assemble_window,
    build_symbol,
    epsilon_budget,
    singularity_distance,
)
from .paving import build_paving, patched_bound_check

__version__ = "0.1.0"
