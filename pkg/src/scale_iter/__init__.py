"""Finite-horizon iteration machinery on analyticity scales.

Subpackages by theme: bruno (sequence calculus and scalar orbit models),
factors (loss-of-regularity bounds and radius schedules), series (truncated
power series with exact arithmetic), fourier (harmonic-capped circle data),
engines (runnable iterations and reports), cli (experiment front end).
"""

from .bruno import (
    BrunoSequence,
    LogSequence,
    OrbitTrace,
    TamePair,
    TameVerdict,
    a_pi,
    absorb_check,
    bruno_transform,
    delta_search,
    is_bruno,
    is_tame,
    mixed_orbit,
    quadratic_orbit,
)
from .factors import (
    KamFactor,
    LocalFactor,
    PerturbativeFactor,
    RadiusSchedule,
    factor_eval,
    geometric_bound_check,
    kam_schedule_tame_check,
    perturbative_bound_check,
    perturbative_radius_search,
    rho_for_perturbative,
    schedule_build,
)
from .series import (
    Derivation,
    TruncatedPowerSeries,
    linearization_action,
    ps_add,
    ps_antiderive,
    ps_derive,
    ps_divide_monomial,
    ps_lie_exp,
    ps_mul,
    ps_norm,
)
from .fourier import (
    CircleVectorField,
    FourierOneForm,
    lie_derivative_oneform,
    oneform_lie_exp,
    solve_homological,
    strip_l2_norm,
    tail_decay_check,
)
from .engines import (
    IterationReport,
    ScalarElement,
    SeriesElement,
    OneFormElement,
    circle_run,
    contraction_run,
    kam_run,
    morse_run,
    newton_invert,
    quasi_newton_run,
)

__version__ = "0.1.0"
