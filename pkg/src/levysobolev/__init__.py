"""Levy symbols, Sobolev/jump-activity indices, and a Fourier-spectral PIDE solver."""

from .errors import (
    ConfigError,
    DegenerateSymbol,
    DivergentIntegral,
    EvalOverflow,
    FitUnstable,
    GridMismatch,
    Inconsistent,
    InvalidParams,
    IoError,
    LevySobolevError,
    MissingField,
    NonpositiveRealPart,
    NotOneDimensional,
    QuadratureFailure,
    TailTooFat,
    TailUnbounded,
    UnknownFamily,
    UnstableScheme,
)
from .indices import (
    GridSpec,
    IndexReport,
    analytic_index,
    cross_check,
    fit_continuity_exponent,
    fit_garding_exponent,
    smoothness_moments,
    sobolev_index,
)
from .measures import (
    BoundReport,
    DensitySplit,
    LevyDensity,
    bg_index,
    cgmy_density,
    density_symbol,
    gamma_index,
    gh_expansion_density,
    nig_density,
    power_law_density,
    split_symmetric,
    symbol_parts_from_density,
    tabulated_density,
    verify_appendix_bounds,
)
from .spectral import (
    FormReport,
    FrequencyGrid,
    SpectralField,
    Trajectory,
    bilinear_form,
    conditional_expectation,
    conj_symmetrize,
    density,
    density_grid,
    density_mass,
    evolve,
    re_a_weighted_norm,
    sobolev_norm,
    verify_form_inequalities,
)
from .symbols import (
    BrownianParams,
    CauchyParams,
    CGMYParams,
    LevyTriplet,
    NIGParams,
    Stable1dParams,
    StudentTParams,
    Symbol,
    Truncation,
    char_fn,
    check_semistable_scaling,
    make_symbol,
    params_from_record,
    params_to_record,
    stable_symbol_1d,
    symbol_from_callable,
)

__version__ = "0.1.0"
