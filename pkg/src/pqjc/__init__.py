"""(p,q)-deformed Jaynes-Cummings model: spectra, ladder operators, vector coherent states, moments."""

from .errors import (
    AmbiguousSign,
    ConfigError,
    CutoffMismatch,
    DivergentSeries,
    MomentPrereqFailed,
    NonconvergentProduct,
    OracleMismatch,
    OutsideDomain,
    PQJCError,
    QuadratureFailure,
    SpectrumNotBoundedBelow,
    TruncationBudgetExceeded,
)
from .ladder import LadderScheme, SchemeKind, algebra_residual, bind_coefficients, factorization_residual
from .moments import WeightChoice, WeightKind, resolution_check, verify_moments
from .pqmath import (
    ConvergenceRadius,
    DeformationParams,
    Regime,
    SeriesControl,
    SeriesFamily,
    basic_factorial,
    basic_number,
    cal_E_pq,
    classify_radius,
    e_pq,
    frak_e_pq,
    pq_shifted_factorial,
    q_pochhammer,
)
from .spectrum import HChoice, JCModelParams, build_spectrum, decoupled_spectrum, verify_spectrum
from .vcs import VCSParams, atomic_inversion, build_vcs, evolve

__version__ = "0.1.0"
