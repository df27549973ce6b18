"""Convergent inclusion sets for spectra, pseudospectra and essential spectra
of banded matrices, computed from smallest singular values of column windows."""

from .catalog import load_example
from .inclusion import (
    Grid,
    InclusionResult,
    Label,
    MuField,
    classify_pseudospectrum,
    essential_superset,
    make_grid,
    mu_n_field,
    pseudospectrum_sets,
    spectrum_superset,
    split_biinfinite,
    tail_operator,
)
from .operator_model import (
    BandOperator,
    Constant,
    Explicit,
    IndexDomain,
    OperatorSchemaError,
    Periodic,
    PerturbedPeriodic,
    adjoint,
    block_tridiagonalize,
    entry,
    parse_operator,
    shift_spectral,
    sup_norms,
    tridiagonal,
)
from .windows import epsilon_n, extract_window, mu_n, nu_n, window_offsets

__version__ = "0.1.0"
