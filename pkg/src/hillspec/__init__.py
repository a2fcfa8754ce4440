"""Spectral gaps, series functionals and Riesz-basis diagnostics for Hill operators on [0, pi]."""
from .weights import WeightSeq, make_weight
from .potentials import FourierPotential, make_potential
from .matrix_spectra import build_matrix, eigen_all, match_discs, convergence_probe
from .functionals import BetaEval, transfer_eval, series_terms, partial_sigma
from .basic_eq import SpectralTriple, solve_basic, cross_validate, rho_bound
from .diagnostics import criterion1, criterion2, criterion3, makin_check, asymptotic_check, t_ratio
from .pipeline import RunConfig, run, reproduce

__all__ = [
    "WeightSeq", "make_weight", "FourierPotential", "make_potential",
    "build_matrix", "eigen_all", "match_discs", "convergence_probe",
    "BetaEval", "transfer_eval", "series_terms", "partial_sigma",
    "SpectralTriple", "solve_basic", "cross_validate", "rho_bound",
    "criterion1", "criterion2", "criterion3", "makin_check", "asymptotic_check", "t_ratio",
    "RunConfig", "run", "reproduce",
]
