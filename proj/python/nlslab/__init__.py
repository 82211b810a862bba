"""NLS soliton dynamics in slowly varying media."""

from ._nlslab import (
    __version__,
    check_identities,
    evolve,
    fit,
    grid,
    load_scenario,
    observables,
    operator_suite,
    predict,
    run_scenario,
    scaling_exponents,
    soliton_profile,
    traveling_wave,
)

__all__ = [
    "check_identities",
    "evolve",
    "fit",
    "grid",
    "load_scenario",
    "observables",
    "operator_suite",
    "predict",
    "run_scenario",
    "scaling_exponents",
    "soliton_profile",
    "traveling_wave",
]
