"""Cavity-dressed wave-packet dynamics: dressed surfaces, couplings, propagation and signals."""

from ._core import (
    __version__,
    bare_surfaces,
    cone_check,
    dressed_surfaces,
    fit_biexponential,
    gap_map,
    ground_state,
    load_config,
    morse_eigenvalue,
    run_scenario,
    sha256_hex,
    simulate_populations,
    units,
    validate_config,
)

__all__ = [
    "__version__",
    "bare_surfaces",
    "cone_check",
    "dressed_surfaces",
    "fit_biexponential",
    "gap_map",
    "ground_state",
    "load_config",
    "morse_eigenvalue",
    "run_scenario",
    "sha256_hex",
    "simulate_populations",
    "units",
    "validate_config",
]
