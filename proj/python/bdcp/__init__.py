"""Two-type contact process with reservoirs (C++ core)."""

from ._core import (
    BoundaryMode,
    Geometry,
    ModelParams,
    boundary_rates,
    canonical_spec,
    coupled_reaction_rates,
    default_box_M,
    discrepancy_h,
    philox_u64,
    reaction_F,
    reaction_rates,
    run_experiment,
    sample_product_measure,
    simulate,
    simulate_coupled,
    solve_pde,
    spectral_solve,
    transient_distribution,
)

__all__ = [
    "BoundaryMode",
    "Geometry",
    "ModelParams",
    "boundary_rates",
    "canonical_spec",
    "coupled_reaction_rates",
    "default_box_M",
    "discrepancy_h",
    "philox_u64",
    "reaction_F",
    "reaction_rates",
    "run_experiment",
    "sample_product_measure",
    "simulate",
    "simulate_coupled",
    "solve_pde",
    "spectral_solve",
    "transient_distribution",
]
