"""Spinor wavepackets on grids evolved under the reduced Hamiltonian."""

from .classical import ClassicalTrack, classical_proper_time
from .evolve import (
    RK4_STABILITY,
    SUPPORT_WIDTHS,
    BoundaryError,
    DynamicsError,
    SolverError,
    StabilityError,
    Trajectory,
    WavepacketError,
    evolve,
    init_wavepacket,
    proper_time,
    spectral_radius,
    spinor,
)
from .gaussian import gaussian_expectation, gaussian_field_average
from .grid import Grid, GridError, SpinorGridState, measure_weight, reduction_leak
from .library import rest_mass_part, spin_part, spinless_part, standard_operators
from .operators import (
    CompiledOperator,
    OperatorError,
    apply_to_state,
    compile_operator,
    expectation,
    position_expectation,
    set_workers,
)
from .scenarios import (
    DEFAULT_TOLERANCES,
    KINDS,
    Scenario,
    ScenarioResult,
    ehrenfest_error,
    load_scenario,
    parse_scenario,
    run_scenario,
    scenario_from_dict,
    width_correction,
)


def spin_contrast_experiment(scenario: Scenario) -> ScenarioResult:
    """Opposite-spin runs, their tau difference and the perturbative prediction."""
    if scenario.kind != "spin-contrast":
        raise ValueError(f"scenario kind is {scenario.kind!r}, expected 'spin-contrast'")
    return run_scenario(scenario)


__all__ = [
    "BoundaryError", "ClassicalTrack", "CompiledOperator", "DEFAULT_TOLERANCES", "DynamicsError", "Grid",
    "GridError", "KINDS", "OperatorError", "RK4_STABILITY", "SUPPORT_WIDTHS", "Scenario", "ScenarioResult",
    "SolverError", "SpinorGridState", "StabilityError", "Trajectory", "WavepacketError", "apply_to_state",
    "classical_proper_time", "compile_operator", "ehrenfest_error", "evolve", "expectation",
    "gaussian_expectation", "gaussian_field_average", "init_wavepacket", "load_scenario", "measure_weight",
    "parse_scenario", "position_expectation", "proper_time", "reduction_leak", "rest_mass_part",
    "run_scenario", "scenario_from_dict", "set_workers", "spectral_radius", "spin_contrast_experiment",
    "spin_part", "spinless_part", "spinor", "standard_operators", "width_correction",
]
