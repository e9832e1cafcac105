"""Entanglement dynamics of classically driven atoms in cavity QED."""
from .analysis import (
    BracketInvalidError,
    EsdEvent,
    FockScenario,
    NegativityTrace,
    ThermalScenario,
    TimeGrid,
    TwoAtomScenario,
    esd_critical_drive,
    esd_events,
    negativity_trace,
    sweep_drive_grid,
)
from .atom_field import (
    Branch,
    DressedFrame,
    DrivenJCParams,
    ThermalFieldSpec,
    amplitudes,
    dressed_frame,
    evolved_thermal_state,
    fock_log_negativity,
    thermal_log_negativity,
    thermal_weights,
)
from .qmath import DensityMatrix, hermitian_eigenvalues, negativity_oracle, partial_transpose
from .two_atom import (
    DampingChannel,
    EWLKind,
    EWLSpec,
    XState,
    apply_local_channel,
    evolve_pair,
    ewl_state,
    x_log_negativity,
)

__version__ = "0.1.0"
