"""Chemical equilibrium speciation with Debye-Hueckel activity correction.

Typical use::

    from speciation import preset_scheme, solve
    state = solve(preset_scheme("tris-borate"), {"B": 0.2, "T": 0.2})
    state.pH, state.pH_a, state.I
"""

from .activity import (
    DEBYE_A,
    ActivityModel,
    IonicState,
    activity_pH,
    corrected_constants,
    corrected_log10_constants,
    gamma_exponents,
    ionic_strength,
    log10_gamma,
)
from .closed_forms import (
    AcidBasePair,
    ElectroneutralityMode,
    NoPhysicalRootError,
    ReducedState,
    TrisBorateInputs,
    acid_base_solve,
    henderson_h_plus,
    henderson_pH,
    tris_borate_reduced_solve,
    tris_borate_solve,
)
from .conservation import (
    ChemicalSubsystem,
    DegenerateMixtureError,
    Moiety,
    assign_totals,
    canonical_moieties,
    dissociation_degrees,
    null_space,
)
from .equilibrium import (
    ConvergenceError,
    EquilibriumState,
    InitialGuess,
    SingularJacobianError,
    SolverConfig,
    jacobian,
    newton_solve,
    residuals,
    solve,
    solve_with_ionic_correction,
)
from .fitting import FitResult, polyfit
from .kinetics import RateAssignment, StiffnessError, Trajectory, integrate_to_steady_state
from .presets import acid_base_scheme, preset_scheme, tris_borate_scheme
from .scheme import (
    Reaction,
    Scheme,
    SchemeError,
    SchemeSyntaxError,
    Species,
    parse_document,
    parse_scheme,
    render,
    stoichiometric_matrix,
)
from .sweep import SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
