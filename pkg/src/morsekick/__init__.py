"""Wavepacket simulator for laser-driven Morse oscillators under noise."""

from .fields import (
    LaserPulse,
    NoiseRealization,
    NoiseSpec,
    laser_field,
    realization_seed,
    sample_filtered_noise,
    sample_white_noise,
)
from .grid import (
    GridMismatchError,
    GridSpec,
    Wavefunction,
    expectation_p,
    expectation_x,
    inner_product,
    make_grid,
    norm_squared,
    to_momentum,
    to_position,
)
from .morse import (
    MOLECULES,
    BoundStateBasis,
    GridTooSmallError,
    MorseParams,
    analytic_energy,
    morse_potential,
    solve_bound_states,
)
from .observables import (
    DissociationRecord,
    EnhancementPoint,
    EnsembleResult,
    absorbed_energy,
    bound_projections,
    dissociation_probability,
    enhancement,
    run_ensemble,
)
from .propagator import (
    BlowupError,
    PropagationConfig,
    StepContext,
    TrajectoryRecord,
    absorber_mask,
    apply_momentum_kick,
    make_step_context,
    propagate_realization,
    step,
)

__version__ = "0.1.0"
