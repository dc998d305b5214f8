"""Homotopy-type statistics of clusters in Bernoulli site percolation."""

__version__ = "0.1.0"

from .errors import (
    CapabilityError,
    CapacityError,
    ConsistencyError,
    CubipercError,
    DomainError,
    FitError,
    GeometryError,
    SizeError,
    UndefinedMeasureError,
)
from .lattice import (
    Box,
    CellGrid,
    CouplingField,
    WindowSpec,
    derive_seed,
    sample_coloring,
    sample_coupling_field,
    sample_window,
    shell_cells,
    threshold,
    window_interior_box,
)
from .complex import (
    CubicalComplex,
    FaceKey,
    build_closed_complex,
    build_open_complex,
    euler_characteristic,
)
from .homology import BettiVector, betti1_planar, betti_bound_check, betti_numbers
from .clusters import (
    ComponentLabeling,
    ComponentSummary,
    count_N,
    count_Nstar,
    label_components,
    summarize_components,
)
from .measures import (
    DecayFit,
    HomotopyMeasure,
    TailCurve,
    empirical_measure,
    fit_tail_decay,
    lipschitz_check,
    sandwich_check,
    tail_curve,
    tail_mass,
    total_variation,
)
from .generators import EggPatch, EggSacSpec, make_egg, make_egg_sac, verify_egg
from .experiments import SweepConfig, SweepResult, export, optimal_probability, run_sweep
