"""Exact Liouville-space simulation of dissipative Heisenberg XYZ chains."""

__version__ = "0.1.0"

from .operators import (Boundary, ChainParams, EnvParams, RateConvention,
                        StateKind, build_hamiltonian, build_lindblad_ops,
                        cyclic_shift, embed_site_operator, initial_state)
from .liouville import (Liouvillian, assemble_dissipator_superop,
                        assemble_hamiltonian_superop, assemble_liouvillian,
                        devectorize, vectorize)
from .evolution import (DiagnosticBreachError, DimensionCapError,
                        IllConditionedError, NonUniqueSteadyStateError,
                        NoNullVectorError, SpectralDecomposition,
                        StepTooLargeError, TimeGrid, Trajectory, ode_evolve,
                        spectral_evolve, steady_state, unitary_evolve)
from .entanglement import (EntanglementRecord, NonPhysicalInputError,
                           concurrence, concurrence_hermitian,
                           entanglement_record, one_tangle, partial_trace,
                           purity, tau2)
from .experiments import (EventReport, ExperimentResult, ExperimentSpec,
                          ReadoutMethod, Solver, SweepAxis, SweepSpec,
                          detect_events, run_experiment, run_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
