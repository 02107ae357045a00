//! Density matrices, Lindblad integration and exact closed-system propagation.

mod lindblad;
mod oracle;
mod state;

pub use lindblad::{Workspace, 
    default_observables, integrate, lindblad_rhs, linspace, Diagnostics, IntegrateOptions, Liouvillian, Observable,
    SimulationResult, Stepper,
};
pub use oracle::{propagate_closed_oracle, unitary_exp, ClosedPropagator};
pub use state::{fidelity, hermitian_eigenvalues, partial_trace, trace_distance, DensityMatrix};
