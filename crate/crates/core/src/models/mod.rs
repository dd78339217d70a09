//! Physical scenarios: two-lead tight-binding lattices, Fermi-sea and thermal occupations,
//! static and driven propagators, and the discretized chiral-channel model.

mod chiral;
mod drive;
mod lattice;
mod occupation;
mod propagator;

pub use chiral::{build_chiral, ChiralModel, ChiralOperators, ScatterProfile, SCATTER_UNITARITY_TOL};
pub use drive::{Drive, Envelope};
pub use lattice::{build_two_lead, ChargeProjection, TwoLeadLattice, TwoLeadOperators};
pub use occupation::{
    fermi_occupation, fermi_occupation_blocks, thermal_occupation, OccupationKind, OccupationOperator,
    BLOCK_TOL, DEGENERACY_GATE, OCCUPATION_TOL,
};
pub use propagator::{
    dyson_first_term, midpoint_product, propagate, step_error_estimate, PropagationMode, PropagatorSpec,
    PROPAGATOR_UNITARITY_TOL, STEP_ACCURACY_TOL,
};
