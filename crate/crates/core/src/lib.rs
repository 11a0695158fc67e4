//! Crawford numbers, numerical radii and norm-attaining repairs of operators
//! on finite-dimensional weighted `l_p` spaces.

pub mod bpb;
pub mod crawford;
pub mod error;
pub mod json;
mod linalg;
pub mod oper;
pub mod repair;
pub mod rng;
pub mod search;
pub mod space;

pub use crawford::{
    compute_with, crawford_number, default_tol, grid_oracle, hilbert_sweep, numerical_radius, phi,
    witness_check, BoundaryPoint, ComputeResult, EngineOptions, Method, Quantity, Strategy,
    SweepOutcome, WitnessReport,
};
pub use error::{Error, Result};
pub use oper::{adjoint, apply, minimum_norm, operator_norm, rank_one_norm, rank_one_update, Operator};
pub use search::SearchConfig;
pub use space::{
    dual_norm, dual_space, duality_face, face_extremize_abs, make_state, modulus_of_convexity, norm,
    sample_sphere, Exponent, Extremum, FaceDescriptor, FaceKind, Field, FreeCoord, Functional,
    NormFamily, SpaceDescriptor, State, Vector, STATE_TOL,
};
pub use bpb::{bpb_refine, eta, BpbConfig, BpbStep, BpbTrace};
pub use repair::{
    compact_style_repair, exposing_repair, min_attain_polytope, repair_dispatch, zero_crawford_repair,
    PolytopeOutcome, RepairKind, RepairOutcome,
};
