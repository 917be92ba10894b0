//! Linear finite elements on a structured triangulation of the unit square.

mod assembly;
mod loads;
mod mesh;
mod problems;

pub use assembly::{
    assemble, assemble_load, assemble_load_at, bar_load, full_mass, interpolate, l2_error, mass_norm,
    project_initial, AssembledSystem, Diffusion, FormCoeffs, OperatorCoeffs,
};
pub use loads::LoadAssembler;
pub use mesh::{build_mesh, Mesh2D};
pub use problems::{log_kernel_memory, ManufacturedProblem, Source, SpaceFn, SpaceTimeFn, TimeFn};
