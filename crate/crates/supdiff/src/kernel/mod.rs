//! Exact scalar, vector and matrix arithmetic plus the linear-algebra and
//! linear-programming primitives the polyhedral layer is built on.

mod gauss;
mod linalg;
mod lp;
mod scalar;

pub use gauss::{independent_rows, invert, null_space, rank, row_space_basis, solve_linear, LinearSolution};
pub use linalg::{Matrix, Vector};
pub use lp::{satisfies, solve_lp, verify_farkas, LinearProgram, LpObjective, LpOutcome, RowSense, VarBound};
pub use scalar::{int, parse_scalar, rat, scalar_to_string, Scalar};
