//! Exact partition functions, their complex zeros, and the complex dynamics
//! of the diamond hierarchical-lattice renormalization map.

mod julia;
mod polynomial;
mod renorm_map;
mod roots;

pub use num_complex::Complex64;

pub use julia::{julia_inverse_iteration, JuliaCloud, JuliaOptions, JuliaPoint, PREIMAGE_RESIDUAL};
pub use polynomial::{
    chain_partition_polynomial, hierarchical_temperature_polynomial, PartitionPolynomial, PolynomialOrigin,
    VariableKind, MAX_CHAIN_SITES, MAX_HIERARCHY_GENERATIONS,
};
pub use renorm_map::{
    dhl_derivative, dhl_renorm_apply, find_fixed_point, FixedPoint, FixedPointReport, MapId, MapValue, RenormMap,
};
pub use roots::{find_zeros, polynomial_roots, relative_residual, ZeroSet, DEFAULT_ROOT_TOL, MAX_ITERATIONS};
