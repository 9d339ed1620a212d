//! Cross-checks relating the unitary recursions to Hermitian ones: moment
//! determinants, the `T → 0` limit, the real-coefficient Lanczos route, and
//! the free-fermion XY chain realizing a CMV matrix.

pub mod determinants;
pub mod real_alpha;
pub mod small_t;
pub mod xy;

pub use determinants::{
    hankel_determinant_basis, phase_free_distance, toeplitz_determinant_basis, HamiltonianMoments,
    UnitaryMoments,
};
pub use real_alpha::{
    doubled_time_ratios, half_step_hamiltonian, modified_inner_product, real_alpha_lanczos_route,
    RealAlphaRoute,
};
pub use small_t::{alpha_expansion, small_t_check, SmallTReport, SmallTRow};
pub use xy::{
    annihilation_operator, xy_alpha, xy_angles, xy_circuit_build, xy_equivalence_check, XyCircuit,
    XyEquivalence, XyGate, XY_MAX_SITES,
};
