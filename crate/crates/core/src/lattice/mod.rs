//! Integer matrices, Frobenius-stable lattices and their cokernels, witness
//! constructions, and matrix factorizations over `ℤ[t]`.

pub mod factorization;
pub mod matrix;
pub mod oracle;
pub mod witness;

pub use factorization::{
    complement, diagonal_valuations, mf1_hypothesis_holds, mf_build, mf_dual_hp, mf_normalize,
    PolyMatrix,
};
pub use matrix::{cokernel_exponents, snf, IntMatrix, SnfResult};
pub use oracle::{
    default_depth, enumerate_stable_lattices, enumerate_stable_lattices_with_jobs,
    formal_oracle_realized_set, frobenius_model, oracle_realized_set, run_oracle,
    witness_search_case1, OracleOptions, OracleReport, Reduction, StableLattice,
};
pub use witness::{witness_case2, witness_case3, witness_for, Witness};
