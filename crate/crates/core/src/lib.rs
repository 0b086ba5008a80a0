//! Design of binary linear index codes for receivers that hold *coded*
//! side information.
//!
//! The optimal code length equals the minimum GF(2) rank of the stacked
//! matrix `[R_1 + A_1ᵀS_1; …; R_K + A_KᵀS_K]` over all free decoder matrices
//! `A_k`. This crate provides:
//!
//! - [`gf2`]: bit-packed dense matrices over GF(2)
//! - [`instance`]: problem instances, request and side-information builders
//! - [`solver`]: objective assembly plus exhaustive and greedy randomized search
//! - [`extract`]: code extraction, decoders, verification and a brute-force oracle
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod extract;
pub mod gf2;
pub mod instance;
pub mod solver;

#[doc(inline)]
pub use self::{
    extract::{
        brute_force_optimal_length, extract_code, extract_code_with_rows, simulate_roundtrip,
        verify_algebraic, ExtractError, IndexCodeSolution, OracleError, UserDecoder, Verification,
    },
    gf2::{Gf2Error, Gf2Matrix, RowBasis},
    instance::{
        build_request_matrix, side_info_uncoded, side_info_xor, InstanceError, ProblemInstance,
        RequestMatrix, UserSpec, XorTerm,
    },
    solver::{
        assemble_objective, free_bit_count, scalar_objective, solve, solve_exhaustive,
        solve_greedy, FreeBitLayout, GreedySearch, Method, ObjectiveAssignment, SolveError,
        SolveOutcome, SolverConfig,
    },
};
