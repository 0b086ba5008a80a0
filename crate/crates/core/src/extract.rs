//! Turning a minimizing assignment into a transmitted code and decoders.

use alloc::vec::Vec;

use crate::gf2::{Gf2Error, Gf2Matrix, RowBasis};
use crate::instance::ProblemInstance;
use crate::solver::{FreeBitLayout, ObjectiveAssignment};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("assignment does not match the instance: {0}")]
    Mismatch(&'static str),
    #[error("selected rows {0:?} are linearly dependent")]
    DependentRows(Vec<usize>),
    #[error("selected row {0} is out of range")]
    RowOutOfRange(usize),
    #[error("invariant violated: user {user} objective row {row} is outside the code's row space")]
    InvariantViolation { user: usize, row: usize },
    #[error("input vector has {found} bits, expected {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("solution shapes do not match the instance for user {user}")]
    Shape { user: usize },
}

/// Linear decoder of one user: `x̂ = B_kᵀ y + A_kᵀ u_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDecoder {
    /// `B_kᵀ`, `|T_k|F × β`.
    pub b_t: Gf2Matrix,
    /// `A_kᵀ`, `|T_k|F × M_kF`.
    pub a_t: Gf2Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexCodeSolution {
    c_ic: Gf2Matrix,
    chosen_rows: Vec<usize>,
    decoders: Vec<UserDecoder>,
}

impl IndexCodeSolution {
    /// Assembles a solution from stored parts without checking decodability;
    /// use [`verify_algebraic`] for that.
    pub fn from_parts(
        c_ic: Gf2Matrix,
        chosen_rows: Vec<usize>,
        decoders: Vec<UserDecoder>,
    ) -> Self {
        Self {
            c_ic,
            chosen_rows,
            decoders,
        }
    }

    /// The index coding matrix, one transmitted combination per row.
    pub fn c_ic(&self) -> &Gf2Matrix {
        &self.c_ic
    }

    pub fn beta(&self) -> usize {
        self.c_ic.rows()
    }

    pub fn chosen_rows(&self) -> &[usize] {
        &self.chosen_rows
    }

    pub fn decoders(&self) -> &[UserDecoder] {
        &self.decoders
    }
}

fn check_assignment(
    instance: &ProblemInstance,
    assignment: &ObjectiveAssignment,
) -> Result<FreeBitLayout, ExtractError> {
    let layout = FreeBitLayout::new(instance);
    if assignment.a_mats().len() != instance.num_users() {
        return Err(ExtractError::Mismatch("decoder count"));
    }
    if assignment
        .a_mats()
        .iter()
        .enumerate()
        .any(|(k, a)| a.shape() != layout.shape(k))
    {
        return Err(ExtractError::Mismatch("decoder shape"));
    }
    if assignment.assembled().shape() != (instance.total_request_rows(), instance.total_bits()) {
        return Err(ExtractError::Mismatch("objective shape"));
    }
    Ok(layout)
}

/// Extracts a code from the first independent rows of the objective.
pub fn extract_code(
    instance: &ProblemInstance,
    assignment: &ObjectiveAssignment,
) -> Result<IndexCodeSolution, ExtractError> {
    let rows = assignment.assembled().independent_rows();
    extract_code_with_rows(instance, assignment, &rows)
}

/// Extracts a code from an explicit set of objective rows. The rows must be
/// linearly independent; decoders are solved for, so any maximal independent
/// subset works.
pub fn extract_code_with_rows(
    instance: &ProblemInstance,
    assignment: &ObjectiveAssignment,
    rows: &[usize],
) -> Result<IndexCodeSolution, ExtractError> {
    let layout = check_assignment(instance, assignment)?;
    let objective = assignment.assembled();
    if let Some(&r) = rows.iter().find(|&&r| r >= objective.rows()) {
        return Err(ExtractError::RowOutOfRange(r));
    }
    let c_ic = objective.select_rows(rows);
    if c_ic.rank() != rows.len() {
        return Err(ExtractError::DependentRows(rows.to_vec()));
    }
    let decoders = (0..instance.num_users())
        .map(|k| {
            let block = objective.row_block(layout.row_offset(k), instance.request_rows(k));
            let b_t = c_ic.solve_rows(&block).map_err(|e| match e {
                Gf2Error::Unsolvable { row } => ExtractError::InvariantViolation { user: k, row },
                _ => ExtractError::Mismatch("objective width"),
            })?;
            Ok(UserDecoder {
                b_t,
                a_t: assignment.a_mats()[k].clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IndexCodeSolution {
        c_ic,
        chosen_rows: rows.to_vec(),
        decoders,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Valid,
    /// `B_kᵀ C + A_kᵀ S_k` differs from `R_k` in this row.
    Violation { user: usize, row: usize },
    /// Decoder or code shapes do not fit the instance.
    Malformed { user: usize },
}

impl Verification {
    pub fn is_valid(self) -> bool {
        self == Verification::Valid
    }
}

/// Checks `B_kᵀ C_IC + A_kᵀ S_k = R_k` for every user.
pub fn verify_algebraic(instance: &ProblemInstance, sol: &IndexCodeSolution) -> Verification {
    if sol.decoders.len() != instance.num_users() {
        return Verification::Malformed {
            user: sol.decoders.len().min(instance.num_users()),
        };
    }
    for (k, dec) in sol.decoders.iter().enumerate() {
        let via_code = dec.b_t.mul(&sol.c_ic);
        let via_cache = dec.a_t.mul(instance.user(k).side_info());
        let (Ok(via_code), Ok(via_cache)) = (via_code, via_cache) else {
            return Verification::Malformed { user: k };
        };
        let Ok(decoded) = via_code.add(&via_cache) else {
            return Verification::Malformed { user: k };
        };
        let requested = instance.request_matrix(k);
        if decoded.shape() != requested.shape() {
            return Verification::Malformed { user: k };
        }
        if let Some(row) =
            (0..decoded.rows()).find(|&r| decoded.row_bits(r) != requested.row_bits(r))
        {
            return Verification::Violation { user: k, row };
        }
    }
    Verification::Valid
}

/// Sends `x` through the code and runs every user's decoder on
/// `(y, u_k) = (C_IC x, S_k x)`.
pub fn simulate_roundtrip(
    instance: &ProblemInstance,
    sol: &IndexCodeSolution,
    x: &[bool],
) -> Result<Vec<Vec<bool>>, ExtractError> {
    if x.len() != instance.total_bits() {
        return Err(ExtractError::InputLength {
            expected: instance.total_bits(),
            found: x.len(),
        });
    }
    let y = sol
        .c_ic
        .mul_vec(x)
        .map_err(|_| ExtractError::Shape { user: 0 })?;
    sol.decoders
        .iter()
        .enumerate()
        .map(|(k, dec)| {
            let shape = |_| ExtractError::Shape { user: k };
            let u = instance.user(k).side_info().mul_vec(x).map_err(shape)?;
            let from_y = dec.b_t.mul_vec(&y).map_err(shape)?;
            let from_u = dec.a_t.mul_vec(&u).map_err(shape)?;
            if from_y.len() != from_u.len() {
                return Err(ExtractError::Shape { user: k });
            }
            Ok(from_y.iter().zip(&from_u).map(|(a, b)| a ^ b).collect())
        })
        .collect()
}

/// Largest `rows · N·F` the oracle will enumerate at one level.
pub const ORACLE_GUARD_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("enumerating {rows}-row codes of width {width} exceeds the {limit}-bit guard")]
    GuardExceeded {
        rows: usize,
        width: usize,
        limit: usize,
    },
    #[error("no valid linear code with at most {0} rows")]
    NotFoundWithin(usize),
}

/// Shortest valid binary linear code, found by enumerating codes directly.
///
/// For each length `L = 0, 1, …, max_len` every full-row-rank `L × NF` matrix
/// is enumerated (up to row order, which does not affect validity). A code is
/// valid when every row of each `R_k` lies in the row space of `[C_IC; S_k]`.
/// This path never builds the stacked rank objective.
pub fn brute_force_optimal_length(
    instance: &ProblemInstance,
    max_len: usize,
) -> Result<usize, OracleError> {
    let width = instance.total_bits();
    let requests: Vec<Gf2Matrix> = (0..instance.num_users())
        .map(|k| instance.request_matrix(k).into_inner())
        .collect();
    let feasible = |code: &RowBasis| {
        instance.users().iter().zip(&requests).all(|(user, r)| {
            let mut span = code.clone();
            let s = user.side_info();
            for row in 0..s.rows() {
                span.insert_row(s, row);
            }
            span.spans(r)
        })
    };
    let mut candidates: Option<Gf2Matrix> = None;
    for len in 0..=max_len.min(width) {
        if len * width > ORACLE_GUARD_BITS {
            return Err(OracleError::GuardExceeded {
                rows: len,
                width,
                limit: ORACLE_GUARD_BITS,
            });
        }
        let vectors = candidates.get_or_insert_with(|| nonzero_vectors(width));
        if search_level(vectors, len, 0, &RowBasis::new(width), &feasible) {
            return Ok(len);
        }
    }
    Err(OracleError::NotFoundWithin(max_len))
}

/// Every nonzero vector of length `width`, one per row, in increasing order.
fn nonzero_vectors(width: usize) -> Gf2Matrix {
    let count = (1usize << width) - 1;
    let mut m = Gf2Matrix::zeros(count, width);
    for v in 1..=count {
        for c in 0..width {
            if (v >> c) & 1 == 1 {
                m.set(v - 1, c, true);
            }
        }
    }
    m
}

/// Depth-first search over strictly increasing, independent row tuples.
fn search_level(
    vectors: &Gf2Matrix,
    remaining: usize,
    start: usize,
    basis: &RowBasis,
    feasible: &impl Fn(&RowBasis) -> bool,
) -> bool {
    if remaining == 0 {
        return feasible(basis);
    }
    for v in start..vectors.rows() {
        if vectors.rows() - v < remaining {
            break;
        }
        let mut next = basis.clone();
        if next.insert_row(vectors, v)
            && search_level(vectors, remaining - 1, v + 1, &next, feasible)
        {
            return true;
        }
    }
    false
}
