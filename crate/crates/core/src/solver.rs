//! Rank minimization of the stacked objective `[R_k + A_kᵀ S_k]_k`.
//!
//! The free variables are the entries of every `A_kᵀ` (shape `|T_k|F × M_kF`).
//! Free bits are numbered user-major, then row-major, then column-major within
//! each `A_kᵀ`; [`FreeBitLayout`] owns that numbering.
//!
//! Setting entry `(i, j)` of `A_kᵀ` XORs row `j` of `S_k` into objective row
//! `offset_k + i`, so every probe is the stacked request matrix plus a set of
//! row XORs.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gf2::{rank_in_place, Gf2Matrix};
use crate::instance::ProblemInstance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("t_param must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("greedy search needs at least one iteration")]
    ZeroIterations,
    #[error("exhaustive search over {bits} free bits exceeds the cap of {cap}")]
    TooManyFreeBits { bits: usize, cap: usize },
    #[error("expected {expected} decoder matrices, got {found}")]
    AssignmentCount { expected: usize, found: usize },
    #[error("user {user}: decoder matrix is {found:?}, expected {expected:?}")]
    AssignmentShape {
        user: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("scalar objective needs a square side-information matrix and one coefficient per user, got {sbar:?} and {coefficients}")]
    ScalarShape {
        sbar: (usize, usize),
        coefficients: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exhaustive,
    Greedy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Greedy => "greedy",
        }
    }
}

/// Search parameters.
///
/// `iterations` is the stall limit `U`: greedy search stops after that many
/// consecutive probes fail to lower the rank. Each free bit is drawn as 1
/// when a uniform draw in `[0, 1)` exceeds `t_param`, i.e. with probability
/// `1 - t_param`. The generator is ChaCha8 seeded from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub iterations: usize,
    pub t_param: f64,
    pub seed: u64,
    pub exhaustive_bit_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Greedy,
            iterations: 10,
            t_param: 0.1,
            seed: 0,
            exhaustive_bit_cap: 24,
        }
    }
}

impl SolverConfig {
    pub fn exhaustive() -> Self {
        Self {
            method: Method::Exhaustive,
            ..Self::default()
        }
    }

    pub fn greedy(iterations: usize, t_param: f64, seed: u64) -> Self {
        Self {
            method: Method::Greedy,
            iterations,
            t_param,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(0.0..=1.0).contains(&self.t_param) {
            return Err(SolveError::InvalidThreshold(self.t_param));
        }
        if self.method == Method::Greedy && self.iterations == 0 {
            return Err(SolveError::ZeroIterations);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    rows: usize,
    cols: usize,
    first_bit: usize,
    first_row: usize,
}

/// Numbering of the free decoder bits of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeBitLayout {
    blocks: Vec<Block>,
    total: usize,
}

impl FreeBitLayout {
    pub fn new(instance: &ProblemInstance) -> Self {
        let mut blocks = Vec::with_capacity(instance.num_users());
        let mut bit = 0;
        let mut row = 0;
        for k in 0..instance.num_users() {
            let rows = instance.request_rows(k);
            let cols = instance.user(k).cache_bits();
            blocks.push(Block {
                rows,
                cols,
                first_bit: bit,
                first_row: row,
            });
            bit += rows * cols;
            row += rows;
        }
        Self { blocks, total: bit }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Shape of `A_kᵀ`.
    pub fn shape(&self, user: usize) -> (usize, usize) {
        let b = &self.blocks[user];
        (b.rows, b.cols)
    }

    /// First row of user `k`'s block in the objective.
    pub fn row_offset(&self, user: usize) -> usize {
        self.blocks[user].first_row
    }

    /// Maps a free-bit index to `(user, row, col)` within `A_userᵀ`.
    pub fn locate(&self, bit: usize) -> (usize, usize, usize) {
        assert!(bit < self.total, "free bit {bit} out of range");
        let k = self.blocks.partition_point(|b| b.first_bit <= bit) - 1;
        let b = &self.blocks[k];
        let local = bit - b.first_bit;
        (k, local / b.cols, local % b.cols)
    }

    /// Builds every `A_kᵀ` from a per-bit predicate.
    pub fn decoders_from(&self, mut bit: impl FnMut(usize) -> bool) -> Vec<Gf2Matrix> {
        self.blocks
            .iter()
            .map(|b| {
                let mut a = Gf2Matrix::zeros(b.rows, b.cols);
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        if bit(b.first_bit + i * b.cols + j) {
                            a.set(i, j, true);
                        }
                    }
                }
                a
            })
            .collect()
    }

    pub fn zero_decoders(&self) -> Vec<Gf2Matrix> {
        self.decoders_from(|_| false)
    }
}

/// Total number of indeterminate bits `Σ_k |T_k|F · M_kF`.
pub fn free_bit_count(instance: &ProblemInstance) -> usize {
    FreeBitLayout::new(instance).total()
}

/// One choice of all `A_kᵀ` together with the objective it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveAssignment {
    a_mats: Vec<Gf2Matrix>,
    assembled: Gf2Matrix,
    achieved_rank: usize,
}

impl ObjectiveAssignment {
    /// The `A_kᵀ` matrices, one per user.
    pub fn a_mats(&self) -> &[Gf2Matrix] {
        &self.a_mats
    }

    pub fn assembled(&self) -> &Gf2Matrix {
        &self.assembled
    }

    pub fn achieved_rank(&self) -> usize {
        self.achieved_rank
    }

    pub fn into_parts(self) -> (Vec<Gf2Matrix>, Gf2Matrix, usize) {
        (self.a_mats, self.assembled, self.achieved_rank)
    }
}

/// Stacks `R_k + A_kᵀ S_k` over all users and records its rank.
pub fn assemble_objective(
    instance: &ProblemInstance,
    a_mats: Vec<Gf2Matrix>,
) -> Result<ObjectiveAssignment, SolveError> {
    let layout = FreeBitLayout::new(instance);
    if a_mats.len() != instance.num_users() {
        return Err(SolveError::AssignmentCount {
            expected: instance.num_users(),
            found: a_mats.len(),
        });
    }
    for (k, a) in a_mats.iter().enumerate() {
        if a.shape() != layout.shape(k) {
            return Err(SolveError::AssignmentShape {
                user: k,
                expected: layout.shape(k),
                found: a.shape(),
            });
        }
    }
    let blocks: Vec<Gf2Matrix> = a_mats
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let correction = a
                .mul(instance.user(k).side_info())
                .expect("shapes checked above");
            instance
                .request_matrix(k)
                .add(&correction)
                .expect("shapes checked above")
        })
        .collect();
    let refs: Vec<&Gf2Matrix> = blocks.iter().collect();
    let assembled = Gf2Matrix::vstack(instance.total_bits(), &refs).expect("blocks share width");
    let achieved_rank = assembled.rank();
    Ok(ObjectiveAssignment {
        a_mats,
        assembled,
        achieved_rank,
    })
}

/// Best assignment found by a solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub beta: usize,
    pub best: ObjectiveAssignment,
    /// Probes evaluated, not counting the initial all-zero assignment.
    pub iterations_run: u64,
    /// Only exhaustive search certifies optimality.
    pub optimal_certified: bool,
}

/// Toggles objective rows in place, one free bit at a time.
struct ProbeEvaluator {
    base: Gf2Matrix,
    /// Per free bit: (objective row, user, side-information row).
    effects: Vec<(usize, usize, usize)>,
    scratch: Vec<u64>,
}

impl ProbeEvaluator {
    fn new(instance: &ProblemInstance, layout: &FreeBitLayout) -> Self {
        let effects = (0..layout.total())
            .map(|bit| {
                let (k, i, j) = layout.locate(bit);
                (layout.row_offset(k) + i, k, j)
            })
            .collect();
        let base = instance.stacked_requests();
        let scratch = vec![0; base.words().len()];
        Self {
            base,
            effects,
            scratch,
        }
    }

    fn toggle(&mut self, matrix: &mut Gf2Matrix, instance: &ProblemInstance, bit: usize) {
        let (row, k, j) = self.effects[bit];
        matrix.xor_row_from(row, instance.user(k).side_info(), j);
    }

    fn rank_of(&mut self, matrix: &Gf2Matrix) -> usize {
        self.scratch.copy_from_slice(matrix.words());
        rank_in_place(&mut self.scratch, matrix.rows(), matrix.cols(), matrix.stride())
    }

    fn rank_with(&mut self, instance: &ProblemInstance, bits: &[bool]) -> usize {
        self.scratch.copy_from_slice(self.base.words());
        let stride = self.base.stride();
        for (bit, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            let (row, k, j) = self.effects[bit];
            let src = instance.user(k).side_info().row_words(j);
            for (d, s) in self.scratch[row * stride..(row + 1) * stride]
                .iter_mut()
                .zip(src)
            {
                *d ^= *s;
            }
        }
        rank_in_place(&mut self.scratch, self.base.rows(), self.base.cols(), stride)
    }
}

fn outcome_from_bits(
    instance: &ProblemInstance,
    layout: &FreeBitLayout,
    bits: impl FnMut(usize) -> bool,
    iterations_run: u64,
    optimal_certified: bool,
) -> SolveOutcome {
    let best = assemble_objective(instance, layout.decoders_from(bits))
        .expect("layout produces conforming decoders");
    SolveOutcome {
        beta: best.achieved_rank,
        best,
        iterations_run,
        optimal_certified,
    }
}

/// Enumerates every assignment of the free bits.
///
/// Assignments are visited in Gray-code order so each step is one row XOR.
/// Among minimum-rank assignments the one with the smallest index wins, where
/// free bit `b` is bit `b` of the index.
pub fn solve_exhaustive(
    instance: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    let layout = FreeBitLayout::new(instance);
    let bits = layout.total();
    if bits > cfg.exhaustive_bit_cap || bits >= 64 {
        return Err(SolveError::TooManyFreeBits {
            bits,
            cap: cfg.exhaustive_bit_cap.min(63),
        });
    }
    let mut eval = ProbeEvaluator::new(instance, &layout);
    let mut current = eval.base.clone();
    let mut best_rank = eval.rank_of(&current);
    let mut best_index = 0u64;
    let count = 1u64 << bits;
    for step in 1..count {
        let flipped = step.trailing_zeros() as usize;
        eval.toggle(&mut current, instance, flipped);
        let index = step ^ (step >> 1);
        let r = eval.rank_of(&current);
        if r < best_rank || (r == best_rank && index < best_index) {
            best_rank = r;
            best_index = index;
        }
    }
    Ok(outcome_from_bits(
        instance,
        &layout,
        |b| (best_index >> b) & 1 == 1,
        count - 1,
        true,
    ))
}

/// Greedy randomized search with a stall counter.
///
/// Starts from the all-zero assignment. Every probe redraws all free bits;
/// a probe with strictly smaller rank becomes the new best and resets the
/// stall counter, anything else increments it.
///
/// The search can be resumed with a larger stall limit: [`run_until`] with
/// limit `U2 > U1` after a run with `U1` continues the same probe stream, so
/// the result equals a fresh run with `U2` and the same seed.
///
/// [`run_until`]: GreedySearch::run_until
pub struct GreedySearch<'a> {
    instance: &'a ProblemInstance,
    layout: FreeBitLayout,
    eval: ProbeEvaluator,
    rng: ChaCha8Rng,
    t_param: f64,
    probe: Vec<bool>,
    best: Vec<bool>,
    best_rank: usize,
    stall: usize,
    probes: u64,
}

impl<'a> GreedySearch<'a> {
    pub fn new(instance: &'a ProblemInstance, t_param: f64, seed: u64) -> Result<Self, SolveError> {
        if !(0.0..=1.0).contains(&t_param) {
            return Err(SolveError::InvalidThreshold(t_param));
        }
        let layout = FreeBitLayout::new(instance);
        let mut eval = ProbeEvaluator::new(instance, &layout);
        let base = eval.base.clone();
        let best_rank = eval.rank_of(&base);
        let n = layout.total();
        Ok(Self {
            instance,
            layout,
            eval,
            rng: ChaCha8Rng::seed_from_u64(seed),
            t_param,
            probe: vec![false; n],
            best: vec![false; n],
            best_rank,
            stall: 0,
            probes: 0,
        })
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Draws and evaluates one probe; returns its rank.
    pub fn step(&mut self) -> usize {
        for i in 0..self.probe.len() {
            self.probe[i] = self.uniform() > self.t_param;
        }
        let r = self.eval.rank_with(self.instance, &self.probe);
        self.probes += 1;
        if r < self.best_rank {
            self.best_rank = r;
            self.best.copy_from_slice(&self.probe);
            self.stall = 0;
        } else {
            self.stall += 1;
        }
        r
    }

    /// Runs until the stall counter reaches `stall_limit`; returns the best rank.
    pub fn run_until(&mut self, stall_limit: usize) -> usize {
        while self.stall < stall_limit {
            self.step();
        }
        self.best_rank
    }

    pub fn best_rank(&self) -> usize {
        self.best_rank
    }

    pub fn stall(&self) -> usize {
        self.stall
    }

    pub fn probes(&self) -> u64 {
        self.probes
    }

    pub fn into_outcome(self) -> SolveOutcome {
        let best = self.best;
        outcome_from_bits(self.instance, &self.layout, |b| best[b], self.probes, false)
    }
}

pub fn solve_greedy(
    instance: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    if cfg.iterations == 0 {
        return Err(SolveError::ZeroIterations);
    }
    let mut search = GreedySearch::new(instance, cfg.t_param, cfg.seed)?;
    search.run_until(cfg.iterations);
    Ok(search.into_outcome())
}

pub fn solve(instance: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    match cfg.method {
        Method::Exhaustive => solve_exhaustive(instance, cfg),
        Method::Greedy => solve_greedy(instance, cfg),
    }
}

/// Scalar objective for `N = K`, `F = M_k = 1`, `T_k = {k}`.
///
/// `sbar` holds `s_k` as its column `k`. Row `k` of the result is
/// `e_kᵀ + a_k s_kᵀ`, the transpose of `I_K + S̄·diag(ā)`; both have the same
/// rank.
pub fn scalar_objective(sbar: &Gf2Matrix, abar: &[bool]) -> Result<Gf2Matrix, SolveError> {
    let k = abar.len();
    if sbar.shape() != (k, k) {
        return Err(SolveError::ScalarShape {
            sbar: sbar.shape(),
            coefficients: k,
        });
    }
    let mut out = Gf2Matrix::identity(k);
    for (row, &a) in abar.iter().enumerate() {
        if a {
            for c in 0..k {
                if sbar.get(c, row) {
                    out.toggle(row, c);
                }
            }
        }
    }
    Ok(out)
}
