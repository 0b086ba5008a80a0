//! Average greedy rank as a function of the stall limit `U` and threshold `T`.
//!
//! Each trial is one seeded [`GreedySearch`] that is extended through the
//! sorted `U` values rather than restarted, so a trial's rank at `U` is exactly
//! what a fresh run with that `U` and seed would return, and the per-trial
//! rank is non-increasing in `U`.

use std::io::Write;

use minrank_core::{
    free_bit_count, solve_exhaustive, GreedySearch, ProblemInstance, SolveError, SolverConfig,
};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub t_params: Vec<f64>,
    pub iterations: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Largest free-bit count for which the exhaustive optimum is computed.
    pub exhaustive_bit_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_params: vec![0.1],
            iterations: (1..=10).collect(),
            trials: 1000,
            base_seed: 0,
            exhaustive_bit_cap: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_param: f64,
    pub iterations: usize,
    pub trials: usize,
    pub beta_sum: u64,
    pub min_beta: usize,
    pub max_beta: usize,
    /// Fraction of trials reaching the exhaustive optimum, when known.
    pub optimal_rate: Option<f64>,
}

impl SweepRow {
    pub fn mean_beta(&self) -> f64 {
        self.beta_sum as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub optimum: Option<usize>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("iteration counts must be at least 1")]
    ZeroIterations,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub const CSV_HEADER: [&str; 7] = [
    "t_param",
    "U",
    "trials",
    "mean_beta",
    "min_beta",
    "max_beta",
    "optimal_rate",
];

pub fn run_sweep(instance: &ProblemInstance, cfg: &SweepConfig) -> Result<SweepReport, SweepError> {
    if cfg.trials == 0 {
        return Err(SweepError::NoTrials);
    }
    if cfg.iterations.contains(&0) {
        return Err(SweepError::ZeroIterations);
    }
    let optimum = (free_bit_count(instance) <= cfg.exhaustive_bit_cap)
        .then(|| {
            let exact = SolverConfig {
                exhaustive_bit_cap: cfg.exhaustive_bit_cap,
                ..SolverConfig::exhaustive()
            };
            solve_exhaustive(instance, &exact).map(|o| o.beta)
        })
        .transpose()?;

    let mut limits = cfg.iterations.clone();
    limits.sort_unstable();
    limits.dedup();

    let mut rows = Vec::with_capacity(cfg.t_params.len() * cfg.iterations.len());
    for &t in &cfg.t_params {
        SolverConfig::greedy(1, t, 0).validate()?;
        // betas[trial][i] is the trial's rank at limits[i].
        let betas: Vec<Vec<usize>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut search = GreedySearch::new(instance, t, cfg.base_seed.wrapping_add(trial))
                    .expect("threshold validated");
                limits.iter().map(|&u| search.run_until(u)).collect()
            })
            .collect();
        for &u in &cfg.iterations {
            let i = limits.binary_search(&u).expect("limit present");
            let column = betas.iter().map(|b| b[i]);
            rows.push(SweepRow {
                t_param: t,
                iterations: u,
                trials: cfg.trials,
                beta_sum: column.clone().map(|b| b as u64).sum(),
                min_beta: column.clone().min().expect("trials >= 1"),
                max_beta: column.clone().max().expect("trials >= 1"),
                optimal_rate: optimum.map(|opt| {
                    column.filter(|&b| b == opt).count() as f64 / cfg.trials as f64
                }),
            });
        }
    }
    Ok(SweepReport { optimum, rows })
}

impl SweepReport {
    pub fn row(&self, t_param: f64, iterations: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.t_param == t_param && r.iterations == iterations)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.t_param.to_string(),
                r.iterations.to_string(),
                r.trials.to_string(),
                r.mean_beta().to_string(),
                r.min_beta.to_string(),
                r.max_beta.to_string(),
                r.optimal_rate.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
