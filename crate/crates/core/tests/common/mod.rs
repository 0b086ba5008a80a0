//! Test-only helpers: per-bit reference algebra and a random instance generator.

#![allow(dead_code)]

use minrank_core::{free_bit_count, Gf2Matrix, ProblemInstance, UserSpec};
use rand::Rng;

pub type Bits = Vec<Vec<bool>>;

pub fn to_bits(m: &Gf2Matrix) -> Bits {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect())
        .collect()
}

pub fn from_bits(cols: usize, b: &Bits) -> Gf2Matrix {
    let rows: Vec<Vec<u8>> = b
        .iter()
        .map(|r| r.iter().map(|&x| x as u8).collect())
        .collect();
    Gf2Matrix::from_rows(cols, &rows).unwrap()
}

/// Textbook Gaussian elimination on `Vec<Vec<bool>>`.
pub fn reference_rank(m: &Bits) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c]) else {
            continue;
        };
        a.swap(p, rank);
        for r in 0..rows {
            if r != rank && a[r][c] {
                let pivot = a[rank].clone();
                for (x, v) in a[r].iter_mut().zip(pivot) {
                    *x ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn reference_mul(a: &Bits, b: &Bits, inner: usize, cols: usize) -> Bits {
    (0..a.len())
        .map(|i| {
            (0..cols)
                .map(|j| (0..inner).fold(false, |acc, k| acc ^ (a[i][k] & b[k][j])))
                .collect()
        })
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> Gf2Matrix {
    let mut m = Gf2Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.random_bool(density) {
                m.set(r, c, true);
            }
        }
    }
    m
}

/// Bounds for [`random_instance`].
#[derive(Clone, Copy)]
pub struct InstanceBounds {
    pub max_total_bits: usize,
    pub max_users: usize,
    pub max_cache_rows: usize,
    pub max_free_bits: usize,
}

/// Draws instances until one fits `bounds`.
pub fn random_instance<R: Rng>(rng: &mut R, bounds: InstanceBounds) -> ProblemInstance {
    loop {
        let n = rng.random_range(1..=bounds.max_total_bits);
        let f = rng.random_range(1..=bounds.max_total_bits / n);
        let width = n * f;
        let k = rng.random_range(1..=bounds.max_users);
        let users = (0..k)
            .map(|_| {
                let mut requests: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
                if requests.is_empty() {
                    requests.push(rng.random_range(0..n));
                }
                let cache = rng.random_range(0..=bounds.max_cache_rows);
                UserSpec::new(requests, random_matrix(rng, cache, width, 0.5))
            })
            .collect();
        let inst = ProblemInstance::new(n, f, users).unwrap();
        if free_bit_count(&inst) <= bounds.max_free_bits {
            return inst;
        }
    }
}

/// A random linear combination of the rows of `m`, `rows` of them.
pub fn random_row_sums<R: Rng>(rng: &mut R, m: &Gf2Matrix, rows: usize) -> Gf2Matrix {
    let combos = random_matrix(rng, rows, m.rows(), 0.5);
    combos.mul(m).unwrap()
}

pub fn all_inputs(width: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << width).map(move |v| (0..width).map(|i| (v >> i) & 1 == 1).collect())
}
