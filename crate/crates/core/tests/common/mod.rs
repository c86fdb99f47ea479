//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod extended;

pub fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// `lo, lo + step, ..., hi` with the step applied in integer multiples.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}
