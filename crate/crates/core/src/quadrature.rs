//! Uniform midpoint grids and order-fixed summation.

use num_complex::Complex64;
use rayon::prelude::*;

/// Midpoints of `cells` equal cells covering `[lo, hi]`.
pub fn midpoints(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    (0..cells).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Number of cells for a requested step, snapped so the cells tile the
/// interval exactly.
pub fn cells_for(len: f64, step: f64) -> usize {
    ((len / step) - 1e-9).ceil().max(1.0) as usize
}

/// Pairwise summation in a fixed tree shape.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_real(a) + pairwise_sum_real(b)
        }
    }
}

/// `sum_{i, k} f(i, k)` over a `rows x cols` grid. Rows run in parallel;
/// each row and the final combination use [`pairwise_sum`], so the result
/// does not depend on the thread count.
pub fn grid_sum<F>(rows: usize, cols: usize, f: F) -> Complex64
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let row_sums: Vec<Complex64> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let row: Vec<Complex64> = (0..cols).map(|k| f(i, k)).collect();
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&row_sums)
}
