//! Counts of `tau_y(n) = 2^j tau_y(n + 1)`, the Mellin-integral
//! representation of their squarefree part, and related window integrals.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::Engine;
use crate::error::{param, Error, Result};
use crate::joint::{collect_pairs, PairFilter, PairStat};
use crate::quadrature::{cells_for, grid_sum, midpoints};
use crate::sieve_counts::BRUTE_FORCE_CEILING;

/// Default number of series terms in [`g_eval`].
pub const DEFAULT_G_TERMS: usize = 10_000;

/// Largest admissible quadrature step.
pub const MAX_STEP: f64 = 0.05;

/// `log log log x`, or `NaN` when undefined.
fn log3(x: f64) -> f64 {
    x.ln().ln().ln()
}

/// Parameters of one experiment, with range diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EMParams {
    pub x: u64,
    pub y: u64,
    pub j: i32,
    pub alpha: f64,
    /// `sqrt(log log y)`.
    pub l_y: f64,
    /// `log x / log y`.
    pub beta: f64,
    pub warnings: Vec<String>,
}

impl EMParams {
    /// `eps` sets the admissible range `|j| <= (1 - eps) sqrt(log_2 x log_3 x)`.
    pub fn new(x: u64, y: u64, j: i32, alpha: f64, eps: f64) -> Result<Self> {
        if y < 3 || y > x {
            return param(format!("need 3 <= y <= x, got y = {y}, x = {x}"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return param(format!("alpha = {alpha} must be positive"));
        }
        let xf = x as f64;
        let l_y = (y as f64).ln().ln().sqrt();
        let beta = xf.ln() / (y as f64).ln();
        let mut warnings = Vec::new();
        let j_max = (1.0 - eps) * (xf.ln().ln() * log3(xf)).sqrt();
        if !(j.unsigned_abs() as f64 <= j_max) {
            warnings.push(format!("j = {j} outside |j| <= {j_max:.4}"));
        }
        let l4 = log3(xf).ln();
        let lo = 21.0 * log3(xf) / l4;
        let hi = (xf.ln().ln().sqrt() / (log3(xf) * l4 * l4)).exp();
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            warnings.push(format!("beta range [A(x), exp(B(x))] is degenerate at x = {x} (A = {lo:.4}, exp B = {hi:.4})"));
        } else if !(lo..=hi).contains(&beta) {
            warnings.push(format!("beta = {beta:.4} outside [{lo:.4}, {hi:.4}]"));
        }
        Ok(Self {
            x,
            y,
            j,
            alpha,
            l_y,
            beta,
            warnings,
        })
    }
}

/// Uniform midpoint grid on `[0, 2 pi L]^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureGrid {
    /// Effective step after snapping to the domain.
    pub step: f64,
    pub l: f64,
    pub cells: usize,
}

impl QuadratureGrid {
    pub fn new(step: f64, l: f64) -> Result<Self> {
        if !(step > 0.0 && step <= MAX_STEP) {
            return param(format!(
                "quadrature step {step} must lie in (0, {MAX_STEP}]"
            ));
        }
        if !(l > 0.0 && l.is_finite()) {
            return param("domain scale must be positive");
        }
        let edge = 2.0 * PI * l;
        let cells = cells_for(edge, step);
        Ok(Self {
            step: edge / cells as f64,
            l,
            cells,
        })
    }

    /// `0.01 min(1, 1/L)`.
    pub fn default_for(l: f64) -> Result<Self> {
        Self::new(0.01 * (1.0f64).min(1.0 / l), l)
    }

    pub fn nodes(&self) -> Vec<f64> {
        midpoints(0.0, 2.0 * PI * self.l, self.cells)
    }
}

fn check_tau_args(x: u64, y: u64) -> Result<()> {
    if x > BRUTE_FORCE_CEILING {
        return Err(Error::Resource(format!(
            "x = {x} exceeds the brute-force ceiling"
        )));
    }
    if y < 2 || y > x {
        return param(format!("need 2 <= y <= x, got y = {y}"));
    }
    Ok(())
}

/// `log_2(t0 / t1)` when the ratio is a power of two.
fn power_of_two_ratio(t0: u32, t1: u32) -> Option<i32> {
    let (t0, t1) = (t0 as u64, t1 as u64);
    let (big, small, sign) = if t0 >= t1 { (t0, t1, 1) } else { (t1, t0, -1) };
    if big % small != 0 {
        return None;
    }
    let q = big / small;
    q.is_power_of_two()
        .then(|| sign * q.trailing_zeros() as i32)
}

/// `#{n <= x : tau_y(n) = 2^j tau_y(n + 1)}`, further restricted to
/// `mu^2(n(n+1)) = 1` when `squarefree_only` is set.
pub fn count_tau_ratio(
    engine: &Engine,
    x: u64,
    y: u64,
    j: i32,
    squarefree_only: bool,
) -> Result<u64> {
    check_tau_args(x, y)?;
    let parts = engine.map_pairs(x, 1, y, |w| {
        let mut c = 0u64;
        for (_, r0, r1) in w.pairs() {
            let hit = if squarefree_only {
                // tau_y = 2^omega_y on squarefree integers
                r0.squarefree && r1.squarefree && r0.omega_y as i32 - r1.omega_y as i32 == j
            } else if j >= 0 {
                r0.tau_y as u64 == (r1.tau_y as u64) << j.min(63)
            } else {
                (r0.tau_y as u64) << (-j).min(63) == r1.tau_y as u64
            };
            c += hit as u64;
        }
        c
    })?;
    Ok(parts.into_iter().sum())
}

/// `j -> #{n <= x : tau_y(n) = 2^j tau_y(n + 1)}` over every `j` that
/// occurs.
pub fn tau_ratio_histogram(
    engine: &Engine,
    x: u64,
    y: u64,
    squarefree_only: bool,
) -> Result<BTreeMap<i32, u64>> {
    check_tau_args(x, y)?;
    let parts = engine.map_pairs(x, 1, y, |w| {
        let mut h: BTreeMap<i32, u64> = BTreeMap::new();
        for (_, r0, r1) in w.pairs() {
            if squarefree_only && !(r0.squarefree && r1.squarefree) {
                continue;
            }
            if let Some(j) = power_of_two_ratio(r0.tau_y, r1.tau_y) {
                *h.entry(j).or_insert(0) += 1;
            }
        }
        h
    })?;
    let mut out = BTreeMap::new();
    for h in parts {
        for (k, c) in h {
            *out.entry(k).or_insert(0) += c;
        }
    }
    Ok(out)
}

/// Series value with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GValue {
    pub value: Complex64,
    pub tail_error: f64,
}

/// `g(u) = sum_k 1/(alpha + i(2 pi k + u/L)/log 2)`, summed symmetrically in
/// `k`.
///
/// Pairing `k` with `-k` gives, with `w = alpha + i u/(L log 2)` and
/// `b = 2 pi / log 2`,
/// `g = 1/w + sum_{k >= 1} 2w/(w^2 + b^2 k^2)`.
/// The first `terms` pair terms are summed directly and the rest is replaced
/// by two terms of the expansion of `int_{K + 1/2}^inf 2w/(w^2 + b^2 t^2) dt`.
/// If `terms` is too small for that expansion to converge it is raised.
pub fn g_eval(u: f64, alpha: f64, l_y: f64, terms: usize) -> Result<GValue> {
    if !(alpha > 0.0) {
        return param("alpha must be positive");
    }
    if terms < 10 {
        return param("at least 10 series terms are required");
    }
    let w = Complex64::new(alpha, u / (l_y * LN_2));
    let b = 2.0 * PI / LN_2;
    let need = (4.0 * w.norm() / b).ceil() as usize;
    let k_max = terms.max(need);
    let w2 = w * w;
    let b2 = b * b;
    let mut s = Complex64::new(0.0, 0.0);
    // smallest terms first
    for k in (1..=k_max).rev() {
        let kf = k as f64;
        s += 2.0 * w / (w2 + b2 * kf * kf);
    }
    let t = k_max as f64 + 0.5;
    let r = w2 / (b2 * t * t);
    let tail = 2.0 * w / (b2 * t) * (1.0 - r / 3.0);
    let wn = w.norm();
    let tail_error = wn / (b2 * t * t * t) + 2.0 * wn.powi(5) / (b2 * b2 * b2 * t.powi(5));
    Ok(GValue {
        value: 1.0 / w + s + tail,
        tail_error,
    })
}

/// Result of checking the Mellin representation of `S*_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MellinCheck {
    pub lhs: u64,
    pub rhs: f64,
    pub rel_err: f64,
    pub step: f64,
    pub imag_part: f64,
}

/// Compare `S*_j(x; y)` with
/// `(pi L log 2)^-2 int_{[0, 2 pi L]^2} g(u) g(u') sum_n e^{i (u - u')(omega_y(n) - omega_y(n+1))/L} e^{i (j/L)(u' - u)} du du'`,
/// the sum running over `n <= x` with `n(n+1)` squarefree.
pub fn mellin_identity_check(
    engine: &Engine,
    params: &EMParams,
    grid: &QuadratureGrid,
) -> Result<MellinCheck> {
    if (grid.l - params.l_y).abs() > 1e-12 * params.l_y {
        return param("grid domain does not match L_y");
    }
    let sample = collect_pairs(
        engine,
        params.x,
        1,
        Some(params.y),
        PairFilter::SquarefreePair,
        PairStat::OmegaY,
    )?;
    let mut by_m: BTreeMap<i64, u64> = BTreeMap::new();
    for (&(k1, k2), &c) in &sample.counts {
        *by_m
            .entry(k1 as i64 - k2 as i64 - params.j as i64)
            .or_insert(0) += c;
    }
    let lhs = by_m.get(&0).copied().unwrap_or(0);
    let l = params.l_y;
    let nodes = grid.nodes();
    let g: Vec<Complex64> = nodes
        .iter()
        .map(|&u| g_eval(u, params.alpha, l, DEFAULT_G_TERMS).map(|v| v.value))
        .collect::<Result<_>>()?;
    // phases[m][i] = e^{i u_i m / L}
    let weights: Vec<(f64, Vec<Complex64>)> = by_m
        .iter()
        .map(|(&m, &c)| {
            (
                c as f64,
                nodes
                    .iter()
                    .map(|&u| Complex64::from_polar(1.0, u * m as f64 / l))
                    .collect(),
            )
        })
        .collect();
    let n = grid.cells;
    let total = grid_sum(n, n, |i, k| {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, ph) in &weights {
            s += *c * ph[i] * ph[k].conj();
        }
        g[i] * g[k] * s
    });
    let h = grid.step;
    let pref = 1.0 / (PI * l * LN_2).powi(2);
    let rhs = total * pref * h * h;
    let rel_err = (lhs as f64 - rhs.re).abs() / (lhs.max(1) as f64);
    Ok(MellinCheck {
        lhs,
        rhs: rhs.re,
        rel_err,
        step: h,
        imag_part: rhs.im,
    })
}

/// `int_{[0, 2 pi L]^2} e^{-(u - u')^2 - i (j/L)(u - u')} du du'` on `grid`.
pub fn gaussian_window_integral(l: f64, j: i32, grid: &QuadratureGrid) -> Result<Complex64> {
    if !(l >= 1.0) {
        return param(format!("L = {l} must be at least 1"));
    }
    if (grid.l - l).abs() > 1e-12 * l {
        return param("grid domain does not match L");
    }
    let nodes = grid.nodes();
    let f = j as f64 / l;
    let n = grid.cells;
    let s = grid_sum(n, n, |i, k| {
        let d = nodes[i] - nodes[k];
        Complex64::from_polar((-d * d).exp(), -f * d)
    });
    Ok(s * grid.step * grid.step)
}

/// `2 pi^{3/2} e^{-j^2/(4 L^2)} L`.
pub fn heur_main_term(l: f64, j: i32) -> f64 {
    let jf = j as f64;
    2.0 * PI.powf(1.5) * (-jf * jf / (4.0 * l * l)).exp() * l
}

/// `(pi L log 2)^-2 int g(u) g(u') e^{-(u - u')^2 - i (j/L)(u - u')}`, the
/// Gaussian part of `S*_j / E(x)`.
pub fn gaussian_main_part(params: &EMParams, grid: &QuadratureGrid) -> Result<Complex64> {
    let l = params.l_y;
    let nodes = grid.nodes();
    let g: Vec<Complex64> = nodes
        .iter()
        .map(|&u| g_eval(u, params.alpha, l, DEFAULT_G_TERMS).map(|v| v.value))
        .collect::<Result<_>>()?;
    let f = params.j as f64 / l;
    let n = grid.cells;
    let s = grid_sum(n, n, |i, k| {
        let d = nodes[i] - nodes[k];
        g[i] * g[k] * Complex64::from_polar((-d * d).exp(), -f * d)
    });
    Ok(s * grid.step * grid.step / (PI * l * LN_2).powi(2))
}

/// Everything reported for one `(x, y, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EMReport {
    pub params: EMParams,
    /// `S_j(x; y)`.
    pub count: u64,
    /// `S*_j(x; y)`.
    pub count_squarefree: u64,
    /// `e^{-j^2/(4 L_y^2)} x / sqrt(log log x)`.
    pub reference: f64,
    pub ratio: f64,
    /// `S_j sqrt(log log x) / x`.
    pub normalized_count: f64,
    /// Gaussian part `M` of the decomposition `S*_j / E(x) = M + E`.
    pub main_part: f64,
    /// `S*_j / E(x) - M`.
    pub error_part: f64,
    /// `e^{-j^2/(4 L_y^2)} / L_y`, the order of `M`.
    pub main_part_order: f64,
}

pub fn em_report(engine: &Engine, params: &EMParams, euler_value: f64) -> Result<EMReport> {
    let count = count_tau_ratio(engine, params.x, params.y, params.j, false)?;
    let count_squarefree = count_tau_ratio(engine, params.x, params.y, params.j, true)?;
    let xf = params.x as f64;
    let jf = params.j as f64;
    let l2 = params.l_y * params.l_y;
    let profile = (-jf * jf / (4.0 * l2)).exp();
    let ll = xf.ln().ln();
    let reference = profile * xf / ll.sqrt();
    let grid = QuadratureGrid::new(MAX_STEP, params.l_y)?;
    let main_part = gaussian_main_part(params, &grid)?.re;
    let error_part = count_squarefree as f64 / (xf * euler_value) - main_part;
    Ok(EMReport {
        params: params.clone(),
        count,
        count_squarefree,
        reference,
        ratio: count as f64 / reference,
        normalized_count: count as f64 * ll.sqrt() / xf,
        main_part,
        error_part,
        main_part_order: profile / params.l_y,
    })
}
