//! Empirical joint statistics of `(omega(n), omega(n + a))`.
//!
//! Samples are stored as histograms over pairs of prime-factor counts. The
//! counts never exceed a few dozen, so the histogram stays tiny for any `x`
//! and per-window histograms merge by integer addition.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{mu_y_value, prime_factors, Engine};
use crate::error::{domain, param, Result};
use crate::quadrature::{cells_for, grid_sum, midpoints};

/// Which `n <= x` enter a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFilter {
    /// `mu^2(n) = mu^2(n + a) = 1`.
    SquarefreePair,
    /// As above, and additionally `gcd(n, a) = 1`.
    SquarefreePairCoprimeA,
    All,
}

impl std::str::FromStr for PairFilter {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squarefree_pair" | "squarefree" => Ok(Self::SquarefreePair),
            "squarefree_pair_coprime_a" | "coprime" => Ok(Self::SquarefreePairCoprimeA),
            "all" => Ok(Self::All),
            other => param(format!("unknown filter {other:?}")),
        }
    }
}

/// Which prime-factor count is recorded for `n` and `n + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStat {
    Omega,
    OmegaY,
}

/// Multiset of `(stat(n), stat(n + a))` over qualifying `n <= x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSample {
    pub x: u64,
    pub a: u64,
    /// `None` means no truncation.
    pub y: Option<u64>,
    pub filter: PairFilter,
    pub stat: PairStat,
    pub counts: BTreeMap<(u32, u32), u64>,
    pub total: u64,
}

impl PairSample {
    /// Build a sample directly from a histogram.
    pub fn from_counts(
        x: u64,
        a: u64,
        filter: PairFilter,
        counts: BTreeMap<(u32, u32), u64>,
    ) -> Self {
        let total = counts.values().sum();
        Self {
            x,
            a,
            y: None,
            filter,
            stat: PairStat::Omega,
            counts,
            total,
        }
    }

    /// The same sample with the two coordinates exchanged.
    pub fn swapped(&self) -> Self {
        let counts = self
            .counts
            .iter()
            .map(|(&(k1, k2), &c)| ((k2, k1), c))
            .collect();
        Self {
            counts,
            ..self.clone()
        }
    }

    fn ensure_nonempty(&self) -> Result<()> {
        if self.total == 0 {
            domain("empty pair sample")
        } else {
            Ok(())
        }
    }

    /// CSV with columns `k1,k2,count`.
    pub fn write_histogram_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k1", "k2", "count"])?;
        for (&(k1, k2), &c) in &self.counts {
            out.serialize((k1, k2, c))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Radical primes of `a`, used for the `gcd(n, a) = 1` test.
fn radical(a: u64) -> Vec<u64> {
    prime_factors(a).into_iter().map(|(p, _)| p).collect()
}

fn check_pair_args(x: u64, a: u64, y: Option<u64>) -> Result<()> {
    if a < 1 || a >= x {
        return param(format!("shift a = {a} must satisfy 1 <= a < x = {x}"));
    }
    if let Some(y) = y {
        if y < 2 || y > x {
            return param(format!("threshold y = {y} must satisfy 2 <= y <= x = {x}"));
        }
    }
    Ok(())
}

/// Histogram of `(stat(n), stat(n + a))` over `n <= x` passing `filter`.
pub fn collect_pairs(
    engine: &Engine,
    x: u64,
    a: u64,
    y: Option<u64>,
    filter: PairFilter,
    stat: PairStat,
) -> Result<PairSample> {
    check_pair_args(x, a, y)?;
    let stat = if y.is_none() { PairStat::Omega } else { stat };
    let sieve_y = y.unwrap_or(u64::MAX);
    let rad = radical(a);
    let parts = engine.map_pairs(x, a, sieve_y, |w| {
        let mut h: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for (n, r0, r1) in w.pairs() {
            let keep = match filter {
                PairFilter::All => true,
                PairFilter::SquarefreePair => r0.squarefree && r1.squarefree,
                PairFilter::SquarefreePairCoprimeA => {
                    r0.squarefree && r1.squarefree && rad.iter().all(|p| n % p != 0)
                }
            };
            if keep {
                let key = match stat {
                    PairStat::Omega => (r0.omega as u32, r1.omega as u32),
                    PairStat::OmegaY => (r0.omega_y as u32, r1.omega_y as u32),
                };
                *h.entry(key).or_insert(0) += 1;
            }
        }
        h
    })?;
    let mut counts = BTreeMap::new();
    for h in parts {
        for (k, c) in h {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    let total = counts.values().sum();
    Ok(PairSample {
        x,
        a,
        y,
        filter,
        stat,
        counts,
        total,
    })
}

/// Centering and scale applied to prime-factor counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub center: f64,
    pub scale: f64,
}

impl Normalization {
    /// `scale = sqrt(center)`.
    pub fn new(center: f64) -> Result<Self> {
        if !(center > 0.0 && center.is_finite()) {
            return param(format!("normalization center {center} must be positive"));
        }
        Ok(Self {
            center,
            scale: center.sqrt(),
        })
    }

    /// Center `log log x`.
    pub fn log_log(x: u64) -> Result<Self> {
        Self::new((x as f64).ln().ln())
    }

    /// Center `lambda(x) = sum_{p <= x, p does not divide a} f(p)`.
    pub fn lambda(x: u64, a: u64) -> Result<Self> {
        Self::new(crate::kubilius::lambda_of(x, a)?)
    }

    pub fn apply(&self, k: u32) -> f64 {
        (k as f64 - self.center) / self.scale
    }
}

/// Standard Gaussian references.
pub mod gaussian {
    use statrs::function::erf::erfc;

    /// Standard normal distribution function, via `erfc` for accuracy in
    /// both tails.
    pub fn phi(z: f64) -> f64 {
        if z == f64::INFINITY {
            1.0
        } else if z == f64::NEG_INFINITY {
            0.0
        } else {
            0.5 * erfc(-z / std::f64::consts::SQRT_2)
        }
    }

    /// Uncorrelated bivariate distribution function `Phi(z) Phi(z')`.
    pub fn phi2(z: f64, zp: f64) -> f64 {
        phi(z) * phi(zp)
    }

    /// Characteristic function of the uncorrelated bivariate Gaussian.
    pub fn chi(u: f64, v: f64) -> f64 {
        (-(u * u + v * v) / 2.0).exp()
    }
}

/// Anything with a bivariate characteristic function.
pub trait CharFn: Sync {
    fn char_fn(&self, u: f64, v: f64) -> Complex64;
}

/// The bivariate Gaussian itself; its distance to `chi` is zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianRef;

impl CharFn for GaussianRef {
    fn char_fn(&self, u: f64, v: f64) -> Complex64 {
        Complex64::new(gaussian::chi(u, v), 0.0)
    }
}

/// A sample with normalized coordinates and probability weights.
#[derive(Debug, Clone)]
pub struct NormalizedSample {
    atoms: Vec<(f64, f64, f64)>,
}

impl NormalizedSample {
    pub fn new(sample: &PairSample, norm: Normalization) -> Result<Self> {
        sample.ensure_nonempty()?;
        let total = sample.total as f64;
        let atoms = sample
            .counts
            .iter()
            .map(|(&(k1, k2), &c)| (norm.apply(k1), norm.apply(k2), c as f64 / total))
            .collect();
        Ok(Self { atoms })
    }
}

impl CharFn for NormalizedSample {
    fn char_fn(&self, u: f64, v: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|&(z1, z2, w)| Complex64::from_polar(w, u * z1 + v * z2))
            .sum()
    }
}

/// `E*^{-1} sum mult * e^{i (u z1 + v z2)}` over the normalized sample.
pub fn char_fn(sample: &PairSample, norm: Normalization, u: f64, v: f64) -> Result<Complex64> {
    Ok(NormalizedSample::new(sample, norm)?.char_fn(u, v))
}

/// One corner of the empirical CDF grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub z1: f64,
    pub z2: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Phi2")]
    pub phi2: f64,
    pub diff: f64,
}

struct CdfGrid {
    z1: Vec<f64>,
    z2: Vec<f64>,
    /// `cum[i][j]` = mass with first coordinate `<= z1[i]` and second `<= z2[j]`.
    cum: Vec<Vec<f64>>,
}

impl CdfGrid {
    fn new(sample: &PairSample, norm: Normalization) -> Result<Self> {
        sample.ensure_nonempty()?;
        let k1s: Vec<u32> = {
            let mut v: Vec<u32> = sample.counts.keys().map(|k| k.0).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let k2s: Vec<u32> = {
            let mut v: Vec<u32> = sample.counts.keys().map(|k| k.1).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut counts = vec![vec![0u64; k2s.len()]; k1s.len()];
        for (&(k1, k2), &c) in &sample.counts {
            let i = k1s.binary_search(&k1).unwrap();
            let j = k2s.binary_search(&k2).unwrap();
            counts[i][j] += c;
        }
        // integer prefix sums first, one division at the end
        let mut cum_int = vec![vec![0u64; k2s.len()]; k1s.len()];
        for i in 0..k1s.len() {
            let mut row = 0u64;
            for j in 0..k2s.len() {
                row += counts[i][j];
                cum_int[i][j] = row + if i > 0 { cum_int[i - 1][j] } else { 0 };
            }
        }
        let total = sample.total as f64;
        let cum = cum_int
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / total).collect())
            .collect();
        Ok(Self {
            z1: k1s.iter().map(|&k| norm.apply(k)).collect(),
            z2: k2s.iter().map(|&k| norm.apply(k)).collect(),
            cum,
        })
    }
}

/// Exact `sup_{R^2} |F(z, z') - Phi(z) Phi(z')|` for the right-continuous
/// empirical CDF `F` of the normalized sample.
///
/// `F` is constant on each cell `[z1_i, z1_{i+1}) x [z2_j, z2_{j+1})` while
/// `Phi(z) Phi(z')` increases in both coordinates, so the supremum over a
/// cell is reached at its lower-left corner or approached at its upper-right
/// corner. Checking both corners of every cell, including the unbounded
/// cells, gives the exact value.
pub fn sup_distance_vs_gaussian(sample: &PairSample, norm: Normalization) -> Result<f64> {
    let g = CdfGrid::new(sample, norm)?;
    let (m1, m2) = (g.z1.len(), g.z2.len());
    let lo1 = |i: usize| {
        if i == 0 {
            0.0
        } else {
            gaussian::phi(g.z1[i - 1])
        }
    };
    let hi1 = |i: usize| if i == m1 { 1.0 } else { gaussian::phi(g.z1[i]) };
    let lo2 = |j: usize| {
        if j == 0 {
            0.0
        } else {
            gaussian::phi(g.z2[j - 1])
        }
    };
    let hi2 = |j: usize| if j == m2 { 1.0 } else { gaussian::phi(g.z2[j]) };
    let mut sup = 0.0f64;
    for i in 0..=m1 {
        for j in 0..=m2 {
            let f = if i == 0 || j == 0 {
                0.0
            } else {
                g.cum[i - 1][j - 1]
            };
            sup = sup
                .max((f - lo1(i) * lo2(j)).abs())
                .max((f - hi1(i) * hi2(j)).abs());
        }
    }
    Ok(sup)
}

/// The empirical CDF at every attained corner `(z1_i, z2_j)` next to the
/// Gaussian product value.
pub fn cdf_grid(sample: &PairSample, norm: Normalization) -> Result<Vec<CdfPoint>> {
    let g = CdfGrid::new(sample, norm)?;
    let mut out = Vec::with_capacity(g.z1.len() * g.z2.len());
    for (i, &z1) in g.z1.iter().enumerate() {
        for (j, &z2) in g.z2.iter().enumerate() {
            let f = g.cum[i][j];
            let p = gaussian::phi2(z1, z2);
            out.push(CdfPoint {
                z1,
                z2,
                f,
                phi2: p,
                diff: f - p,
            });
        }
    }
    Ok(out)
}

/// CSV with columns `z1,z2,F,Phi2,diff`.
pub fn write_cdf_csv<W: Write>(points: &[CdfPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

/// `sum_{n <= x} mu_y(n) mu_y(n + a)`, kept as an exact integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub x: u64,
    pub y: u64,
    pub a: u64,
    pub numerator: i64,
    pub normalized: f64,
}

pub fn correlation_mu_y(engine: &Engine, x: u64, y: u64, a: u64) -> Result<Correlation> {
    check_pair_args(x, a, Some(y))?;
    let parts = engine.map_pairs(x, a, y, |w| {
        w.pairs()
            .map(|(_, r0, r1)| (mu_y_value(r0) * mu_y_value(r1)) as i64)
            .sum::<i64>()
    })?;
    let numerator: i64 = parts.into_iter().sum();
    Ok(Correlation {
        x,
        y,
        a,
        numerator,
        normalized: numerator as f64 / x as f64,
    })
}

/// `x^{-1} sum_{n <= x} mu(n; u) mu(n + a; v)`.
pub fn correlation_mu_u(engine: &Engine, x: u64, u: f64, v: f64, a: u64) -> Result<Complex64> {
    let tau = 2.0 * std::f64::consts::PI;
    if u.abs() > tau || v.abs() > tau {
        return param("frequencies must satisfy |u|, |v| <= 2 pi");
    }
    let sample = collect_pairs(
        engine,
        x,
        a,
        None,
        PairFilter::SquarefreePair,
        PairStat::Omega,
    )?;
    Ok(correlation_mu_u_from(&sample, u, v))
}

/// Same sum evaluated from a squarefree-pair `omega` histogram.
pub fn correlation_mu_u_from(sample: &PairSample, u: f64, v: f64) -> Complex64 {
    let s: Complex64 = sample
        .counts
        .iter()
        .map(|(&(k1, k2), &c)| Complex64::from_polar(c as f64, u * k1 as f64 + v * k2 as f64))
        .sum();
    s / sample.x as f64
}

/// `E*^{-1} sum mult * z1^{2 e1} z2^{2 e2}` for a coprime squarefree-pair
/// sample.
pub fn moment(sample: &PairSample, norm: Normalization, e1: u32, e2: u32) -> Result<f64> {
    if e1 > 1 || e2 > 1 {
        return param("moment exponents must be 0 or 1");
    }
    if sample.filter != PairFilter::SquarefreePairCoprimeA {
        return param("moments are defined on squarefree_pair_coprime_a samples");
    }
    sample.ensure_nonempty()?;
    if e1 == 0 && e2 == 0 {
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for (&(k1, k2), &c) in &sample.counts {
        let z1 = norm.apply(k1);
        let z2 = norm.apply(k2);
        acc += c as f64 * z1.powi(2 * e1 as i32) * z2.powi(2 * e2 as i32);
    }
    Ok(acc / sample.total as f64)
}

/// Value of the smoothing-inequality right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EsseenDiagnostic {
    pub t: f64,
    pub step: f64,
    /// Midpoint-rule value of `int_{R_T} |phi - chi| / |t t'|`.
    pub integral: f64,
    pub value: f64,
}

/// `int_{R_T} |phi(t, t') - chi(t, t')| / |t t'| dt dt' + 1/T` with
/// `R_T = {T^{-3} < |t|, |t'| <= T}`.
///
/// The quadrant `(-, -)` mirrors `(+, +)` because `phi(-u, -v)` is the
/// conjugate of `phi(u, v)` and `chi` is real; likewise `(-, +)` mirrors
/// `(+, -)`.
pub fn esseen_integral<C: CharFn>(cf: &C, t: f64, grid_step: f64) -> Result<EsseenDiagnostic> {
    if !(t >= 1.0) {
        return param(format!("T = {t} must be at least 1"));
    }
    let inner = t.powi(-3);
    if !(grid_step > 0.0) || grid_step > inner {
        return param(format!(
            "grid step {grid_step} must lie in (0, T^-3 = {inner}]"
        ));
    }
    let len = t - inner;
    if len <= 0.0 {
        return Ok(EsseenDiagnostic {
            t,
            step: grid_step,
            integral: 0.0,
            value: 1.0 / t,
        });
    }
    let n = cells_for(len, grid_step);
    let h = len / n as f64;
    let pts = midpoints(inner, t, n);
    let quadrant = |sign: f64| {
        grid_sum(n, n, |i, k| {
            let (u, v) = (pts[i], sign * pts[k]);
            let d = (cf.char_fn(u, v) - gaussian::chi(u, v)).norm();
            Complex64::new(d / (u * v).abs(), 0.0)
        })
        .re
    };
    let integral = 2.0 * (quadrant(1.0) + quadrant(-1.0)) * h * h;
    Ok(EsseenDiagnostic {
        t,
        step: h,
        integral,
        value: integral + 1.0 / t,
    })
}

pub fn esseen_diagnostic(
    sample: &PairSample,
    norm: Normalization,
    t: f64,
    grid_step: f64,
) -> Result<EsseenDiagnostic> {
    esseen_integral(&NormalizedSample::new(sample, norm)?, t, grid_step)
}

/// `T = (log log x)^{1/4} / log log log x`, the smoothing parameter used
/// for the rate estimate.
pub fn canonical_t(x: u64) -> f64 {
    let l2 = (x as f64).ln().ln();
    l2.powf(0.25) / l2.ln()
}
