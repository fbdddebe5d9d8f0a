//! Probabilistic model for the prime-factor counts of `(n, n + a)`.
//!
//! Each prime `p <= y` with `p` not dividing `a` contributes an independent
//! random vector `X_p` equal to `(1, 0)` or `(0, 1)` with probability `f(p)`
//! each and `(0, 0)` otherwise. The law of `sum_p X_p` is compared with the
//! empirical law of `(omega_y(n), omega_y(n + a))` and with a product of two
//! Poisson laws.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{is_prime, primes_up_to, Engine};
use crate::error::{domain, param, Result};
use crate::joint::{collect_pairs, PairFilter, PairStat};

/// `f(p) = (1/p)(1 - 1/p)/(1 - 2/p^2)`, the relative density of `p | n` among
/// `n` with `n` and `n + a` squarefree.
pub fn density_squarefree(p: u64) -> Result<f64> {
    if !is_prime(p) {
        return param(format!("{p} is not prime"));
    }
    let p = p as f64;
    Ok((p - 1.0) / (p * p - 2.0))
}

/// The densities `f(p)` for primes `p <= y`, `p` not dividing `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityTable {
    pub y: u64,
    pub a: u64,
    pub entries: Vec<(u64, f64)>,
    pub lambda: f64,
}

impl DensityTable {
    pub fn new(y: u64, a: u64) -> Result<Self> {
        if y < 2 {
            return param(format!("y = {y} must be at least 2"));
        }
        if a < 1 {
            return param("shift a must be positive");
        }
        let primes = primes_up_to(y)?;
        let entries: Vec<(u64, f64)> = primes
            .iter()
            .filter(|p| !a.is_multiple_of(*p))
            .map(|p| (p, ((p - 1) as f64) / ((p * p - 2) as f64)))
            .collect();
        let lambda = entries.iter().map(|e| e.1).sum();
        Ok(Self {
            y,
            a,
            entries,
            lambda,
        })
    }

    /// A table with no primes; its model law is the point mass at `(0, 0)`.
    pub fn empty(y: u64, a: u64) -> Self {
        Self {
            y,
            a,
            entries: Vec::new(),
            lambda: 0.0,
        }
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum()
    }
}

/// `lambda(y) = sum_{p <= y, p does not divide a} f(p)`.
pub fn lambda_of(y: u64, a: u64) -> Result<f64> {
    Ok(DensityTable::new(y, a)?.lambda)
}

/// Finitely supported law on pairs of non-negative integers. Mass that was
/// pruned or lies outside the stored support is kept in `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw2D {
    pub probabilities: BTreeMap<(u32, u32), f64>,
    pub tail_mass: f64,
}

impl DiscreteLaw2D {
    pub fn point(k1: u32, k2: u32) -> Self {
        Self {
            probabilities: [((k1, k2), 1.0)].into_iter().collect(),
            tail_mass: 0.0,
        }
    }

    pub fn mass(&self, k1: u32, k2: u32) -> f64 {
        self.probabilities.get(&(k1, k2)).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.values().sum::<f64>() + self.tail_mass
    }

    pub fn marginal(&self, coord: usize) -> BTreeMap<u32, f64> {
        let mut m = BTreeMap::new();
        for (&(k1, k2), &p) in &self.probabilities {
            let k = if coord == 0 { k1 } else { k2 };
            *m.entry(k).or_insert(0.0) += p;
        }
        m
    }

    pub fn mean(&self, coord: usize) -> f64 {
        self.marginal(coord)
            .iter()
            .map(|(&k, &p)| k as f64 * p)
            .sum()
    }

    /// CSV with columns `k1,k2,mass`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k1", "k2", "mass"])?;
        for (&(k1, k2), &m) in &self.probabilities {
            out.serialize((k1, k2, m))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Exact law of `sum_p X_p` over the primes in `table`, by convolution in
/// ascending prime order on a dense box. After each prime the lightest
/// states are dropped into `tail_mass`, at most `tail_eps / #primes` in
/// total, so `tail_mass <= tail_eps`.
pub fn model_law(table: &DensityTable, tail_eps: f64) -> Result<DiscreteLaw2D> {
    if !(0.0..=1e-6).contains(&tail_eps) {
        return param(format!("tail_eps = {tail_eps} must lie in [0, 1e-6]"));
    }
    let np = table.entries.len();
    let cut = if np == 0 { 0.0 } else { tail_eps / np as f64 };
    // grid[i][j] = mass at (i, j); box grows by one row and column per prime
    let mut grid: Vec<Vec<f64>> = vec![vec![1.0]];
    let mut tail = 0.0;
    for &(_, f) in &table.entries {
        let rows = grid.len() + 1;
        let cols = grid[0].len() + 1;
        let stay = 1.0 - 2.0 * f;
        let mut next = vec![vec![0.0; cols]; rows];
        for (i, row) in grid.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                next[i][j] += m * stay;
                next[i + 1][j] += m * f;
                next[i][j + 1] += m * f;
            }
        }
        if cut > 0.0 {
            let mut small: Vec<(f64, usize, usize)> = Vec::new();
            for (i, row) in next.iter().enumerate() {
                for (j, &m) in row.iter().enumerate() {
                    if m > 0.0 && m < cut {
                        small.push((m, i, j));
                    }
                }
            }
            small.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            let mut dropped = 0.0;
            for (m, i, j) in small {
                if dropped + m > cut {
                    break;
                }
                dropped += m;
                next[i][j] = 0.0;
            }
            tail += dropped;
        }
        while next.len() > 1 && next.last().unwrap().iter().all(|&m| m == 0.0) {
            next.pop();
        }
        while next[0].len() > 1 && next.iter().all(|r| *r.last().unwrap() == 0.0) {
            for r in next.iter_mut() {
                r.pop();
            }
        }
        grid = next;
    }
    let mut probabilities = BTreeMap::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            if m > 0.0 {
                probabilities.insert((i as u32, j as u32), m);
            }
        }
    }
    Ok(DiscreteLaw2D {
        probabilities,
        tail_mass: tail,
    })
}

/// Poisson(`lambda`) probabilities for `k = 0..=K` and the exact upper tail
/// beyond `K`, with `K` the first index past the mode where the tail falls
/// below `max(tail_eps / 4, 1e-17)`.
fn poisson_pmf(lambda: f64, tail_eps: f64) -> (Vec<f64>, f64) {
    let ll = lambda.ln();
    let stop = (tail_eps / 4.0).max(1e-17);
    let mut logp = -lambda;
    let mut pmf = vec![logp.exp()];
    loop {
        let k = pmf.len() as f64;
        logp += ll - k.ln();
        let p = logp.exp();
        // past the mode the tail from k on is at most p / (1 - lambda/(k+1))
        if k > lambda && p / (1.0 - lambda / (k + 1.0)) < stop {
            break;
        }
        pmf.push(p);
    }
    // tail summed directly so it is not lost to cancellation in 1 - sum
    let mut tail = 0.0;
    let mut k = pmf.len() as f64;
    let mut logt = logp;
    loop {
        let p = logt.exp();
        tail += p;
        if p <= tail * 1e-18 {
            break;
        }
        k += 1.0;
        logt += ll - k.ln();
    }
    (pmf, tail)
}

/// Product law of two independent Poisson(`lambda`) coordinates.
pub fn poisson2_law(lambda: f64, tail_eps: f64) -> Result<DiscreteLaw2D> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return param(format!("lambda = {lambda} must be positive"));
    }
    if tail_eps < 0.0 {
        return param("tail_eps must be non-negative");
    }
    let (pmf, t) = poisson_pmf(lambda, tail_eps);
    let mut probabilities = BTreeMap::new();
    for (i, &p) in pmf.iter().enumerate() {
        for (j, &q) in pmf.iter().enumerate() {
            let m = p * q;
            if m > 0.0 {
                probabilities.insert((i as u32, j as u32), m);
            }
        }
    }
    Ok(DiscreteLaw2D {
        probabilities,
        tail_mass: 2.0 * t - t * t,
    })
}

/// Law of `(omega_y(n), omega_y(n + a))` over `n <= x` with `n`, `n + a`
/// squarefree and `gcd(n, a) = 1`. Under the coprimality condition no prime
/// dividing `a` can divide `n` or `n + a`, so `omega_y` already counts only
/// primes not dividing `a`.
pub fn empirical_law(engine: &Engine, x: u64, y: u64, a: u64) -> Result<DiscreteLaw2D> {
    let s = collect_pairs(
        engine,
        x,
        a,
        Some(y),
        PairFilter::SquarefreePairCoprimeA,
        PairStat::OmegaY,
    )?;
    if s.total == 0 {
        return domain("no qualifying pairs");
    }
    let t = s.total as f64;
    let probabilities = s.counts.iter().map(|(&k, &c)| (k, c as f64 / t)).collect();
    Ok(DiscreteLaw2D {
        probabilities,
        tail_mass: 0.0,
    })
}

/// Total variation distance.
///
/// For atomic laws `sup_A |P(A) - Q(A)|` is attained at `A = {P > Q}` and
/// equals `(1/2) sum |P - Q|`. Tail masses have unknown location and are
/// counted as if disjoint.
pub fn tv(p: &DiscreteLaw2D, q: &DiscreteLaw2D) -> f64 {
    let mut l1 = 0.0;
    for (k, &m) in &p.probabilities {
        l1 += (m - q.probabilities.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &m) in &q.probabilities {
        if !p.probabilities.contains_key(k) {
            l1 += m;
        }
    }
    (0.5 * (l1 + p.tail_mass + q.tail_mass)).min(1.0)
}

/// `E exp(i w (Z - lambda)/sqrt(lambda))` for `Z ~ Poisson(lambda)`.
pub fn poisson_charfn(w: f64, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return param("lambda must be positive");
    }
    let s = lambda.sqrt();
    Ok((lambda * (Complex64::from_polar(1.0, w / s) - 1.0) - Complex64::new(0.0, w * s)).exp())
}

/// `exp(-lambda (1 - cos(w / sqrt(lambda))))`.
pub fn poisson_charfn_modulus(w: f64, lambda: f64) -> f64 {
    (-lambda * (1.0 - (w / lambda.sqrt()).cos())).exp()
}

/// Explicit part of the Roos bound for the model against its Poisson
/// approximation: `2 min(1, 1/lambda) sum f(p)^2`.
pub fn roos_bound(table: &DensityTable) -> f64 {
    let m = if table.lambda > 0.0 {
        (1.0 / table.lambda).min(1.0)
    } else {
        1.0
    };
    2.0 * m * table.sum_of_squares()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn densities() {
        assert_eq!(density_squarefree(2).unwrap(), 0.5);
        assert!(close(density_squarefree(3).unwrap(), 2.0 / 7.0, 1e-16));
        assert!(density_squarefree(4).is_err());
        let p = 1_000_003u64;
        assert!(close(density_squarefree(p).unwrap() * p as f64, 1.0, 1e-5));
        for p in [2u64, 3, 5, 7, 11, 101] {
            assert!(density_squarefree(p).unwrap() <= 1.0 / p as f64);
        }
    }

    #[test]
    fn lambda_values() {
        assert!(close(lambda_of(3, 1).unwrap(), 11.0 / 14.0, 1e-15));
        assert_eq!(lambda_of(2, 2).unwrap(), 0.0);
        assert!(lambda_of(1, 1).is_err());
    }

    #[test]
    fn model_law_small_cases() {
        let l = model_law(&DensityTable::new(2, 1).unwrap(), 0.0).unwrap();
        assert_eq!(l.mass(1, 0), 0.5);
        assert_eq!(l.mass(0, 1), 0.5);
        assert_eq!(l.mass(0, 0), 0.0);

        let l = model_law(&DensityTable::new(3, 1).unwrap(), 0.0).unwrap();
        let want = [
            ((2, 0), 1.0 / 7.0),
            ((1, 1), 2.0 / 7.0),
            ((0, 2), 1.0 / 7.0),
            ((1, 0), 3.0 / 14.0),
            ((0, 1), 3.0 / 14.0),
        ];
        assert_eq!(l.probabilities.len(), want.len());
        for ((k1, k2), m) in want {
            assert!(close(l.mass(k1, k2), m, 1e-15), "{k1},{k2}");
        }
    }

    #[test]
    fn model_law_invariants() {
        let t = DensityTable::new(1000, 1).unwrap();
        let l = model_law(&t, 0.0).unwrap();
        assert!(close(l.total_mass(), 1.0, 1e-12));
        assert!(close(l.mean(0), t.lambda, 1e-9));
        let (m0, m1) = (l.marginal(0), l.marginal(1));
        for (k, p) in &m0 {
            assert!(close(*p, m1[k], 1e-12));
        }
        let pruned = model_law(&t, 1e-7).unwrap();
        assert!(pruned.tail_mass > 0.0 && pruned.tail_mass <= 1e-7);
        assert!(close(pruned.total_mass(), 1.0, 1e-12));
        assert_eq!(
            model_law(&DensityTable::empty(10, 1), 0.0).unwrap(),
            DiscreteLaw2D::point(0, 0)
        );
        assert!(model_law(&t, -1.0).is_err());
        assert!(model_law(&t, 1e-3).is_err());
    }

    #[test]
    fn poisson_law() {
        let l = poisson2_law(1.0, 0.0).unwrap();
        assert!(close(l.mass(0, 0), (-2.0f64).exp(), 1e-16));
        assert!(close(l.mass(1, 1), (-2.0f64).exp(), 1e-16));
        assert!(close(l.total_mass(), 1.0, 1e-12));
        let lam = 3.7;
        let l = poisson2_law(lam, 0.0).unwrap();
        let m = l.marginal(0);
        let mut p = (-lam).exp();
        for k in 0..20u32 {
            if k > 0 {
                p *= lam / k as f64;
            }
            assert!(close(m[&k], p, 1e-12));
        }
        assert!(poisson2_law(0.0, 0.0).is_err());
    }

    #[test]
    fn tv_basics() {
        let a = DiscreteLaw2D::point(0, 1);
        let b = DiscreteLaw2D::point(1, 0);
        assert_eq!(tv(&a, &a), 0.0);
        assert_eq!(tv(&a, &b), 1.0);
    }

    #[test]
    fn charfn() {
        assert_eq!(poisson_charfn(0.0, 2.0).unwrap(), Complex64::new(1.0, 0.0));
        for lam in [0.5, 1.0, 4.0, 25.0] {
            for i in -100..=100 {
                let w = i as f64 / 10.0;
                let z = poisson_charfn(w, lam).unwrap();
                assert!(close(z.norm(), poisson_charfn_modulus(w, lam), 1e-12));
            }
        }
        assert!(close(
            poisson_charfn(2.0, 4.0).unwrap().norm(),
            (-4.0 * (1.0 - 1f64.cos())).exp(),
            1e-14
        ));
    }

    #[test]
    fn roos_small() {
        assert!(close(
            roos_bound(&DensityTable::new(2, 1).unwrap()),
            0.5,
            1e-15
        ));
        let b: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&y| roos_bound(&DensityTable::new(y, 1).unwrap()))
            .collect();
        assert!(b[0] > b[1] && b[1] > b[2]);
    }
}
