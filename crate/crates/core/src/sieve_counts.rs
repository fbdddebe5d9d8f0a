//! Exact counts of squarefree shifted pairs under congruence conditions,
//! and the Euler-product main terms they are compared with.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::arith::{prime_factors, primes_up_to, Engine};
use crate::error::{domain, param, Error, Result};

/// Largest `x` accepted by the brute-force counters.
pub const BRUTE_FORCE_CEILING: u64 = 100_000_000;

/// Default truncation point of the Euler products.
pub const DEFAULT_TRUNC: u64 = 1_000_000;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_squarefree(n: u64) -> bool {
    prime_factors(n).iter().all(|&(_, k)| k == 1)
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

/// Congruence side condition on the pairs `(n, n + a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CongruenceSpec {
    /// `n = c (mod q)`.
    Progression { q: u64, c: u64 },
    /// `q | n` and `r | n + a`; with `coprime` additionally `gcd(n, a) = 1`.
    Double { q: u64, r: u64, coprime: bool },
}

impl CongruenceSpec {
    pub fn progression(q: u64, c: u64) -> Result<Self> {
        if q < 1 || c >= q {
            return param(format!("need q >= 1 and 0 <= c < q, got q = {q}, c = {c}"));
        }
        Ok(Self::Progression { q, c })
    }

    pub fn double(q: u64, r: u64, coprime: bool) -> Result<Self> {
        if q < 1 || r < 1 {
            return param("moduli must be positive");
        }
        Ok(Self::Double { q, r, coprime })
    }

    fn matches(&self, n: u64, a: u64, rad_a: &[u64]) -> bool {
        match *self {
            Self::Progression { q, c } => n % q == c,
            Self::Double { q, r, coprime } => {
                n.is_multiple_of(q)
                    && (n + a).is_multiple_of(r)
                    && (!coprime || rad_a.iter().all(|p| !n.is_multiple_of(*p)))
            }
        }
    }

    fn moduli_product(&self) -> u64 {
        match *self {
            Self::Progression { q, .. } => q,
            Self::Double { q, r, .. } => q.saturating_mul(r),
        }
    }
}

/// A shift together with its congruence condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairQuery {
    pub a: u64,
    pub spec: CongruenceSpec,
}

fn check_ceiling(x: u64, ceiling: u64) -> Result<()> {
    if x > ceiling {
        return Err(Error::Resource(format!(
            "x = {x} exceeds the brute-force ceiling {ceiling}"
        )));
    }
    Ok(())
}

/// Exact counts for every query in one sieve pass per distinct shift.
pub fn count_batch(
    engine: &Engine,
    x: u64,
    queries: &[PairQuery],
    ceiling: u64,
) -> Result<Vec<u64>> {
    check_ceiling(x, ceiling)?;
    let mut by_a: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, q) in queries.iter().enumerate() {
        if q.a < 1 {
            return param("shift a must be positive");
        }
        by_a.entry(q.a).or_default().push(i);
    }
    let mut out = vec![0u64; queries.len()];
    for (a, idx) in by_a {
        let rad: Vec<u64> = prime_factors(a).into_iter().map(|(p, _)| p).collect();
        let specs: Vec<CongruenceSpec> = idx.iter().map(|&i| queries[i].spec).collect();
        let parts = engine.map_pairs(x, a, u64::MAX, |w| {
            let mut c = vec![0u64; specs.len()];
            for (n, r0, r1) in w.pairs() {
                if r0.squarefree && r1.squarefree {
                    for (k, s) in specs.iter().enumerate() {
                        if s.matches(n, a, &rad) {
                            c[k] += 1;
                        }
                    }
                }
            }
            c
        })?;
        for part in parts {
            for (k, v) in part.into_iter().enumerate() {
                out[idx[k]] += v;
            }
        }
    }
    Ok(out)
}

/// `#{n <= x : n = c (mod q), mu^2(n) mu^2(n + a) = 1}`.
pub fn count_pairs_progression(engine: &Engine, x: u64, a: u64, q: u64, c: u64) -> Result<u64> {
    let spec = CongruenceSpec::progression(q, c)?;
    Ok(count_batch(engine, x, &[PairQuery { a, spec }], BRUTE_FORCE_CEILING)?[0])
}

/// `#{n <= x : q | n, r | n + a, mu^2(n) mu^2(n + a) = 1}`, restricted to
/// `gcd(n, a) = 1` when `coprime` is set.
pub fn count_pairs_double(
    engine: &Engine,
    x: u64,
    a: u64,
    q: u64,
    r: u64,
    coprime: bool,
) -> Result<u64> {
    let spec = CongruenceSpec::double(q, r, coprime)?;
    Ok(count_batch(engine, x, &[PairQuery { a, spec }], BRUTE_FORCE_CEILING)?[0])
}

/// A truncated Euler product with a bound on the omitted factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerProduct {
    pub truncation_prime: u64,
    pub value: f64,
    /// The full product lies in `[value - tail_bound, value]`.
    pub tail_bound: f64,
}

impl EulerProduct {
    /// Relative size of the omitted factor, from `sum_{p > T} p^-2 < 1/(T - 1)`.
    pub fn relative_tail(&self) -> f64 {
        (2.0 / (self.truncation_prime as f64 - 1.0)).min(1.0)
    }
}

/// `prod_{p <= trunc} (1 - 2/p^2)`.
pub fn euler_e(trunc: u64) -> Result<EulerProduct> {
    if trunc < 2 {
        return param("truncation must be at least 2");
    }
    let primes = primes_up_to(trunc)?;
    let mut v = 1.0f64;
    for p in primes.iter() {
        let p = p as f64;
        v *= 1.0 - 2.0 / (p * p);
    }
    let e = EulerProduct {
        truncation_prime: trunc,
        value: v,
        tail_bound: 0.0,
    };
    Ok(EulerProduct {
        tail_bound: v * e.relative_tail(),
        ..e
    })
}

/// Proportion of residues `n` modulo `p^e` satisfying the conditions of
/// `query` at `p`, with `e` large enough that every condition is periodic.
fn local_density(p: u64, query: &PairQuery) -> f64 {
    let a = query.a;
    let (k_n, k_m, base, coprime) = match query.spec {
        CongruenceSpec::Progression { q, c } => {
            let k = valuation(q, p);
            (k, 0, c % p.pow(k), false)
        }
        CongruenceSpec::Double { q, r, coprime } => (valuation(q, p), valuation(r, p), 0, coprime),
    };
    let e = k_n.max(k_m).max(2);
    let pe = p.pow(e);
    let pk = p.pow(k_n);
    let pm = p.pow(k_m);
    let p2 = p * p;
    let mut good = 0u64;
    let mut t = 0;
    while base + t * pk < pe {
        let n = base + t * pk;
        let m = (n + a % pe) % pe;
        if n % p2 != 0
            && !m.is_multiple_of(p2)
            && m.is_multiple_of(pm)
            && (!coprime || !a.is_multiple_of(p) || n % p != 0)
        {
            good += 1;
        }
        t += 1;
    }
    good as f64 / pe as f64
}

/// Primes at which the local density differs from `1 - 2/p^2`.
fn special_primes(query: &PairQuery) -> Vec<u64> {
    let mut ps: Vec<u64> = prime_factors(query.a).into_iter().map(|(p, _)| p).collect();
    ps.extend(
        prime_factors(query.spec.moduli_product())
            .into_iter()
            .map(|(p, _)| p),
    );
    ps.sort_unstable();
    ps.dedup();
    ps
}

/// A main term together with its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainTerm {
    pub value: f64,
    /// Bound on the error from truncating the Euler product.
    pub tail_bound: f64,
}

/// `x prod_p delta_p`, where `delta_p` is the proportion of residues modulo a
/// power of `p` compatible with the query. The product over the generic
/// primes is the Euler product `E` truncated at `trunc`.
pub fn exact_main_term(x: u64, query: &PairQuery, euler: &EulerProduct) -> MainTerm {
    let mut v = x as f64 * euler.value;
    for p in special_primes(query) {
        let d = local_density(p, query);
        if p <= euler.truncation_prime {
            let pf = p as f64;
            v *= d / (1.0 - 2.0 / (pf * pf));
        } else {
            v *= d;
        }
    }
    MainTerm {
        value: v,
        tail_bound: v * euler.relative_tail(),
    }
}

/// The main term for `n = c (mod q)` as displayed in the literature:
/// `E_q(x)/q prod_{p || (q, c(c+a))} (1 - 1/p) prod_{p^2 || (q, c+a)} (1 - 1/p^2) prod_{p^2 || a} (1 + 1/p^2)`
/// with `E_q(x) = x E prod_{p | q} (1 - 2/p^2)^-1`.
pub fn hb_main_term_displayed(x: u64, a: u64, q: u64, c: u64, euler: &EulerProduct) -> f64 {
    let mut v = x as f64 * euler.value / q as f64;
    for (p, _) in prime_factors(q) {
        let pf = p as f64;
        v /= 1.0 - 2.0 / (pf * pf);
    }
    let g1 = gcd(q, (c as u128 * (c + a) as u128 % q as u128) as u64);
    for (p, k) in prime_factors(g1) {
        if k == 1 {
            v *= 1.0 - 1.0 / p as f64;
        }
    }
    for (p, k) in prime_factors(gcd(q, c + a)) {
        if k == 2 {
            v *= 1.0 - 1.0 / (p * p) as f64;
        }
    }
    v * square_exact_factor(a)
}

/// `prod_{p^2 || a} (1 + 1/p^2)`.
fn square_exact_factor(a: u64) -> f64 {
    prime_factors(a)
        .into_iter()
        .filter(|&(_, k)| k == 2)
        .map(|(p, _)| 1.0 + 1.0 / (p * p) as f64)
        .product()
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Displayed main term for `q | n`, `r | n + a`:
/// `x phi([q,r])/[q,r]^2 prod_{p^2 || a} (1 + 1/p^2) prod_{p not dividing [q,r]} (1 - 2/p^2)`.
pub fn plain_main_term_displayed(x: u64, a: u64, q: u64, r: u64, euler: &EulerProduct) -> f64 {
    let l = lcm(q, r);
    let mut v = x as f64 * euler_phi(l) as f64 / (l as f64 * l as f64)
        * square_exact_factor(a)
        * euler.value;
    for (p, _) in prime_factors(l) {
        let pf = p as f64;
        v /= 1.0 - 2.0 / (pf * pf);
    }
    v
}

/// Displayed `E(x; a) = x E prod_{p^2 || a} (1 + 1/p^2)(1 - (1/p)(1 - 1/p)(1 - 2/p^2)^-1)`.
pub fn e_x_a_displayed(x: u64, a: u64, euler: &EulerProduct) -> f64 {
    let mut v = x as f64 * euler.value;
    for (p, k) in prime_factors(a) {
        if k == 2 {
            let pf = p as f64;
            v *= (1.0 + 1.0 / (pf * pf))
                * (1.0 - (1.0 / pf) * (1.0 - 1.0 / pf) / (1.0 - 2.0 / (pf * pf)));
        }
    }
    v
}

/// Displayed main term for `q | n`, `r | n + a`, `gcd(n, a) = 1`:
/// `E(x; a) prod_{p | qr} (1/p)(1 - 1/p)(1 - 2/p^2)^-1`.
pub fn nonplain_main_term_displayed(x: u64, a: u64, q: u64, r: u64, euler: &EulerProduct) -> f64 {
    let mut v = e_x_a_displayed(x, a, euler);
    for (p, _) in prime_factors(q * r) {
        let pf = p as f64;
        v *= (1.0 / pf) * (1.0 - 1.0 / pf) / (1.0 - 2.0 / (pf * pf));
    }
    v
}

/// Exact `E(x; a)`: the main term for coprime squarefree pairs, which is
/// `x E prod_{p | a} (1 - 1/p)(1 - 2/p^2)^-1`.
pub fn e_x_a(x: u64, a: u64, euler: &EulerProduct) -> MainTerm {
    exact_main_term(
        x,
        &PairQuery {
            a,
            spec: CongruenceSpec::Double {
                q: 1,
                r: 1,
                coprime: true,
            },
        },
        euler,
    )
}

fn check_preconditions(query: &PairQuery) -> Result<()> {
    match query.spec {
        CongruenceSpec::Progression { q, c } => {
            if !is_squarefree(gcd(q, c)) {
                return domain(format!("gcd(q, c) = gcd({q}, {c}) is not squarefree"));
            }
        }
        CongruenceSpec::Double { q, r, coprime } => {
            if !is_squarefree(q) || !is_squarefree(r) {
                return domain(format!("moduli q = {q}, r = {r} must be squarefree"));
            }
            if !query.a.is_multiple_of(gcd(q, r)) {
                return domain(format!(
                    "gcd(q, r) = {} must divide a = {}",
                    gcd(q, r),
                    query.a
                ));
            }
            if coprime && gcd(q, r) != 1 {
                return domain("the coprime form needs gcd(q, r) = 1");
            }
        }
    }
    Ok(())
}

/// Main term for `n = c (mod q)` as `(exact, displayed)`.
pub fn hb_main_term(x: u64, a: u64, q: u64, c: u64, trunc: u64) -> Result<(MainTerm, f64)> {
    let query = PairQuery {
        a,
        spec: CongruenceSpec::progression(q, c)?,
    };
    check_preconditions(&query)?;
    let e = euler_e(trunc)?;
    Ok((
        exact_main_term(x, &query, &e),
        hb_main_term_displayed(x, a, q, c, &e),
    ))
}

/// Main term for the double congruence as `(exact, displayed)`; the
/// displayed form is the plain or the coprime formula according to `coprime`.
pub fn double_main_term(
    x: u64,
    a: u64,
    q: u64,
    r: u64,
    coprime: bool,
    trunc: u64,
) -> Result<(MainTerm, f64)> {
    let query = PairQuery {
        a,
        spec: CongruenceSpec::double(q, r, coprime)?,
    };
    check_preconditions(&query)?;
    let e = euler_e(trunc)?;
    let shown = if coprime {
        nonplain_main_term_displayed(x, a, q, r, &e)
    } else {
        plain_main_term_displayed(x, a, q, r, &e)
    };
    Ok((exact_main_term(x, &query, &e), shown))
}

/// One row of a count-versus-main-term comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub x: u64,
    pub a: u64,
    pub kind: &'static str,
    pub q: u64,
    pub c_or_r: u64,
    pub count: u64,
    pub main_term: f64,
    pub ratio: f64,
    pub tail_bound: f64,
    pub displayed_main_term: f64,
    pub displayed_ratio: f64,
    /// Set when the displayed formula disagrees with the exact local
    /// densities by more than `1e-6` relative.
    pub literature_check: bool,
}

impl PairQuery {
    fn kind(&self) -> &'static str {
        match self.spec {
            CongruenceSpec::Progression { .. } => "progression",
            CongruenceSpec::Double { coprime: false, .. } => "double",
            CongruenceSpec::Double { coprime: true, .. } => "double_coprime",
        }
    }

    fn moduli(&self) -> (u64, u64) {
        match self.spec {
            CongruenceSpec::Progression { q, c } => (q, c),
            CongruenceSpec::Double { q, r, .. } => (q, r),
        }
    }

    /// `[q, r]` for double congruences, `q` for progressions.
    pub fn modulus(&self) -> u64 {
        match self.spec {
            CongruenceSpec::Progression { q, .. } => q,
            CongruenceSpec::Double { q, r, .. } => lcm(q, r),
        }
    }
}

/// Counts and main terms for a batch of queries.
pub fn compare_batch(
    engine: &Engine,
    x: u64,
    queries: &[PairQuery],
    trunc: u64,
    ceiling: u64,
) -> Result<Vec<CountRow>> {
    for q in queries {
        check_preconditions(q)?;
    }
    let e = euler_e(trunc)?;
    let counts = count_batch(engine, x, queries, ceiling)?;
    Ok(queries
        .iter()
        .zip(counts)
        .map(|(qy, count)| {
            let m = exact_main_term(x, qy, &e);
            let (q, cr) = qy.moduli();
            let shown = match qy.spec {
                CongruenceSpec::Progression { q, c } => hb_main_term_displayed(x, qy.a, q, c, &e),
                CongruenceSpec::Double {
                    q,
                    r,
                    coprime: false,
                } => plain_main_term_displayed(x, qy.a, q, r, &e),
                CongruenceSpec::Double {
                    q,
                    r,
                    coprime: true,
                } => nonplain_main_term_displayed(x, qy.a, q, r, &e),
            };
            let ratio = if m.value > 0.0 {
                count as f64 / m.value
            } else {
                f64::NAN
            };
            let displayed_ratio = if shown > 0.0 {
                count as f64 / shown
            } else {
                f64::NAN
            };
            let literature_check = (shown - m.value).abs() > 1e-6 * m.value.abs().max(shown.abs());
            CountRow {
                x,
                a: qy.a,
                kind: qy.kind(),
                q,
                c_or_r: cr,
                count,
                main_term: m.value,
                ratio,
                tail_bound: m.tail_bound,
                displayed_main_term: shown,
                displayed_ratio,
                literature_check,
            }
        })
        .collect())
}

/// CSV with one row per query.
pub fn write_rows_csv<W: Write>(rows: &[CountRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Parse a batch: one query per line as whitespace-separated integers
/// `0 a q c` (progression), `1 a q r` (double) or `2 a q r` (double with
/// `gcd(n, a) = 1`). Blank lines and text after `#` are ignored.
pub fn parse_batch(text: &str) -> Result<Vec<PairQuery>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("batch line {}: {e}", i + 1)))?;
        let [kind, a, q, cr] = nums[..] else {
            return Err(Error::Format(format!(
                "batch line {}: expected 4 integers",
                i + 1
            )));
        };
        let spec = match kind {
            0 => CongruenceSpec::progression(q, cr)?,
            1 => CongruenceSpec::double(q, cr, false)?,
            2 => CongruenceSpec::double(q, cr, true)?,
            k => {
                return Err(Error::Format(format!(
                    "batch line {}: unknown kind {k}",
                    i + 1
                )))
            }
        };
        out.push(PairQuery { a, spec });
    }
    Ok(out)
}

/// The standard comparison batch; every modulus is at most 30.
pub fn documented_batch() -> Vec<PairQuery> {
    let p = |a, q, c| PairQuery {
        a,
        spec: CongruenceSpec::Progression { q, c },
    };
    let d = |a, q, r, coprime| PairQuery {
        a,
        spec: CongruenceSpec::Double { q, r, coprime },
    };
    vec![
        p(1, 1, 0),
        p(1, 3, 1),
        p(4, 2, 1),
        p(1, 4, 1),
        p(2, 5, 3),
        p(1, 6, 5),
        p(3, 7, 2),
        p(9, 10, 1),
        p(1, 30, 7),
        d(1, 1, 1, false),
        d(1, 2, 3, false),
        d(4, 2, 2, false),
        d(3, 3, 2, false),
        d(4, 3, 5, false),
        d(1, 2, 3, true),
        d(1, 5, 6, true),
        d(2, 3, 5, true),
        d(4, 1, 1, true),
    ]
}

/// `#{n <= x : mu^2(n(n+1)) = 1, omega(n) = k}` for every `k` at once.
pub fn spiro_counts(engine: &Engine, x: u64) -> Result<BTreeMap<u32, u64>> {
    check_ceiling(x, BRUTE_FORCE_CEILING)?;
    let parts = engine.map_pairs(x, 1, u64::MAX, |w| {
        let mut h: BTreeMap<u32, u64> = BTreeMap::new();
        for (_, r0, r1) in w.pairs() {
            if r0.squarefree && r1.squarefree {
                *h.entry(r0.omega as u32).or_insert(0) += 1;
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

pub fn spiro_count(engine: &Engine, x: u64, k: u32) -> Result<u64> {
    Ok(spiro_counts(engine, x)?.get(&k).copied().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::default()
    }

    #[test]
    fn small_counts() {
        // squarefree pairs (n, n+1) for n <= 10: n in {1, 2, 5, 6, 10}
        assert_eq!(count_pairs_progression(&engine(), 10, 1, 1, 0).unwrap(), 5);
        assert_eq!(count_pairs_progression(&engine(), 10, 1, 2, 1).unwrap(), 2);
        assert_eq!(count_pairs_progression(&engine(), 100, 1, 4, 0).unwrap(), 0);
        assert_eq!(
            count_pairs_double(&engine(), 1000, 1, 2, 2, false).unwrap(),
            0
        );
    }

    #[test]
    fn ceiling() {
        let q = [PairQuery {
            a: 1,
            spec: CongruenceSpec::Progression { q: 1, c: 0 },
        }];
        assert!(matches!(
            count_batch(&engine(), 11, &q, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn euler_small() {
        assert_eq!(euler_e(2).unwrap().value, 0.5);
        assert!((euler_e(3).unwrap().value - 7.0 / 18.0).abs() < 1e-16);
        assert!(euler_e(1).is_err());
        let e = euler_e(1000).unwrap();
        let f = euler_e(10_000).unwrap();
        assert!(f.tail_bound < e.tail_bound);
        assert!(f.value <= e.value && f.value >= e.value - e.tail_bound);
    }

    #[test]
    fn local_densities() {
        let prog = |a, q, c| PairQuery {
            a,
            spec: CongruenceSpec::Progression { q, c },
        };
        assert!((local_density(2, &prog(1, 1, 0)) - 0.5).abs() < 1e-16);
        // with 4 | a the conditions at 2 coincide
        assert!((local_density(2, &prog(4, 1, 0)) - 0.75).abs() < 1e-16);
        // n odd forces n + 4 odd
        assert!((local_density(2, &prog(4, 2, 1)) - 0.5).abs() < 1e-16);
        let cop = PairQuery {
            a: 3,
            spec: CongruenceSpec::Double {
                q: 1,
                r: 1,
                coprime: true,
            },
        };
        assert!((local_density(3, &cop) - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn main_term_identities() {
        let e = euler_e(1000).unwrap();
        let (m, shown) = hb_main_term(1000, 1, 1, 0, 1000).unwrap();
        assert!((m.value - 1000.0 * e.value).abs() < 1e-9);
        assert!((shown - m.value).abs() < 1e-9);
        // q = 1 and a = 9: x E prod (1 - 1/p^2)/(1 - 2/p^2) at p = 3
        let (m, _) = hb_main_term(1000, 9, 1, 0, 1000).unwrap();
        assert!((m.value - 1000.0 * e.value * (8.0 / 9.0) / (7.0 / 9.0)).abs() < 1e-9);
        assert!(hb_main_term(1000, 1, 8, 4, 1000).is_err());
        assert!(double_main_term(1000, 1, 4, 1, false, 1000).is_err());
        assert!(double_main_term(1000, 1, 2, 2, false, 1000).is_err());
    }

    #[test]
    fn batch_parsing() {
        let b = parse_batch("# header\n0 1 3 1\n1 1 2 3  # plain\n\n2 2 3 5\n").unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(
            b[2],
            PairQuery {
                a: 2,
                spec: CongruenceSpec::Double {
                    q: 3,
                    r: 5,
                    coprime: true
                }
            }
        );
        assert!(parse_batch("0 1 3").is_err());
        assert!(parse_batch("7 1 3 1").is_err());
        assert!(parse_batch("0 1 3 5").is_err());
    }

    #[test]
    fn documented_batch_is_admissible() {
        for q in documented_batch() {
            check_preconditions(&q).unwrap();
            assert!(q.modulus() <= 30);
            assert!(exact_main_term(1000, &q, &euler_e(100).unwrap()).value > 0.0);
        }
    }

    #[test]
    fn spiro_small() {
        assert_eq!(spiro_count(&engine(), 10, 1).unwrap(), 2);
        assert_eq!(spiro_count(&engine(), 10, 0).unwrap(), 1);
    }
}
