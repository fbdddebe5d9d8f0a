//! Segmented sieve producing per-integer arithmetic records.
//!
//! For every `n` in a half-open window `[start, end)` the sieve records the
//! number of distinct prime factors `omega(n)`, the number of those that are
//! at most a threshold `y`, the squarefree indicator and the count of
//! `y`-smooth divisors `tau_y(n)`.
//!
//! Each window keeps a residual cofactor per integer. Every prime
//! `p <= sqrt(end - 1)` is divided out of its multiples; whatever remains
//! above 1 afterwards is a single prime larger than `sqrt(end - 1)` with
//! exponent one.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{param, Error, Result};

/// Default number of integers sieved per window.
pub const DEFAULT_SEGMENT: usize = 1 << 22;
/// Largest `limit` accepted by [`primes_up_to`].
pub const MAX_PRIME_LIMIT: u64 = 1_000_000_000;
/// Exclusive upper bound on integers the engine will sieve.
pub const MAX_N: u64 = 1 << 62;
/// Bytes of working memory per sieved integer (record plus residual).
pub const BYTES_PER_ENTRY: usize = std::mem::size_of::<ArithRecord>() + 8;
/// Default working-memory budget for a single window.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 31;

const DUMP_MAGIC: &[u8; 4] = b"ARTB";
const DUMP_VERSION: u16 = 1;

/// Ascending list of all primes up to `limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeSet {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= y` with `p` not dividing `a`; the factors of `P(y)`.
    pub fn coprime_below(&self, y: u64, a: u64) -> impl Iterator<Item = u64> + '_ {
        self.iter()
            .take_while(move |&p| p <= y)
            .filter(move |&p| !a.is_multiple_of(p))
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn primes_up_to(limit: u64) -> Result<PrimeSet> {
    if !(2..=MAX_PRIME_LIMIT).contains(&limit) {
        return param(format!(
            "prime limit {limit} outside [2, {MAX_PRIME_LIMIT}]"
        ));
    }
    let n = limit as usize;
    // composite[i] refers to the odd number 2i + 1
    let half = n / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut m = p * p;
            while m <= n {
                composite[m / 2] = true;
                m += 2 * p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(limit));
    primes.push(2);
    for (i, &c) in composite.iter().enumerate().skip(1) {
        let p = 2 * i + 1;
        if p > n {
            break;
        }
        if !c {
            primes.push(p as u32);
        }
    }
    Ok(PrimeSet { limit, primes })
}

fn estimate_pi(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// Half-open range `[start, end)` of positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if start < 1 {
            return param("window start must be at least 1");
        }
        if end <= start {
            return param(format!("empty window [{start}, {end})"));
        }
        if end > MAX_N {
            return param(format!("window end {end} exceeds engine limit 2^62"));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.start..self.end).contains(&n)
    }
}

/// Arithmetic data of a single integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArithRecord {
    pub omega: u8,
    pub omega_y: u8,
    pub squarefree: bool,
    pub tau_y: u32,
}

impl ArithRecord {
    pub const ONE: ArithRecord = ArithRecord {
        omega: 0,
        omega_y: 0,
        squarefree: true,
        tau_y: 1,
    };
}

/// `mu_y(n) = mu^2(n) (-1)^{omega_y(n)}`.
pub fn mu_y_value(record: &ArithRecord) -> i8 {
    if !record.squarefree {
        0
    } else if record.omega_y.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `mu(n; u) = mu^2(n) e^{i u omega(n)}`.
pub fn mu_u_value(record: &ArithRecord, u: f64) -> Complex64 {
    if record.squarefree {
        Complex64::from_polar(1.0, u * record.omega as f64)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Immutable sieve output for one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithTable {
    window: Window,
    y: u64,
    records: Vec<ArithRecord>,
}

impl ArithTable {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn records(&self) -> &[ArithRecord] {
        &self.records
    }

    /// Record of `n`; panics when `n` lies outside the window.
    pub fn get(&self, n: u64) -> &ArithRecord {
        &self.records[(n - self.window.start) as usize]
    }

    pub fn try_get(&self, n: u64) -> Option<&ArithRecord> {
        if self.window.contains(n) {
            Some(self.get(n))
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &ArithRecord)> + '_ {
        (self.window.start..).zip(self.records.iter())
    }

    /// Binary cache format: magic `ARTB`, `u16` version, then `start`, `end`
    /// and `y` as little-endian `u64`, followed by 8 bytes per record
    /// (`omega`, `omega_y`, `squarefree`, padding, `tau_y` as `u32`).
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        for v in [self.window.start, self.window.end, self.y] {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.records.len() * 8);
        for r in &self.records {
            buf.extend_from_slice(&[r.omega, r.omega_y, r.squarefree as u8, 0]);
            buf.extend_from_slice(&r.tau_y.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Format("not an arith table dump".into()));
        }
        let mut v16 = [0u8; 2];
        r.read_exact(&mut v16)?;
        let version = u16::from_le_bytes(v16);
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported dump version {version}")));
        }
        let mut words = [0u64; 3];
        for w in &mut words {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *w = u64::from_le_bytes(b);
        }
        let window = Window::new(words[0], words[1]).map_err(|e| Error::Format(e.to_string()))?;
        let mut raw = vec![0u8; window.len() * 8];
        r.read_exact(&mut raw)?;
        let records = raw
            .chunks_exact(8)
            .map(|c| ArithRecord {
                omega: c[0],
                omega_y: c[1],
                squarefree: c[2] != 0,
                tau_y: u32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            })
            .collect();
        Ok(Self {
            window,
            y: words[2],
            records,
        })
    }
}

/// Sieve a window against `primes`. A threshold `y >= window.end` behaves
/// as `y = infinity`.
pub fn sieve_window(window: Window, y: u64, primes: &PrimeSet) -> Result<ArithTable> {
    sieve_window_budget(window, y, primes, DEFAULT_MEMORY_BUDGET)
}

fn sieve_window_budget(
    window: Window,
    y: u64,
    primes: &PrimeSet,
    budget: usize,
) -> Result<ArithTable> {
    if y < 2 {
        return param(format!("threshold y = {y} must be at least 2"));
    }
    let top = window.end - 1;
    if (primes.limit as u128 + 1) * (primes.limit as u128 + 1) <= top as u128 {
        return param(format!(
            "primes up to {} do not cover sqrt({top})",
            primes.limit
        ));
    }
    let need = window.len().saturating_mul(BYTES_PER_ENTRY);
    if need > budget {
        return Err(Error::Resource(format!(
            "window of {} integers needs {need} bytes, budget is {budget}",
            window.len()
        )));
    }

    let start = window.start;
    let end = window.end;
    let mut records = vec![ArithRecord::ONE; window.len()];
    let mut residual: Vec<u64> = (start..end).collect();

    for p in primes.iter() {
        if p.saturating_mul(p) > top {
            break;
        }
        let small = p <= y;
        let mut m = start.div_ceil(p) * p;
        while m < end {
            let i = (m - start) as usize;
            let r = &mut residual[i];
            *r /= p;
            let mut k = 1u32;
            while (*r).is_multiple_of(p) {
                *r /= p;
                k += 1;
            }
            let rec = &mut records[i];
            rec.omega += 1;
            if k > 1 {
                rec.squarefree = false;
            }
            if small {
                rec.omega_y += 1;
                rec.tau_y *= k + 1;
            }
            m += p;
        }
    }
    for (rec, &r) in records.iter_mut().zip(&residual) {
        if r > 1 {
            rec.omega += 1;
            if r <= y {
                rec.omega_y += 1;
                rec.tau_y *= 2;
            }
        }
    }
    Ok(ArithTable { window, y, records })
}

/// Sieve configuration shared by all window-parallel computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub segment_size: usize,
    pub memory_budget: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            segment_size: DEFAULT_SEGMENT,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// The records of `n` and `n + a` for every `n` of one segment.
pub struct PairWindow {
    lo: u64,
    hi: u64,
    shift: u64,
    base: ArithTable,
    shifted: Option<ArithTable>,
}

impl PairWindow {
    /// Range `[lo, hi)` of `n` covered by this window.
    pub fn range(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn shift(&self) -> u64 {
        self.shift
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, &ArithRecord, &ArithRecord)> + '_ {
        let other = self.shifted.as_ref().unwrap_or(&self.base);
        (self.lo..self.hi).map(move |n| (n, self.base.get(n), other.get(n + self.shift)))
    }
}

/// Window-parallel driver. Windows have fixed boundaries determined only by
/// the segment size, and results come back in window order, so any fold
/// over them is independent of the thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    config: EngineConfig,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        if config.segment_size == 0 {
            return param("segment size must be positive");
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    fn primes_for(&self, end: u64) -> Result<PrimeSet> {
        let root = isqrt(end.saturating_sub(1)).max(2);
        primes_up_to(root)
    }

    fn segments(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let seg = self.config.segment_size as u64;
        let mut out = Vec::new();
        let mut s = lo;
        while s < hi {
            let e = (s + seg).min(hi);
            out.push((s, e));
            s = e;
        }
        out
    }

    /// Map `f` over the sieved windows covering `[start, end)`.
    pub fn map_windows<R, F>(&self, start: u64, end: u64, y: u64, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&ArithTable) -> R + Sync,
    {
        Window::new(start, end)?;
        let primes = self.primes_for(end)?;
        self.segments(start, end)
            .into_par_iter()
            .map(|(s, e)| {
                let t =
                    sieve_window_budget(Window::new(s, e)?, y, &primes, self.config.memory_budget)?;
                Ok(f(&t))
            })
            .collect()
    }

    /// Map `f` over windows giving access to `(n, rec(n), rec(n + a))` for
    /// every `1 <= n <= x`.
    pub fn map_pairs<R, F>(&self, x: u64, a: u64, y: u64, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&PairWindow) -> R + Sync,
    {
        if a == 0 {
            return param("shift a must be positive");
        }
        if x < 1 {
            return param("x must be at least 1");
        }
        let top = x
            .checked_add(a)
            .and_then(|t| t.checked_add(1))
            .filter(|&t| t <= MAX_N)
            .ok_or_else(|| Error::Parameter(format!("x + a = {x} + {a} exceeds engine limit")))?;
        let primes = self.primes_for(top)?;
        let seg = self.config.segment_size as u64;
        let budget = self.config.memory_budget;
        self.segments(1, x + 1)
            .into_par_iter()
            .map(|(s, e)| {
                let pw = if a <= seg {
                    let base = sieve_window_budget(Window::new(s, e + a)?, y, &primes, budget)?;
                    PairWindow {
                        lo: s,
                        hi: e,
                        shift: a,
                        base,
                        shifted: None,
                    }
                } else {
                    let base = sieve_window_budget(Window::new(s, e)?, y, &primes, budget)?;
                    let shifted =
                        sieve_window_budget(Window::new(s + a, e + a)?, y, &primes, budget)?;
                    PairWindow {
                        lo: s,
                        hi: e,
                        shift: a,
                        base,
                        shifted: Some(shifted),
                    }
                };
                Ok(f(&pw))
            })
            .collect()
    }
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Distinct prime factors of a small integer by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == [(n, 1)]
}
