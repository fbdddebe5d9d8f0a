//! Engine output against direct computations that share no code with it.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use arithstat_core::arith::{mu_y_value, Engine, EngineConfig, Window};
use arithstat_core::erdos_mirsky::{self, g_eval, EMParams, QuadratureGrid};
use arithstat_core::joint::{self, Normalization, PairFilter, PairStat};
use arithstat_core::kubilius::{self, DensityTable};
use arithstat_core::sieve_counts::{self, CongruenceSpec, PairQuery};
use arithstat_core::{primes_up_to, sieve_window};
use num_complex::Complex64;

/// `(p, k)` for every `p^k || n`, by trial division.
fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn omega(n: u64) -> u32 {
    factor(n).len() as u32
}

fn squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, k)| k == 1)
}

fn mobius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn divisor_count(n: u64) -> u32 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u32
}

fn small_engine() -> Engine {
    Engine::new(EngineConfig {
        segment_size: 9973,
        ..EngineConfig::default()
    })
    .unwrap()
}

#[test]
fn sieve_matches_trial_division_up_to_1e5() {
    let n_max = 100_000u64;
    for y in [2u64, 7, 100, 1 << 40] {
        let recs = small_engine()
            .map_windows(1, n_max + 1, y, |t| {
                t.iter().map(|(n, r)| (n, *r)).collect::<Vec<_>>()
            })
            .unwrap();
        let mut seen = 0;
        for (n, r) in recs.into_iter().flatten() {
            let f = factor(n);
            assert_eq!(r.omega as usize, f.len(), "omega({n})");
            assert_eq!(r.squarefree, f.iter().all(|&(_, k)| k == 1), "mu^2({n})");
            assert_eq!(
                r.omega_y as usize,
                f.iter().filter(|&&(p, _)| p <= y).count(),
                "omega_{y}({n})"
            );
            let ty: u32 = f
                .iter()
                .filter(|&&(p, _)| p <= y)
                .map(|&(_, k)| k + 1)
                .product();
            assert_eq!(r.tau_y, ty, "tau_{y}({n})");
            seen += 1;
        }
        assert_eq!(seen, n_max);
    }
}

#[test]
fn sieve_matches_trial_division_on_random_high_windows() {
    let primes = primes_up_to(3_200_000).unwrap();
    for start in [1_000_000_007u64, 987_654_321_000, 4_000_000_000_000] {
        let t = sieve_window(Window::new(start, start + 500).unwrap(), 1000, &primes).unwrap();
        for (n, r) in t.iter() {
            assert_eq!(r.omega as u32, omega(n));
            assert_eq!(r.squarefree, squarefree(n));
        }
    }
}

#[test]
fn tau_y_with_large_y_is_divisor_count() {
    let t = sieve_window(
        Window::new(1, 10_001).unwrap(),
        10_000,
        &primes_up_to(101).unwrap(),
    )
    .unwrap();
    for (n, r) in t.iter() {
        assert_eq!(r.tau_y, divisor_count(n), "tau({n})");
    }
}

#[test]
fn omega_y_monotone_and_mu_y_limit() {
    let primes = primes_up_to(200).unwrap();
    let w = Window::new(1, 30_000).unwrap();
    let ys = [2u64, 3, 5, 10, 50, 1000, 30_000];
    let tables: Vec<_> = ys
        .iter()
        .map(|&y| sieve_window(w, y, &primes).unwrap())
        .collect();
    for n in 1..30_000u64 {
        for k in 1..tables.len() {
            assert!(tables[k - 1].get(n).omega_y <= tables[k].get(n).omega_y);
        }
        let full = tables.last().unwrap().get(n);
        assert_eq!(full.omega_y, full.omega);
        assert_eq!(mu_y_value(full) as i64, mobius(n));
    }
}

#[test]
fn split_windows_agree() {
    let primes = primes_up_to(1000).unwrap();
    let whole = sieve_window(Window::new(1, 200_000).unwrap(), 30, &primes).unwrap();
    let a = sieve_window(Window::new(1, 77_777).unwrap(), 30, &primes).unwrap();
    let b = sieve_window(Window::new(77_777, 200_000).unwrap(), 30, &primes).unwrap();
    let joined: Vec<_> = a.records().iter().chain(b.records()).copied().collect();
    assert_eq!(whole.records(), &joined[..]);
}

#[test]
fn squarefree_pair_totals() {
    let e = Engine::default();
    for (x, want) in [(10u64, 5u64), (100, 33), (1000, 323)] {
        let s = joint::collect_pairs(&e, x, 1, None, PairFilter::SquarefreePair, PairStat::Omega)
            .unwrap();
        assert_eq!(s.total, want, "x = {x}");
        let direct = (1..=x)
            .filter(|&n| squarefree(n) && squarefree(n + 1))
            .count() as u64;
        assert_eq!(direct, want);
    }
}

#[test]
fn pair_total_equals_progression_count() {
    let e = small_engine();
    let mut xs: Vec<u64> = (2..=300).collect();
    xs.extend((1..=40).map(|k| k * 2500 - 1));
    xs.push(100_000);
    for x in xs {
        let s = joint::collect_pairs(&e, x, 1, None, PairFilter::SquarefreePair, PairStat::Omega)
            .unwrap();
        assert_eq!(
            s.total,
            sieve_counts::count_pairs_progression(&e, x, 1, 1, 0).unwrap(),
            "x = {x}"
        );
    }
}

#[test]
fn hand_enumerations() {
    let e = Engine::default();
    let want: BTreeMap<(u32, u32), f64> = [((1, 0), 0.6), ((0, 1), 0.4)].into_iter().collect();
    let l = kubilius::empirical_law(&e, 10, 2, 1).unwrap();
    assert_eq!(l.probabilities.len(), 2);
    for (k, m) in want {
        assert!((l.probabilities[&k] - m).abs() < 1e-15);
    }
    assert_eq!(l.tail_mass, 0.0);
    assert_eq!(
        joint::correlation_mu_y(&e, 10, 10, 1).unwrap().numerator,
        -1
    );
    assert_eq!(
        joint::correlation_mu_y(&e, 100, 2, 1).unwrap().numerator,
        -33
    );
}

#[test]
fn chowla_sums_match_direct_summation() {
    let e = small_engine();
    for (x, y, a) in [
        (1000u64, 5u64, 1u64),
        (5000, 31, 2),
        (20_000, 20_000, 1),
        (3000, 2, 7),
    ] {
        let direct: i64 = (1..=x)
            .map(|n| {
                let m = |k: u64| {
                    if !squarefree(k) {
                        0
                    } else if factor(k).iter().filter(|&&(p, _)| p <= y).count() % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                };
                m(n) * m(n + a)
            })
            .sum();
        assert_eq!(
            joint::correlation_mu_y(&e, x, y, a).unwrap().numerator,
            direct
        );
    }
}

#[test]
fn char_fn_matches_per_n_summation() {
    let x = 10_000u64;
    let e = Engine::default();
    let s =
        joint::collect_pairs(&e, x, 1, None, PairFilter::SquarefreePair, PairStat::Omega).unwrap();
    let norm = Normalization::log_log(x).unwrap();
    let (c, sc) = (norm.center, norm.scale);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut cnt = 0u64;
    for n in 1..=x {
        if squarefree(n) && squarefree(n + 1) {
            let z1 = (omega(n) as f64 - c) / sc;
            let z2 = (omega(n + 1) as f64 - c) / sc;
            acc += Complex64::from_polar(1.0, z1 + z2);
            cnt += 1;
        }
    }
    let direct = acc / cnt as f64;
    let got = joint::char_fn(&s, norm, 1.0, 1.0).unwrap();
    assert!((got - direct).norm() < 1e-12);
    let neg = joint::char_fn(&s, norm, -1.0, -1.0).unwrap();
    assert!((got - neg.conj()).norm() < 1e-12);
}

#[test]
fn mu_u_correlation_matches_direct_summation() {
    let x = 1000u64;
    let e = Engine::default();
    for (u, v) in [(0.1, 0.1), (0.5, -1.2), (PI, PI), (0.0, 0.0)] {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=x {
            if squarefree(n) && squarefree(n + 1) {
                acc += Complex64::from_polar(1.0, u * omega(n) as f64 + v * omega(n + 1) as f64);
            }
        }
        let got = joint::correlation_mu_u(&e, x, u, v, 1).unwrap();
        assert!((got - acc / x as f64).norm() < 1e-12, "u = {u}, v = {v}");
        assert!(got.norm() <= 1.0);
    }
    let zero = joint::correlation_mu_u(&e, x, 0.0, 0.0, 1).unwrap();
    assert!((zero.re - 323.0 / 1000.0).abs() < 1e-15);
    let pi = joint::correlation_mu_u(&e, x, PI, PI, 1).unwrap();
    let mm: i64 = (1..=x).map(|n| mobius(n) * mobius(n + 1)).sum();
    assert!((pi.re - mm as f64 / x as f64).abs() < 1e-12);
}

#[test]
fn sup_distance_matches_naive_cdf() {
    let x = 1000u64;
    let e = Engine::default();
    let s =
        joint::collect_pairs(&e, x, 1, None, PairFilter::SquarefreePair, PairStat::Omega).unwrap();
    let norm = Normalization::log_log(x).unwrap();
    // per-n list, CDF by a full scan at each probe point and just below it
    let pts: Vec<(f64, f64)> = (1..=x)
        .filter(|&n| squarefree(n) && squarefree(n + 1))
        .map(|n| (norm.apply(omega(n)), norm.apply(omega(n + 1))))
        .collect();
    let phi = joint::gaussian::phi;
    let mut probes1: Vec<f64> = pts.iter().flat_map(|p| [p.0, p.0 - 1e-9]).collect();
    let mut probes2: Vec<f64> = pts.iter().flat_map(|p| [p.1, p.1 - 1e-9]).collect();
    probes1.push(50.0);
    probes2.push(50.0);
    probes1.sort_by(f64::total_cmp);
    probes1.dedup();
    probes2.sort_by(f64::total_cmp);
    probes2.dedup();
    let mut best = 0.0f64;
    for &a in &probes1 {
        for &b in &probes2 {
            let f = pts.iter().filter(|p| p.0 <= a && p.1 <= b).count() as f64 / pts.len() as f64;
            best = best.max((f - phi(a) * phi(b)).abs());
        }
    }
    let got = joint::sup_distance_vs_gaussian(&s, norm).unwrap();
    assert!((got - best).abs() < 1e-8, "{got} vs {best}");
}

/// Symmetric partial sums of `sum_k 1/(alpha + i(2 pi k + u/L)/log 2)`,
/// term by term.
fn g_direct(u: f64, alpha: f64, l: f64, m: u64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for k in (1..=m).rev() {
        let kf = k as f64;
        s += 1.0 / Complex64::new(alpha, (2.0 * PI * kf + u / l) / LN_2);
        s += 1.0 / Complex64::new(alpha, (-2.0 * PI * kf + u / l) / LN_2);
    }
    s + 1.0 / Complex64::new(alpha, u / l / LN_2)
}

#[test]
fn g_matches_long_direct_sum() {
    for (u, alpha, l) in [(0.0, 1.0, 0.9), (1.7, 10.0, 0.9), (4.0, 3.0, 1.4)] {
        // the direct sum has a tail of order 1/M, removed by Richardson
        let s1 = g_direct(u, alpha, l, 500_000);
        let s2 = g_direct(u, alpha, l, 1_000_000);
        let oracle = 2.0 * s2 - s1;
        let got = g_eval(u, alpha, l, 1000).unwrap();
        assert!(
            (got.value - oracle).norm() < 1e-8,
            "u = {u}: {} vs {}",
            got.value,
            oracle
        );
    }
    let at0 = g_direct(0.0, 1.0, 1.0, 1_000_000);
    let got = g_eval(0.0, 1.0, 1.0, 1000).unwrap().value.re;
    assert!((got - 1.5 * LN_2).abs() < 1e-10, "{got}");
    assert!((at0.re - got).abs() < 1e-7);
}

#[test]
fn erdos_mirsky_classical_count() {
    let e = small_engine();
    for x in [100u64, 1000, 10_000] {
        let direct = (1..=x)
            .filter(|&n| divisor_count(n) == divisor_count(n + 1))
            .count() as u64;
        assert_eq!(
            erdos_mirsky::count_tau_ratio(&e, x, x, 0, false).unwrap(),
            direct
        );
    }
}

#[test]
fn squarefree_tau_ratio_partition() {
    let e = small_engine();
    for (x, y) in [(1000u64, 10u64), (100_000, 50), (100_000, 100_000)] {
        let h = erdos_mirsky::tau_ratio_histogram(&e, x, y, true).unwrap();
        let total: u64 = h.values().sum();
        let pairs = sieve_counts::count_pairs_progression(&e, x, 1, 1, 0).unwrap();
        assert_eq!(total, pairs);
        for (&j, &c) in &h {
            assert_eq!(erdos_mirsky::count_tau_ratio(&e, x, y, j, true).unwrap(), c);
        }
    }
}

#[test]
fn mellin_identity_small() {
    let e = Engine::default();
    for j in [-1, 0, 1, 2] {
        let p = EMParams::new(1000, 10, j, 10.0, 0.1).unwrap();
        let g = QuadratureGrid::new(0.01, p.l_y).unwrap();
        let m = erdos_mirsky::mellin_identity_check(&e, &p, &g).unwrap();
        assert_eq!(
            m.lhs,
            erdos_mirsky::count_tau_ratio(&e, 1000, 10, j, true).unwrap()
        );
        assert!(m.rel_err <= 1e-3, "j = {j}: {m:?}");
    }
}

#[test]
fn progression_partition_identity() {
    let e = small_engine();
    let x = 100_000;
    for a in [1u64, 2, 12] {
        let mut queries = Vec::new();
        for q in 1..=50u64 {
            for c in 0..q {
                queries.push(PairQuery {
                    a,
                    spec: CongruenceSpec::Progression { q, c },
                });
            }
        }
        let counts =
            sieve_counts::count_batch(&e, x, &queries, sieve_counts::BRUTE_FORCE_CEILING).unwrap();
        let total = counts[0];
        let mut i = 0;
        for q in 1..=50u64 {
            let s: u64 = counts[i..i + q as usize].iter().sum();
            assert_eq!(s, total, "a = {a}, q = {q}");
            i += q as usize;
        }
    }
}

#[test]
fn double_count_bounded_by_progression() {
    let e = small_engine();
    let x = 50_000;
    for (a, q, r) in [
        (1u64, 2u64, 3u64),
        (2, 3, 5),
        (4, 2, 2),
        (6, 6, 6),
        (1, 5, 7),
    ] {
        let d = sieve_counts::count_pairs_double(&e, x, a, q, r, false).unwrap();
        let p = sieve_counts::count_pairs_progression(&e, x, a, q, 0).unwrap();
        assert!(d <= p);
        let direct = (1..=x)
            .filter(|&n| n % q == 0 && (n + a) % r == 0 && squarefree(n) && squarefree(n + a))
            .count() as u64;
        assert_eq!(d, direct);
    }
    // gcd(q, r) = 2 does not divide a = 1
    assert_eq!(
        sieve_counts::count_pairs_double(&e, x, 1, 2, 2, false).unwrap(),
        0
    );
}

#[test]
fn spiro_partition() {
    let e = small_engine();
    let x = 100_000;
    let h = sieve_counts::spiro_counts(&e, x).unwrap();
    let pairs = sieve_counts::count_pairs_progression(&e, x, 1, 1, 0).unwrap();
    assert_eq!(h.values().sum::<u64>(), pairs);
}

#[test]
fn euler_product_truncations() {
    let e6 = sieve_counts::euler_e(1_000_000).unwrap();
    let e7 = sieve_counts::euler_e(10_000_000).unwrap();
    assert!((e6.value - 0.3226341426727525).abs() < 1e-13);
    assert!((e7.value - 0.3226341027205499).abs() < 1e-13);
    assert!(e7.value <= e6.value && e6.value - e7.value <= e6.tail_bound);
}

#[test]
fn main_term_with_trivial_modulus() {
    let e = sieve_counts::euler_e(100_000).unwrap();
    for a in [1u64, 4, 12, 18, 30] {
        let (m, _) = sieve_counts::hb_main_term(1_000_000, a, 1, 0, 100_000).unwrap();
        let mut local = 1.0;
        for (p, k) in factor(a) {
            let pf = p as f64;
            let d = if k >= 2 {
                1.0 - 1.0 / (pf * pf)
            } else {
                1.0 - 2.0 / (pf * pf)
            };
            local *= d / (1.0 - 2.0 / (pf * pf));
        }
        assert!((m.value - 1e6 * e.value * local).abs() < 1e-6);
    }
}

#[test]
fn tv_model_poisson_matches_direct_summation() {
    let t = DensityTable::new(3, 1).unwrap();
    let m = kubilius::model_law(&t, 0.0).unwrap();
    let lam = 11.0 / 14.0;
    let p = kubilius::poisson2_law(lam, 0.0).unwrap();
    let pois =
        |k: u32| (-lam).exp() * lam.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
    let model: BTreeMap<(u32, u32), f64> = [
        ((2, 0), 1.0 / 7.0),
        ((1, 1), 2.0 / 7.0),
        ((0, 2), 1.0 / 7.0),
        ((1, 0), 3.0 / 14.0),
        ((0, 1), 3.0 / 14.0),
    ]
    .into_iter()
    .collect();
    let mut l1 = 0.0;
    for k1 in 0..40u32 {
        for k2 in 0..40u32 {
            l1 += (model.get(&(k1, k2)).copied().unwrap_or(0.0) - pois(k1) * pois(k2)).abs();
        }
    }
    assert!((kubilius::tv(&m, &p) - l1 / 2.0).abs() < 1e-12);
}

#[test]
fn poisson_charfn_against_monte_carlo() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Poisson};
    let (lam, w) = (4.0f64, 2.0f64);
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let d = Poisson::new(lam).unwrap();
    let n = 1_000_000;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let z: f64 = d.sample(&mut rng);
        acc += Complex64::from_polar(1.0, w * (z - lam) / lam.sqrt());
    }
    let mc = acc / n as f64;
    let exact = kubilius::poisson_charfn(w, lam).unwrap();
    // each coordinate of a unit complex sample has variance at most 1
    let sigma = (1.0 / n as f64).sqrt();
    assert!((mc.re - exact.re).abs() < 3.0 * sigma);
    assert!((mc.im - exact.im).abs() < 3.0 * sigma);
    assert!((exact.norm() - (-4.0 * (1.0 - 1f64.cos())).exp()).abs() < 1e-12);
}

#[test]
fn lambda_tracks_log_log() {
    let diffs: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000, 10_000_000]
        .iter()
        .map(|&y| kubilius::lambda_of(y, 1).unwrap() - (y as f64).ln().ln())
        .collect();
    let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo < 0.05, "{diffs:?}");
    let mut last = 0.0;
    for y in (2..2000).step_by(37) {
        let l = kubilius::lambda_of(y, 1).unwrap();
        assert!(l >= last);
        last = l;
    }
}

#[test]
fn window_integral_grows_linearly() {
    for l in [3.0, 4.0] {
        let a =
            erdos_mirsky::gaussian_window_integral(l, 0, &QuadratureGrid::new(0.02, l).unwrap())
                .unwrap();
        let b = erdos_mirsky::gaussian_window_integral(
            2.0 * l,
            0,
            &QuadratureGrid::new(0.02, 2.0 * l).unwrap(),
        )
        .unwrap();
        let r = b.re / a.re;
        assert!((1.9..=2.1).contains(&r), "{r}");
    }
}

#[test]
fn esseen_integral_monotone_in_t() {
    let e = Engine::default();
    let s = joint::collect_pairs(
        &e,
        100_000,
        1,
        None,
        PairFilter::SquarefreePair,
        PairStat::Omega,
    )
    .unwrap();
    let norm = Normalization::log_log(100_000).unwrap();
    let t1 = joint::canonical_t(100_000).max(1.0);
    let a = joint::esseen_diagnostic(&s, norm, t1, t1.powi(-3) / 4.0).unwrap();
    let b = joint::esseen_diagnostic(&s, norm, 2.0 * t1, 0.999 * (2.0 * t1).powi(-3)).unwrap();
    assert!(a.value.is_finite() && a.value > 0.0);
    assert!(b.integral >= a.integral);
}
