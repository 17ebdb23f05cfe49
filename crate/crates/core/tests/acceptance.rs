//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS` line with its runtime and the reported quantities
//! (run with `--nocapture` to see them).
//!
//! Shared fixtures (the sieve and the zero cache) are computed once per
//! process; zero sets computed at one height are sliced for reuse at
//! lower heights.

use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use gbap_core::arith::{euler_phi, gcd, LambdaTable, ProgressionPrefix};
use gbap_core::chars::{
    orthogonality_sum, orthogonality_sum_exact, CharacterGroup,
    ExactOrthogonality,
};
use gbap_core::goldbach::{
    assemble_report, gallagher_check, goldbach_g, goldbach_g_table, omega_construction,
    summatory_s, summatory_s_brute, GoldbachConfig,
};
use gbap_core::moments::{power_sum_identities, psi_chi, second_moment_h, second_moment_k};
use gbap_core::zeros::{
    CompletedLine, ModulusZeros, ZeroCache, ZeroFinderOptions,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const SIEVE_LIMIT: u64 = 1_002_000;

fn sieve() -> &'static LambdaTable {
    static SIEVE: OnceLock<LambdaTable> = OnceLock::new();
    SIEVE.get_or_init(|| LambdaTable::build(SIEVE_LIMIT).expect("sieve build"))
}

fn cache() -> &'static Mutex<ZeroCache> {
    static CACHE: OnceLock<Mutex<ZeroCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(ZeroCache::new()))
}

fn modulus_zeros(q: u64, t: f64) -> (CharacterGroup, ModulusZeros) {
    let group = CharacterGroup::enumerate(q).expect("group");
    let mut cache = cache().lock().expect("cache lock");
    let zeros = ModulusZeros::compute(&group, t, ZeroFinderOptions::default(), &mut cache)
        .expect("zero computation");
    (group, zeros)
}

fn finish(criterion: u32, name: &str, start: Instant, budget_s: f64, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion {}: PASS ({:.2} s) — {} — {}",
        criterion, elapsed, name, detail
    );
    assert!(
        elapsed < budget_s,
        "criterion {} exceeded its {} s runtime budget: {:.2} s",
        criterion,
        budget_s,
        elapsed
    );
}

#[test]
fn criterion_01_character_orthogonality() {
    let start = Instant::now();
    let mut checked = 0u64;
    for q in 1..=30u64 {
        let group = CharacterGroup::enumerate(q).unwrap();
        let phi = group.phi();
        for &a in &group.units() {
            for &m in &group.units() {
                let exact = orthogonality_sum_exact(&group, a, m).unwrap();
                let want = if q == 1 || m % q == a % q {
                    ExactOrthogonality::Phi(phi)
                } else {
                    ExactOrthogonality::Zero
                };
                assert_eq!(exact, want, "q={} a={} m={}", q, a, m);

                let float = orthogonality_sum(&group, a, m).unwrap();
                let target = if q == 1 || m % q == a % q {
                    Complex64::new(phi as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!(
                    (float - target).norm() < 1e-10,
                    "float orthogonality q={} a={} m={}",
                    q,
                    a,
                    m
                );
                checked += 1;
            }
        }
    }
    finish(
        1,
        "character orthogonality",
        start,
        10.0,
        &format!("{} (a,m) pairs over q <= 30, exact + float", checked),
    );
}

#[test]
fn criterion_02_psi_decomposition() {
    let start = Instant::now();
    let table = sieve();
    let heights = [10.0, 1e2, 1e3, 1e4, 1e5];
    let mut worst = 0.0f64;
    for q in 1..=12u64 {
        let group = CharacterGroup::enumerate(q).unwrap();
        for &t in &heights {
            let psis: Vec<Complex64> = group
                .characters()
                .iter()
                .map(|chi| psi_chi(table, t, chi))
                .collect();
            for &a in &group.units() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (chi, psi) in group.characters().iter().zip(&psis) {
                    acc += chi.value_conj(a) * psi;
                }
                let recon = acc / group.phi() as f64;
                let direct = ProgressionPrefix::new(table, q, a % q).unwrap().psi(t);
                let err = (recon.re - direct).abs().max(recon.im.abs());
                worst = worst.max(err);
                assert!(err < 1e-8, "q={} a={} t={} err={:e}", q, a, t, err);
            }
        }
    }
    finish(
        2,
        "psi decomposition over characters",
        start,
        60.0,
        &format!("worst |error| = {:.3e}", worst),
    );
}

#[test]
fn criterion_03_zero_engine() {
    let start = Instant::now();

    // q = 1, T = 50: exactly 10 zeros.
    let (group1, zeros1) = modulus_zeros(1, 50.0);
    let set = zeros1.set_for(1).unwrap();
    assert_eq!(set.zeros().len(), 10, "zeta zeros below 50");

    // Independent coarse-scan + bisection oracle for the first ordinate.
    let chi = &group1.characters()[0];
    let line = CompletedLine::new(chi).unwrap();
    let mut oracle = None;
    let mut t = 0.05;
    let mut prev = line.z(t).unwrap();
    while t < 20.0 {
        let next = line.z(t + 0.05).unwrap();
        if prev * next < 0.0 {
            let (mut lo, mut hi) = (t, t + 0.05);
            let mut v_lo = prev;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let v = line.z(mid).unwrap();
                if v_lo * v < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    v_lo = v;
                }
            }
            oracle = Some(0.5 * (lo + hi));
            break;
        }
        prev = next;
        t += 0.05;
    }
    let oracle = oracle.expect("oracle found the first zero");
    let first = set.zeros()[0].gamma;
    assert!(
        (first - oracle).abs() < 1e-6,
        "first ordinate {} vs oracle {}",
        first,
        oracle
    );

    // Functional-equation residual at every reported zero.
    let mut worst_resid = 0.0f64;
    for z in set.zeros() {
        let r = line.z(z.gamma).unwrap().abs();
        worst_resid = worst_resid.max(r);
        assert!(r < 1e-8, "|Z({})| = {:e}", z.gamma, r);
    }

    // Smooth-count window across q <= 12, T in {25, 50, 100, 200}.
    let mut sets_checked = 0;
    for q in 1..=12u64 {
        let (group, zeros) = modulus_zeros(q, 200.0);
        for chi in group.characters() {
            let full = zeros.set_for(chi.label()).unwrap();
            for t in [25.0, 50.0, 100.0, 200.0] {
                full.slice(0.0, t).validate_count().unwrap_or_else(|e| {
                    panic!("count window failed: q={} label={} T={}: {}", q, chi.label(), t, e)
                });
                sets_checked += 1;
            }
        }
    }

    finish(
        3,
        "zero engine",
        start,
        300.0,
        &format!(
            "first ordinate {:.9} (oracle {:.9}), worst |Z| = {:.2e}, {} count-window checks",
            first, oracle, worst_resid, sets_checked
        ),
    );
}

#[test]
fn criterion_04_fast_brute_goldbach_equivalence() {
    let start = Instant::now();
    let table = sieve();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6f1d);
    let mut done = 0;
    let mut worst = 0.0f64;
    while done < 50 {
        let q1 = rng.random_range(1..=12u64);
        let q2 = rng.random_range(1..=12u64);
        let a1 = if q1 == 1 { 0 } else { rng.random_range(1..q1) };
        let a2 = if q2 == 1 { 0 } else { rng.random_range(1..q2) };
        if gcd(a1.max(1), q1) != 1 || gcd(a2.max(1), q2) != 1 {
            continue;
        }
        let x = rng.random_range(100..=3000) as f64;
        let prefix2 = ProgressionPrefix::new(table, q2, a2).unwrap();
        let fast = summatory_s(table, q1, a1, &prefix2, x).unwrap();
        let brute = summatory_s_brute(table, x, q1, q2, a1, a2);
        let diff = (fast - brute).abs();
        worst = worst.max(diff);
        assert!(
            diff < 1e-9,
            "tuple ({},{},{},{}) X={}: diff {:e}",
            q1,
            q2,
            a1,
            a2,
            x,
            diff
        );
        done += 1;
    }
    finish(
        4,
        "summatory fast path vs brute double loop",
        start,
        60.0,
        &format!("50 fuzzed tuples, worst |diff| = {:.3e}", worst),
    );
}

#[test]
fn criterion_05_residual_shape_classical() {
    let start = Instant::now();
    let table = sieve();
    let (group, zeros) = modulus_zeros(1, 1000.0);
    let mut detail = String::new();
    for x in [1e4, 3e4, 1e5, 3e5] {
        let cfg = GoldbachConfig::new(x, 1, 1, 0, 0, 1000.0).unwrap();
        let r = assemble_report(table, &cfg, &group, &group, &zeros, &zeros, "computed").unwrap();
        let bound = x * x.ln().powi(3);
        let ratio = r.residual.abs() / bound;
        println!(
            "  X = {:>8.0}: S = {:.6e}, E = {:+.6e}, |E|/(X log^3 X) = {:.6}",
            x, r.s_exact, r.residual, ratio
        );
        detail.push_str(&format!("{:.4} ", ratio));
        assert!(
            r.residual.abs() <= bound,
            "X={}: |E| = {:e} exceeds X log^3 X = {:e}",
            x,
            r.residual.abs(),
            bound
        );
        assert!(ratio <= 1.0);
        assert!(r.bookkeeping_exact());
    }
    finish(
        5,
        "classical residual shape (q1 = q2 = 1, T = 10^3)",
        start,
        600.0,
        &format!("ratios {}", detail.trim()),
    );
}

#[test]
fn criterion_06_residual_shape_progressions() {
    let start = Instant::now();
    let table = sieve();
    let x = 1e5;
    let t_height = 500.0;
    let mut worst_ratio = 0.0f64;
    let mut count = 0;
    for (q1, q2) in [(3u64, 4u64), (5, 8), (3, 3)] {
        let (group1, zeros1) = modulus_zeros(q1, t_height);
        let (group2, zeros2) = modulus_zeros(q2, t_height);
        for &a1 in &group1.units() {
            for &a2 in &group2.units() {
                let cfg = GoldbachConfig::new(x, q1, q2, a1, a2, t_height).unwrap();
                let r = assemble_report(
                    table, &cfg, &group1, &group2, &zeros1, &zeros2, "computed",
                )
                .unwrap();
                let bound = x * x.ln() * (q1 as f64 * x).ln() * (q2 as f64 * x).ln();
                let ratio = r.residual.abs() / bound;
                println!(
                    "  (q1,q2,a1,a2) = ({},{},{},{}): E = {:+.6e}, ratio = {:.6}",
                    q1, q2, a1, a2, r.residual, ratio
                );
                worst_ratio = worst_ratio.max(ratio);
                assert!(ratio <= 1.0, "({},{},{},{}) ratio {}", q1, q2, a1, a2, ratio);
                assert!(r.bookkeeping_exact());
                count += 1;
            }
        }
    }
    finish(
        6,
        "progression residual shape (X = 10^5, T = 500)",
        start,
        1200.0,
        &format!("{} residue pairs, worst ratio {:.6}", count, worst_ratio),
    );
}

#[test]
fn criterion_07_power_sum_identities() {
    let start = Instant::now();
    let x = 1e5;
    let grid = [0.6, 0.75, 0.9];
    let mut worst_single = 0.0f64;
    let mut worst_pair = 0.0f64;
    for &b in &grid {
        for &b1 in &grid {
            for &b2 in &grid {
                let r = power_sum_identities(x, b, b1, b2).unwrap();
                worst_single = worst_single.max(r.ratio_single);
                worst_pair = worst_pair.max(r.ratio_pair);
                assert!(
                    r.ratio_single <= 10.0,
                    "single-power identity beta={}: ratio {}",
                    b,
                    r.ratio_single
                );
                assert!(
                    r.ratio_pair <= 10.0,
                    "pair identity beta1={} beta2={}: ratio {}",
                    b1,
                    b2,
                    r.ratio_pair
                );
            }
        }
    }
    finish(
        7,
        "power-sum identities at X = 10^5",
        start,
        60.0,
        &format!(
            "worst |lhs-main|/X: single {:.4}, pair {:.4}",
            worst_single, worst_pair
        ),
    );
}

#[test]
fn criterion_08_second_moments() {
    let start = Instant::now();
    let table = sieve();

    // (a) piecewise-exact H vs brute quadrature, x <= 10^3, q <= 8.
    let mut worst_rel = 0.0f64;
    for q in 1..=8u64 {
        let group = CharacterGroup::enumerate(q).unwrap();
        for &a in &group.units() {
            let a = a % q;
            let prefix = ProgressionPrefix::new(table, q, a).unwrap();
            for &x in &[10.0, 100.0, 1000.0] {
                let exact = second_moment_h(table, &prefix, x, None, 0.5).unwrap();
                let oracle = h_quadrature_oracle(table, &prefix, x, 1e-5 * x);
                let rel = (exact.value - oracle).abs() / oracle.max(1e-12);
                worst_rel = worst_rel.max(rel);
                assert!(
                    rel < 1e-6,
                    "H(q={},a={},x={}): exact {} vs oracle {} (rel {:e})",
                    q,
                    a,
                    x,
                    exact.value,
                    oracle,
                    rel
                );
            }
        }
    }

    // (b) bound ratios below 1 across doubling grids to x = 10^6, q <= 12.
    // The grid starts at 4: at x = 2 the log^2(qx) weight is below 1 for
    // q = 1 and the normalized ratio is vacuously above 1 there.
    let mut grid: Vec<f64> = (2..=19).map(|k| (1u64 << k) as f64).collect();
    grid.push(1e6);
    let mut worst_h_ratio = 0.0f64;
    let mut worst_k_ratio = 0.0f64;
    for q in 1..=12u64 {
        let group = CharacterGroup::enumerate(q).unwrap();
        for &a in &group.units() {
            let a = a % q;
            let prefix = ProgressionPrefix::new(table, q, a).unwrap();
            for &x in &grid {
                let h = second_moment_h(table, &prefix, x, None, 0.5).unwrap();
                worst_h_ratio = worst_h_ratio.max(h.bound_ratio);
                assert!(
                    h.bound_ratio < 1.0,
                    "H ratio q={} a={} x={}: {}",
                    q,
                    a,
                    x,
                    h.bound_ratio
                );
                for hw in [1.0, x.sqrt()] {
                    if hw >= 1.0 && hw <= x && x + hw <= SIEVE_LIMIT as f64 {
                        let k = second_moment_k(table, &prefix, x, hw, None, 0.5).unwrap();
                        worst_k_ratio = worst_k_ratio.max(k.bound_ratio);
                        assert!(
                            k.bound_ratio < 1.0,
                            "K ratio q={} a={} x={} h={}: {}",
                            q,
                            a,
                            x,
                            hw,
                            k.bound_ratio
                        );
                    }
                }
            }
        }
    }
    finish(
        8,
        "second moments",
        start,
        900.0,
        &format!(
            "worst H-vs-quadrature rel {:.2e}; worst ratios H {:.4}, K {:.4}",
            worst_rel, worst_h_ratio, worst_k_ratio
        ),
    );
}

/// Jump-aligned midpoint quadrature of the H integrand.
fn h_quadrature_oracle(
    table: &LambdaTable,
    prefix: &ProgressionPrefix,
    x: f64,
    step: f64,
) -> f64 {
    let phi = euler_phi(prefix.modulus()).unwrap() as f64;
    let mut edges = vec![0.0];
    for &(n, _) in table.prime_powers() {
        let n = n as f64;
        if n > x {
            break;
        }
        if (n as u64) % prefix.modulus() == prefix.residue() {
            edges.push(n);
        }
    }
    if *edges.last().unwrap() < x {
        edges.push(x);
    }
    let mut total = 0.0;
    for w in edges.windows(2) {
        let n = (((w[1] - w[0]) / step).ceil() as usize).max(1);
        let dt = (w[1] - w[0]) / n as f64;
        let mut seg = 0.0;
        for i in 0..n {
            let tm = w[0] + (i as f64 + 0.5) * dt;
            let dev = prefix.psi(tm) - tm / phi;
            seg += dev * dev;
        }
        total += seg * dt;
    }
    total
}

#[test]
fn criterion_09_g_compatibility() {
    let start = Instant::now();
    let table = sieve();
    let cap = 10_000u64;
    let mut configs = 0;
    for q1 in 1..=12u64 {
        for q2 in 1..=12u64 {
            let d = gcd(q1, q2);
            let g1 = CharacterGroup::enumerate(q1).unwrap();
            let g2 = CharacterGroup::enumerate(q2).unwrap();
            for &a1 in &g1.units() {
                for &a2 in &g2.units() {
                    let (a1, a2) = (a1 % q1, a2 % q2);
                    let g = goldbach_g_table(table, cap, q1, q2, a1, a2);
                    for n in 2..=cap {
                        if n % d != (a1 + a2) % d {
                            assert_eq!(
                                g[n as usize], 0.0,
                                "G({}) with ({},{},{},{})",
                                n, q1, q2, a1, a2
                            );
                        }
                    }
                    configs += 1;
                }
            }
        }
    }
    // spot cross-route check against the pointwise evaluator
    for n in [104u64, 1000, 9999] {
        assert_eq!(goldbach_g(table, n, 4, 6, 1, 1), {
            let g = goldbach_g_table(table, cap, 4, 6, 1, 1);
            g[n as usize]
        });
    }
    finish(
        9,
        "G residue-compatibility vanishing",
        start,
        60.0,
        &format!("{} configurations, n <= 10^4, exact zeros", configs),
    );
}

#[test]
fn criterion_10_lower_bound_machinery() {
    let start = Instant::now();
    let table = sieve();
    let x = 1e4;
    let mut gallagher_detail = String::new();
    for q in [1u64, 2, 3, 4, 6] {
        let r = gallagher_check(table, x, q).unwrap();
        gallagher_detail.push_str(&format!("q={}: {:.1}; ", q, r.lhs));
        assert!(
            r.pass,
            "character-sum check failed at q={}: lhs {} > {}",
            q, r.lhs, r.threshold
        );
    }
    let omega = omega_construction(table, x, 7, 1, 1, 0, 0, None).unwrap();
    println!(
        "  primorial construction: Q = {}, lhs = {:.6e}, rhs = {:.6e}, margin = {:.2}x",
        omega.primorial,
        omega.lhs,
        omega.rhs,
        omega.lhs / omega.rhs
    );
    assert!(omega.pass, "lhs {} < rhs {}", omega.lhs, omega.rhs);
    finish(
        10,
        "dyadic character sums + primorial construction",
        start,
        120.0,
        &format!(
            "{} omega margin {:.2}x",
            gallagher_detail,
            omega.lhs / omega.rhs
        ),
    );
}
