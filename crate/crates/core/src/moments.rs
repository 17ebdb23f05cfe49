//! Character-twisted Chebyshev sums, the truncated explicit formula, and
//! second moments of psi in arithmetic progressions by exact piecewise
//! integration.
//!
//! Between consecutive prime-power jumps the H integrand is a quadratic
//! polynomial and the K integrand is constant, so both moments are
//! integrated in closed form segment by segment; only synthetic
//! exceptional-zero shifts fall back to adaptive quadrature.

use num_complex::Complex64;

use crate::accum::{ComplexNeumaier, Neumaier};
use crate::arith::{euler_phi, factorize, LambdaTable, ProgressionPrefix};
use crate::chars::{conductor_and_primitive, CharacterGroup, DirichletCharacter};
use crate::error::{Error, Result};
use crate::special::{adaptive_kronrod, gamma_pair_term, ln_gamma};
use crate::zeros::{check_imag, for_each_zero, zero_sum_h, ModulusZeros};

/// psi(t, chi) = sum over n <= t of chi(n) Lambda(n).
pub fn psi_chi(table: &LambdaTable, t: f64, chi: &DirichletCharacter) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    if t < 2.0 {
        return Complex64::new(0.0, 0.0);
    }
    let cap = t.floor() as u64;
    for &(n, lambda) in table.prime_powers() {
        if n > cap {
            break;
        }
        let w = chi.value(n);
        if w != Complex64::new(0.0, 0.0) {
            acc.add(w * lambda);
        }
    }
    acc.value()
}

/// Truncated explicit formula for psi(t, chi).
#[derive(Debug, Clone, Copy)]
pub struct ExplicitPsi {
    /// delta0 t - sum_{1<|gamma|<=T} t^rho/rho - sum_{|gamma|<=1} (t^rho-1)/rho,
    /// with the imprimitive Lambda-correction subtracted when chi is
    /// induced.
    pub approximation: Complex64,
    /// Sieve value psi(t, chi).
    pub exact: Complex64,
    /// exact - approximation.
    pub residual: Complex64,
    /// Number of zeros used (both signs).
    pub zeros_used: usize,
}

/// Evaluates the explicit formula for the character with the given label
/// mod the group's modulus, using zeros truncated at `height`.
///
/// Imprimitive characters are reduced to their primitive inducer; the
/// difference sum_{p | q, p coprime to f} sum_{p^k <= t} chi*(p^k) log p
/// is computed exactly from the sieve.
pub fn explicit_psi_chi(
    table: &LambdaTable,
    group: &CharacterGroup,
    label: u64,
    t: f64,
    height: f64,
    zeros: &ModulusZeros,
) -> Result<ExplicitPsi> {
    if t < 2.0 {
        return Err(Error::InvalidArgument(format!(
            "explicit formula needs t >= 2, got {}",
            t
        )));
    }
    let chi = group.by_label(label).ok_or(Error::BadResidue {
        residue: label,
        modulus: group.modulus(),
    })?;
    let (conductor, star) = conductor_and_primitive(chi)?;

    let ln_t = t.ln();
    let mut sum_high = ComplexNeumaier::new();
    let mut sum_low = ComplexNeumaier::new();
    let mut used = 0usize;
    {
        // Full zero multiset of this character: own positive ordinates
        // plus the conjugate character's list mirrored to gamma < 0.
        let own = zeros.set_for(label).ok_or(Error::MissingZeros {
            modulus: group.modulus(),
            label,
        })?;
        let conj_label = group.conjugate_label(label);
        let conj = zeros.set_for(conj_label).ok_or(Error::MissingZeros {
            modulus: group.modulus(),
            label: conj_label,
        })?;
        let mut eat = |rho: Complex64| {
            if rho.im.abs() > height {
                return;
            }
            used += 1;
            if rho.im.abs() > 1.0 {
                sum_high.add((rho * ln_t).exp() / rho);
            } else {
                sum_low.add(((rho * ln_t).exp() - 1.0) / rho);
            }
        };
        for z in own.zeros() {
            eat(Complex64::new(z.beta, z.gamma));
        }
        for z in conj.zeros() {
            eat(Complex64::new(z.beta, -z.gamma));
        }
    }

    let delta0 = if star.is_principal() { t } else { 0.0 };
    let mut approximation = Complex64::new(delta0, 0.0) - sum_high.value() - sum_low.value();

    // chi imprimitive: psi(t, chi) = psi(t, chi*) - correction.
    if conductor != group.modulus() {
        let mut correction = ComplexNeumaier::new();
        for (p, _) in factorize(group.modulus()) {
            if conductor % p == 0 {
                continue;
            }
            let lp = (p as f64).ln();
            let mut pk = p as u128;
            while pk <= t as u128 {
                correction.add(star.value(pk as u64) * lp);
                pk *= p as u128;
            }
        }
        approximation -= correction.value();
    }

    let exact = psi_chi(table, t, chi);
    Ok(ExplicitPsi {
        approximation,
        exact,
        residual: exact - approximation,
        zeros_used: used,
    })
}

/// Synthetic exceptional-zero shift of the moment integrands:
/// coef t^beta / (phi beta) with coef = chi~(a) = +-1.
#[derive(Debug, Clone, Copy)]
pub struct SiegelShift {
    pub coef: f64,
    pub beta: f64,
}

/// Second-moment evaluation output.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MomentResult {
    pub x: f64,
    pub h: Option<f64>,
    pub modulus: u64,
    pub residue: u64,
    pub value: f64,
    pub siegel_active: bool,
    /// value / (x^(2 b* + 1) log^2(qx)) for H,
    /// value / (h x^(2 b*) log^2(qx)) for K.
    pub bound_ratio: f64,
    pub segment_count: usize,
}

impl MomentResult {
    /// CSV row: x, h, q, a, value, bound_ratio, segment_count.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{},{},{},{:.16e},{:.16e},{}",
            self.x,
            self.h.map(|h| format!("{:.16e}", h)).unwrap_or_default(),
            self.modulus,
            self.residue,
            self.value,
            self.bound_ratio,
            self.segment_count
        )
    }
}

fn jump_points(table: &LambdaTable, modulus: u64, residue: u64, lo: f64, hi: f64) -> Vec<f64> {
    table
        .prime_powers()
        .iter()
        .map(|&(n, _)| n as f64)
        .filter(|&n| n > lo && n <= hi && (n as u64 % modulus) == residue)
        .collect()
}

/// H_{a,q}(x) = int_0^x (psi(t,q,a) - t/phi + shift)^2 dt.
///
/// Exact quadratic antiderivatives per segment without a shift; adaptive
/// Gauss-Kronrod to 1e-10 relative per segment with one.
pub fn second_moment_h(
    table: &LambdaTable,
    prefix: &ProgressionPrefix,
    x: f64,
    shift: Option<SiegelShift>,
    b_star: f64,
) -> Result<MomentResult> {
    if x < 0.0 || x > table.limit() as f64 {
        return Err(Error::InvalidArgument(format!(
            "moment endpoint {} outside sieve range",
            x
        )));
    }
    let q = prefix.modulus();
    let phi = euler_phi(q)? as f64;
    let mut edges = vec![0.0];
    edges.extend(jump_points(table, q, prefix.residue(), 0.0, x));
    if *edges.last().expect("nonempty") < x {
        edges.push(x);
    }

    let mut total = Neumaier::new();
    let mut segments = 0usize;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        segments += 1;
        let c = prefix.psi(lo.max(1.0)); // value on [lo, hi)
        match shift {
            None => {
                // integral of (c - t/phi)^2 = -(phi/3)(c - t/phi)^3
                let anti = |t: f64| -(phi / 3.0) * (c - t / phi).powi(3);
                total.add(anti(hi) - anti(lo));
            }
            Some(s) => {
                let f = |t: f64| {
                    let dev = c - t / phi + s.coef * t.powf(s.beta) / (phi * s.beta);
                    dev * dev
                };
                let (v, _) = adaptive_kronrod(&f, lo, hi, 1e-10, 1e-14);
                total.add(v);
            }
        }
    }
    let value = total.value();
    let logs = (q as f64 * x).ln();
    Ok(MomentResult {
        x,
        h: None,
        modulus: q,
        residue: prefix.residue(),
        value,
        siegel_active: shift.is_some(),
        bound_ratio: value / (x.powf(2.0 * b_star + 1.0) * logs * logs),
        segment_count: segments,
    })
}

/// K_{a,q}(x,h) = int_0^x (psi(t+h,q,a) - psi(t,q,a) - h/phi + shift)^2 dt
/// with shift = coef ((t+h)^beta - t^beta)/(phi beta).
pub fn second_moment_k(
    table: &LambdaTable,
    prefix: &ProgressionPrefix,
    x: f64,
    h: f64,
    shift: Option<SiegelShift>,
    b_star: f64,
) -> Result<MomentResult> {
    if !(1.0 <= h && h <= x) {
        return Err(Error::InvalidArgument(format!(
            "window width {} outside [1, {}]",
            h, x
        )));
    }
    if x + h > table.limit() as f64 {
        return Err(Error::InvalidArgument(format!(
            "x + h = {} beyond sieve limit {}",
            x + h,
            table.limit()
        )));
    }
    let q = prefix.modulus();
    let phi = euler_phi(q)? as f64;

    // Segment edges: jumps of psi(t) and of psi(t+h) inside (0, x).
    let mut edges = vec![0.0, x];
    for p in jump_points(table, q, prefix.residue(), 0.0, x) {
        edges.push(p);
    }
    for p in jump_points(table, q, prefix.residue(), 0.0, x + h) {
        let t = p - h;
        if t > 0.0 && t < x {
            edges.push(t);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    edges.dedup_by(|a, b| *a == *b);

    let mut total = Neumaier::new();
    let mut segments = 0usize;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        segments += 1;
        let tm = 0.5 * (lo + hi);
        let d = prefix.psi(tm + h) - prefix.psi(tm);
        match shift {
            None => {
                let dev = d - h / phi;
                total.add(dev * dev * (hi - lo));
            }
            Some(s) => {
                let f = |t: f64| {
                    let dev = d - h / phi
                        + s.coef * ((t + h).powf(s.beta) - t.powf(s.beta)) / (phi * s.beta);
                    dev * dev
                };
                let (v, _) = adaptive_kronrod(&f, lo, hi, 1e-10, 1e-14);
                total.add(v);
            }
        }
    }
    let value = total.value();
    let logs = (q as f64 * x).ln();
    Ok(MomentResult {
        x,
        h: Some(h),
        modulus: q,
        residue: prefix.residue(),
        value,
        siegel_active: shift.is_some(),
        bound_ratio: value / (h * x.powf(2.0 * b_star) * logs * logs),
        segment_count: segments,
    })
}

/// Report for the averaged-psi explicit formula.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ZeroSumReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// residual / (X log(2q) log X).
    pub ratio: f64,
    pub imag_residue: f64,
}

/// sum_{n<=X} psi(n-1, q, a) against X^2/(2 phi) plus the zero sum.
pub fn sum_psi_progression(
    prefix: &ProgressionPrefix,
    x: f64,
    a: u64,
    group: &CharacterGroup,
    zeros: &ModulusZeros,
) -> Result<ZeroSumReport> {
    if x < 2.0 || x > prefix.limit() as f64 {
        return Err(Error::InvalidArgument(format!(
            "X = {} outside [2, sieve limit]",
            x
        )));
    }
    let cap = x.floor() as usize;
    let mut units: i128 = 0;
    for n in 2..=cap {
        units += prefix.units_at(n - 1);
    }
    let lhs = crate::accum::units_to_f64(units);

    let phi = group.phi() as f64;
    let h = zero_sum_h(x, a, group, zeros)?;
    let rhs = x * x / (2.0 * phi) + h.value;
    let residual = lhs - rhs;
    let q = group.modulus();
    Ok(ZeroSumReport {
        lhs,
        rhs,
        residual,
        ratio: residual / (x * (2.0 * q as f64).ln() * x.ln()),
        imag_residue: h.imag_residue,
    })
}

/// Cumulative power sums P_beta(K) = sum_{k<=K} k^(beta-1) for K up to
/// `limit`, as a prefix array (index 0 holds 0).
fn power_prefix(limit: usize, beta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(limit + 1);
    out.push(0.0);
    let mut acc = Neumaier::new();
    for k in 1..=limit {
        acc.add((k as f64).powf(beta - 1.0));
        out.push(acc.value());
    }
    out
}

/// Exact double sum sum_{n<=X} sum_{m<=n-1, m=a(q)} Lambda(m) (n-m)^(beta-1),
/// computed in swapped order as sum_m Lambda(m) P_beta(X - m).
pub fn weighted_beta_lhs(table: &LambdaTable, x: f64, q: u64, a: u64, beta: f64) -> f64 {
    let cap = x.floor() as u64;
    if cap < 3 {
        return 0.0;
    }
    let p = power_prefix(cap as usize, beta);
    let mut acc = Neumaier::new();
    for &(m, lambda) in table.prime_powers() {
        if m + 1 > cap {
            break;
        }
        if m % q == a % q {
            acc.add(lambda * p[(cap - m) as usize]);
        }
    }
    acc.value()
}

/// Lemma-style comparison of the weighted beta sum against its
/// Gamma-weighted zero expansion.
pub fn weighted_beta_sum(
    table: &LambdaTable,
    x: f64,
    a: u64,
    beta: f64,
    group: &CharacterGroup,
    zeros: &ModulusZeros,
) -> Result<ZeroSumReport> {
    if !(0.5 < beta && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta = {} outside (1/2, 1)",
            beta
        )));
    }
    let q = group.modulus();
    let lhs = weighted_beta_lhs(table, x, q, a, beta);

    let ln_x = x.ln();
    let beta_c = Complex64::new(beta, 0.0);
    let mut zero_part = ComplexNeumaier::new();
    let mut pending: Result<()> = Ok(());
    for_each_zero(group, zeros, |chi, rho| {
        if pending.is_err() {
            return;
        }
        match gamma_pair_term(beta_c, rho, ln_x) {
            Ok(g) => zero_part.add(chi.value_conj(a) * g),
            Err(e) => pending = Err(e),
        }
    })?;
    pending?;
    let zero_sum = check_imag(zero_part.value())?;

    let phi = group.phi() as f64;
    let rhs = (x.powf(beta + 1.0) / (beta * (beta + 1.0)) - zero_sum.value) / phi;
    let residual = lhs - rhs;
    Ok(ZeroSumReport {
        lhs,
        rhs,
        residual,
        ratio: residual / (x * (2.0 * q as f64).ln() * x.ln()),
        imag_residue: zero_sum.imag_residue,
    })
}

/// The two power-sum identities.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PowerSumReport {
    pub lhs_single: f64,
    pub main_single: f64,
    /// |lhs - main| / X for the single-power identity.
    pub ratio_single: f64,
    pub lhs_pair: f64,
    pub main_pair: f64,
    pub ratio_pair: f64,
}

/// sum_{n<=X} sum_{k<=n-1} k^(beta-1) vs X^(beta+1)/(beta(beta+1)), and
/// sum_{n<=X} sum_{m+k=n} m^(beta2-1) k^(beta1-1) vs
/// Gamma(beta1)Gamma(beta2)/Gamma(beta1+beta2+1) X^(beta1+beta2).
pub fn power_sum_identities(x: f64, beta: f64, beta1: f64, beta2: f64) -> Result<PowerSumReport> {
    for b in [beta, beta1, beta2] {
        if !(0.5 < b && b < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "exponent {} outside (1/2, 1)",
                b
            )));
        }
    }
    if x < 2.0 {
        return Err(Error::InvalidArgument(format!("X = {} below 2", x)));
    }
    let cap = x.floor() as usize;

    let p_single = power_prefix(cap - 1, beta);
    let mut lhs_single = Neumaier::new();
    for n in 2..=cap {
        lhs_single.add(p_single[n - 1]);
    }
    let lhs_single = lhs_single.value();
    let main_single = x.powf(beta + 1.0) / (beta * (beta + 1.0));

    let p2 = power_prefix(cap - 1, beta2);
    let mut lhs_pair = Neumaier::new();
    for k in 1..cap {
        lhs_pair.add((k as f64).powf(beta1 - 1.0) * p2[cap - k]);
    }
    let lhs_pair = lhs_pair.value();
    let lg = ln_gamma(Complex64::new(beta1, 0.0))?
        + ln_gamma(Complex64::new(beta2, 0.0))?
        - ln_gamma(Complex64::new(beta1 + beta2 + 1.0, 0.0))?;
    let main_pair = lg.exp().re * x.powf(beta1 + beta2);

    Ok(PowerSumReport {
        lhs_single,
        main_single,
        ratio_single: (lhs_single - main_single).abs() / x,
        lhs_pair,
        main_pair,
        ratio_pair: (lhs_pair - main_pair).abs() / x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{ModulusZeros, ZeroCache, ZeroFinderOptions};

    fn table(n: u64) -> LambdaTable {
        LambdaTable::build(n).unwrap()
    }

    #[test]
    fn psi_chi_trivial_is_psi() {
        let t = table(100);
        let g = CharacterGroup::enumerate(1).unwrap();
        let full = ProgressionPrefix::new(&t, 1, 0).unwrap();
        let v = psi_chi(&t, 10.0, &g.characters()[0]);
        assert!((v.re - full.psi(10.0)).abs() < 1e-12);
        assert_eq!(v.im, 0.0);
        assert_eq!(psi_chi(&t, 1.5, &g.characters()[0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn psi_chi_orthogonality_reconstruction() {
        let t = table(20_000);
        for q in [3u64, 4, 5, 12] {
            let g = CharacterGroup::enumerate(q).unwrap();
            let psis: Vec<Complex64> = g
                .characters()
                .iter()
                .map(|chi| psi_chi(&t, 20_000.0, chi))
                .collect();
            for a in g.units() {
                let mut acc = ComplexNeumaier::new();
                for (chi, psi) in g.characters().iter().zip(&psis) {
                    acc.add(chi.value_conj(a) * psi);
                }
                let got = acc.value() / g.phi() as f64;
                let direct = ProgressionPrefix::new(&t, q, a % q).unwrap().psi(20_000.0);
                assert!(
                    (got.re - direct).abs() < 1e-8 && got.im.abs() < 1e-8,
                    "q={} a={}",
                    q,
                    a
                );
            }
        }
    }

    #[test]
    fn explicit_formula_no_zeros_principal_is_t() {
        let t = table(1000);
        let g = CharacterGroup::enumerate(1).unwrap();
        let mz = ModulusZeros::empty(&g);
        let e = explicit_psi_chi(&t, &g, 1, 700.0, 100.0, &mz).unwrap();
        assert_eq!(e.approximation, Complex64::new(700.0, 0.0));
        assert_eq!(e.zeros_used, 0);
    }

    #[test]
    fn explicit_formula_residual_small_with_zeros() {
        let t = table(1200);
        let g = CharacterGroup::enumerate(1).unwrap();
        let mut cache = ZeroCache::new();
        let mz = ModulusZeros::compute(&g, 100.0, ZeroFinderOptions::default(), &mut cache).unwrap();
        let e = explicit_psi_chi(&t, &g, 1, 100.0, 100.0, &mz).unwrap();
        let bound = 5.0 + 100.0 * (100.0f64 * 100.0).ln().powi(2) / 100.0 * 10.0;
        assert!(e.residual.norm() < bound);
        assert!(e.residual.norm() < 5.0, "residual {}", e.residual.norm());

        // q = 4 nonprincipal at t = 1000, T = 200
        let g4 = CharacterGroup::enumerate(4).unwrap();
        let mz4 =
            ModulusZeros::compute(&g4, 200.0, ZeroFinderOptions::default(), &mut cache).unwrap();
        let e4 = explicit_psi_chi(&t, &g4, 3, 1000.0, 200.0, &mz4).unwrap();
        assert!(e4.residual.norm() < 10.0, "residual {}", e4.residual.norm());
    }

    #[test]
    fn explicit_formula_imprimitive_reduction() {
        // chi mod 6 is induced by the quadratic character mod 3; the
        // correction removes the p = 2 prime powers.
        let t = table(5000);
        let g6 = CharacterGroup::enumerate(6).unwrap();
        let chi6 = g6.characters().iter().find(|c| !c.is_principal()).unwrap();
        let mut cache = ZeroCache::new();
        let mz6 =
            ModulusZeros::compute(&g6, 120.0, ZeroFinderOptions::default(), &mut cache).unwrap();
        let e = explicit_psi_chi(&t, &g6, chi6.label(), 3000.0, 120.0, &mz6).unwrap();
        assert!(
            e.residual.norm() < 15.0,
            "imprimitive residual {}",
            e.residual.norm()
        );
    }

    #[test]
    fn h_moment_below_first_jump() {
        let t = table(100);
        for (q, a) in [(1u64, 0u64), (3, 1), (5, 2)] {
            let p = ProgressionPrefix::new(&t, q, a).unwrap();
            let phi = euler_phi(q).unwrap() as f64;
            let x = 1.9;
            let m = second_moment_h(&t, &p, x, None, 0.5).unwrap();
            let want = x * x * x / (3.0 * phi * phi);
            assert!((m.value - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    /// Fine-grid midpoint quadrature oracle, split at the jumps.
    fn h_oracle(t: &LambdaTable, p: &ProgressionPrefix, x: f64, step: f64) -> f64 {
        let phi = euler_phi(p.modulus()).unwrap() as f64;
        let mut edges = vec![0.0];
        edges.extend(jump_points(t, p.modulus(), p.residue(), 0.0, x));
        if *edges.last().unwrap() < x {
            edges.push(x);
        }
        let mut acc = Neumaier::new();
        for w in edges.windows(2) {
            let n = (((w[1] - w[0]) / step).ceil() as usize).max(1);
            let dt = (w[1] - w[0]) / n as f64;
            for i in 0..n {
                let tm = w[0] + (i as f64 + 0.5) * dt;
                let dev = p.psi(tm) - tm / phi;
                acc.add(dev * dev * dt);
            }
        }
        acc.value()
    }

    #[test]
    fn h_moment_matches_quadrature_oracle() {
        let t = table(1000);
        let p = ProgressionPrefix::new(&t, 1, 0).unwrap();
        let m = second_moment_h(&t, &p, 10.0, None, 0.5).unwrap();
        let oracle = h_oracle(&t, &p, 10.0, 1e-5);
        assert!((m.value - oracle).abs() < 1e-6 * oracle, "{} vs {}", m.value, oracle);

        let p3 = ProgressionPrefix::new(&t, 3, 2).unwrap();
        let m3 = second_moment_h(&t, &p3, 500.0, None, 0.5).unwrap();
        let oracle3 = h_oracle(&t, &p3, 500.0, 1e-3);
        assert!((m3.value - oracle3).abs() < 1e-6 * oracle3);
    }

    #[test]
    fn h_moment_monotone_in_x() {
        let t = table(2000);
        let p = ProgressionPrefix::new(&t, 4, 1).unwrap();
        let mut prev = 0.0;
        for x in [2.0, 8.0, 32.0, 128.0, 512.0, 2000.0] {
            let m = second_moment_h(&t, &p, x, None, 0.5).unwrap();
            assert!(m.value >= prev);
            prev = m.value;
        }
    }

    #[test]
    fn h_moment_siegel_quadrature_matches_closed_form() {
        // With a shift the integrand is still a sum of powers; closed
        // form per segment as the oracle for the quadrature path.
        let t = table(200);
        let p = ProgressionPrefix::new(&t, 4, 3).unwrap();
        let shift = SiegelShift { coef: 1.0, beta: 0.8 };
        let m = second_moment_h(&t, &p, 50.0, Some(shift), 0.5).unwrap();
        assert!(m.siegel_active);

        let phi = 2.0;
        let mut edges = vec![0.0];
        edges.extend(jump_points(&t, 4, 3, 0.0, 50.0));
        edges.push(50.0);
        let mut oracle = Neumaier::new();
        for w in edges.windows(2) {
            let c = p.psi(w[0].max(1.0));
            // (c - t/phi + t^B/(phi B))^2 expanded; antiderivative of
            // each power term.
            let b = shift.beta;
            let k = shift.coef / (phi * b);
            let anti = |t: f64| {
                if t == 0.0 {
                    return 0.0;
                }
                c * c * t + t.powi(3) / (3.0 * phi * phi) + k * k * t.powf(2.0 * b + 1.0) / (2.0 * b + 1.0)
                    - c * t * t / phi
                    + 2.0 * c * k * t.powf(b + 1.0) / (b + 1.0)
                    - 2.0 * k * t.powf(b + 2.0) / ((b + 2.0) * phi)
            };
            oracle.add(anti(w[1]) - anti(w[0]));
        }
        let oracle = oracle.value();
        assert!(
            (m.value - oracle).abs() < 1e-8 * oracle.max(1.0),
            "{} vs {}",
            m.value,
            oracle
        );
    }

    #[test]
    fn k_moment_below_first_jump_and_bounds() {
        let t = table(100);
        let p = ProgressionPrefix::new(&t, 3, 1).unwrap();
        let m = second_moment_k(&t, &p, 1.0, 1.0, None, 0.5).unwrap();
        let want = 1.0 / 4.0; // h^2 x / phi^2 with h = x = 1, phi = 2
        assert!((m.value - want).abs() < 1e-14);

        assert!(second_moment_k(&t, &p, 10.0, 0.5, None, 0.5).is_err());
        assert!(second_moment_k(&t, &p, 10.0, 11.0, None, 0.5).is_err());
    }

    /// Midpoint oracle for K with edges at both jump families.
    fn k_oracle(t: &LambdaTable, p: &ProgressionPrefix, x: f64, h: f64, step: f64) -> f64 {
        let phi = euler_phi(p.modulus()).unwrap() as f64;
        let mut edges = vec![0.0, x];
        for j in jump_points(t, p.modulus(), p.residue(), 0.0, x) {
            edges.push(j);
        }
        for j in jump_points(t, p.modulus(), p.residue(), 0.0, x + h) {
            if j - h > 0.0 && j - h < x {
                edges.push(j - h);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let mut acc = Neumaier::new();
        for w in edges.windows(2) {
            let n = (((w[1] - w[0]) / step).ceil() as usize).max(1);
            let dt = (w[1] - w[0]) / n as f64;
            for i in 0..n {
                let tm = w[0] + (i as f64 + 0.5) * dt;
                let dev = p.psi(tm + h) - p.psi(tm) - h / phi;
                acc.add(dev * dev * dt);
            }
        }
        acc.value()
    }

    #[test]
    fn k_moment_matches_quadrature_oracle() {
        let t = table(1000);
        let p = ProgressionPrefix::new(&t, 1, 0).unwrap();
        let m = second_moment_k(&t, &p, 100.0, 10.0, None, 0.5).unwrap();
        let oracle = k_oracle(&t, &p, 100.0, 10.0, 1e-4);
        assert!(
            (m.value - oracle).abs() < 1e-6 * oracle.max(1.0),
            "{} vs {}",
            m.value,
            oracle
        );

        let p5 = ProgressionPrefix::new(&t, 5, 3).unwrap();
        let m5 = second_moment_k(&t, &p5, 200.0, 7.5, None, 0.5).unwrap();
        let oracle5 = k_oracle(&t, &p5, 200.0, 7.5, 1e-4);
        assert!((m5.value - oracle5).abs() < 1e-6 * oracle5.max(1.0));
    }

    #[test]
    fn sum_psi_progression_small_case() {
        let t = table(100);
        let g = CharacterGroup::enumerate(1).unwrap();
        let p = ProgressionPrefix::new(&t, 1, 0).unwrap();
        let mz = ModulusZeros::empty(&g);
        let r = sum_psi_progression(&p, 4.0, 0, &g, &mz).unwrap();
        let want = 2.0f64.ln() + (2.0f64.ln() + 3.0f64.ln());
        assert!((r.lhs - want).abs() < 1e-12);
        assert!((r.lhs - 2.4849066).abs() < 1e-6);
        // T -> 0: rhs is X^2/(2 phi) alone
        assert_eq!(r.rhs, 16.0 / 2.0);
    }

    #[test]
    fn sum_psi_progression_ratio_bounded_with_zeros() {
        let t = table(20_000);
        let g3 = CharacterGroup::enumerate(3).unwrap();
        let p = ProgressionPrefix::new(&t, 3, 2).unwrap();
        let mut cache = ZeroCache::new();
        let mz =
            ModulusZeros::compute(&g3, 240.0, ZeroFinderOptions::default(), &mut cache).unwrap();
        let r = sum_psi_progression(&p, 20_000.0, 2, &g3, &mz).unwrap();
        assert!(r.ratio.abs() < 1.0, "ratio {}", r.ratio);
    }

    #[test]
    fn weighted_beta_lhs_edges_and_degeneration() {
        let t = table(1000);
        // X < 3: no admissible m
        assert_eq!(weighted_beta_lhs(&t, 2.9, 1, 0, 0.75), 0.0);

        // beta = 1: degenerates to sum psi(n-1)
        let p = ProgressionPrefix::new(&t, 3, 1).unwrap();
        let x = 800.0;
        let lhs = weighted_beta_lhs(&t, x, 3, 1, 1.0);
        let mut direct: i128 = 0;
        for n in 2..=800usize {
            direct += p.units_at(n - 1);
        }
        let direct = crate::accum::units_to_f64(direct);
        assert!((lhs - direct).abs() < 1e-9 * direct.max(1.0));
    }

    #[test]
    fn weighted_beta_lhs_matches_naive_double_sum() {
        let t = table(400);
        let x = 400.0;
        for (q, a, beta) in [(1u64, 0u64, 0.6), (4, 3, 0.9)] {
            let fast = weighted_beta_lhs(&t, x, q, a, beta);
            let mut naive = 0.0;
            for n in 2..=400u64 {
                for m in 1..n {
                    if m % q == a && t.lambda(m) != 0.0 {
                        naive += t.lambda(m) * ((n - m) as f64).powf(beta - 1.0);
                    }
                }
            }
            assert!((fast - naive).abs() < 1e-8 * naive.max(1.0), "q={}", q);
        }
    }

    #[test]
    fn weighted_beta_sum_report() {
        let t = table(1000);
        let g = CharacterGroup::enumerate(1).unwrap();
        let mut cache = ZeroCache::new();
        let mz =
            ModulusZeros::compute(&g, 100.0, ZeroFinderOptions::default(), &mut cache).unwrap();
        let r = weighted_beta_sum(&t, 1000.0, 0, 0.75, &g, &mz).unwrap();
        assert!(r.ratio.abs() < 5.0, "ratio {}", r.ratio);
        assert!(weighted_beta_sum(&t, 1000.0, 0, 0.3, &g, &mz).is_err());
    }

    #[test]
    fn power_sums_small_and_against_naive() {
        let r = power_sum_identities(2.0, 0.75, 0.6, 0.9).unwrap();
        assert_eq!(r.lhs_single, 1.0);

        let x = 2000.0;
        let r = power_sum_identities(x, 0.75, 0.6, 0.9).unwrap();
        let mut naive1 = 0.0;
        for n in 2..=2000u64 {
            for k in 1..n {
                naive1 += (k as f64).powf(0.75 - 1.0);
            }
        }
        assert!((r.lhs_single - naive1).abs() < 1e-7 * naive1);
        let mut naive2 = 0.0;
        for n in 2..=2000u64 {
            for m in 1..n {
                let k = n - m;
                naive2 += (m as f64).powf(0.9 - 1.0) * (k as f64).powf(0.6 - 1.0);
            }
        }
        assert!((r.lhs_pair - naive2).abs() < 1e-7 * naive2);

        assert!(power_sum_identities(100.0, 0.2, 0.6, 0.9).is_err());
    }
}
